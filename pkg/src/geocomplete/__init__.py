"""Geodesic completeness of left-invariant metrics on 3-dimensional Lie groups."""

from .completeness import CompletenessVerdict, Status, decide, e11_criterion, idempotent_incompleteness, sl2_criterion
from .flows import energy_form, euler_field_algebra, euler_field_dual, lax_field, levi_civita
from .forms import QuadraticForm3, killing_form, normalized_killing, signature, u_from_metric
from .lie3 import AlgebraType, LieAlgebra3, classify, is_unimodular, milnor_normal_form, standard_algebra
from .odeint import IntegrateOptions, Trajectory, estimate_blowup_time, integrate, verify_against_closed_form
from .quadfield import (
    QuadraticField,
    definite_combination,
    find_idempotents,
    invariant_directions,
    is_affine_quadratic,
    planar_completeness,
    quadratic_first_integrals,
)

__version__ = "0.1.0"
