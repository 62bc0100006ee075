"""Completeness decisions for left-invariant metrics on 3-dimensional Lie groups.

Every verdict carries a certificate that ``validate_certificate`` can re-check
independently of how it was produced.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from .errors import InternalInconsistency, NotE11
from .flows import euler_field_dual
from .forms import (
    MetricOperatorU,
    QuadraticForm3,
    SpectrumShape,
    require_nondegenerate,
    restrict_form,
    u_from_metric,
)
from .lie3 import AlgebraType, LieAlgebra3, classify
from .quadfield import (
    FIRST_INTEGRAL_RESIDUAL_TOL,
    AffineCertificate,
    QuadraticField,
    definite_combination,
    derivative_cubic,
    find_idempotents,
    idempotent_residual,
    idempotent_tolerance,
    invariant_directions,
    is_affine_quadratic,
    pick_witness,
    polish_idempotent,
    quadratic_first_integrals,
)

CRIT_TOL = 1e-9


class Status(enum.Enum):
    COMPLETE = "Complete"
    INCOMPLETE = "Incomplete"
    UNDECIDED = "Undecided"


@dataclass(frozen=True, eq=False)
class StructuralComplete:
    reason: str  # Abelian | Heisenberg | Compact | E2


@dataclass(frozen=True, eq=False)
class DefiniteFirstIntegral:
    form: QuadraticForm3
    min_eigenvalue: float


@dataclass(frozen=True, eq=False)
class Linearizable:
    certificate: AffineCertificate


@dataclass(frozen=True, eq=False)
class IdempotentWitness:
    X: np.ndarray
    residual: float
    predicted_blowup_time: float = 1.0


@dataclass(frozen=True, eq=False)
class SlCriterion:
    case: str  # "i" | "ii" | "iii" | "single-eigendirection"
    shape: SpectrumShape
    eigenvalues: tuple
    criterion_value: Optional[float] = None
    gamma: Optional[float] = None
    timelike_eigenvalue: Optional[float] = None
    supporting: object = None  # Linearizable | DefiniteFirstIntegral | IdempotentWitness | None


@dataclass(frozen=True, eq=False)
class E11SignCriterion:
    lam: float
    mu: float
    nu: float
    c: float
    frame: np.ndarray  # columns e1, e2, e3 of the adapted basis
    degenerate_on_derived: bool
    supporting: object = None  # DefiniteFirstIntegral | IdempotentWitness


@dataclass(frozen=True, eq=False)
class NecessaryOnly:
    message: str
    n_directions: int
    n_zero_directions: int


@dataclass(frozen=True, eq=False)
class BoundaryCase:
    quantity: str
    value: float
    margin: float


Certificate = Union[
    StructuralComplete,
    DefiniteFirstIntegral,
    Linearizable,
    IdempotentWitness,
    SlCriterion,
    E11SignCriterion,
    NecessaryOnly,
    BoundaryCase,
]


@dataclass(frozen=True, eq=False)
class CompletenessVerdict:
    status: Status
    certificate: Certificate
    field: QuadraticField
    field_kind: str  # "lax" | "euler-dual" | "euler"
    algebra_type: Optional[AlgebraType] = None
    notes: tuple = ()

    @property
    def witness(self) -> Optional[np.ndarray]:
        w = self.certificate
        if isinstance(w, (SlCriterion, E11SignCriterion)):
            w = w.supporting
        return w.X if isinstance(w, IdempotentWitness) else None

    @property
    def definite_integral(self) -> Optional[DefiniteFirstIntegral]:
        w = self.certificate
        if isinstance(w, (SlCriterion, E11SignCriterion)):
            w = w.supporting
        return w if isinstance(w, DefiniteFirstIntegral) else None

    @property
    def label(self) -> str:
        c = self.certificate
        if isinstance(c, (BoundaryCase, NecessaryOnly)):
            return f"{self.status.value}({type(c).__name__})"
        return self.status.value


# ----------------------------------------------------------------------------
# certificate checks


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    ok: bool


def _first_integral_residual(F: QuadraticField, S: np.ndarray) -> float:
    Sn = S / max(np.linalg.norm(S), 1e-300)
    return float(np.max(np.abs(derivative_cubic(F, Sn))))


def validate_certificate(verdict: CompletenessVerdict) -> List[Check]:
    """Re-check the certificate of a verdict from scratch."""
    F = verdict.field
    checks: List[Check] = []
    X = verdict.witness
    if X is not None:
        tol = idempotent_tolerance(X)
        r = idempotent_residual(F, X)
        checks.append(Check("idempotent_residual", r, tol, r <= tol))
    dfi = verdict.definite_integral
    if dfi is not None:
        S = dfi.form.S
        lmin = float(np.linalg.eigvalsh(S / np.linalg.norm(S))[0])
        checks.append(Check("definite_min_eigenvalue", lmin, 0.0, lmin > 0))
        tol = FIRST_INTEGRAL_RESIDUAL_TOL * max(1.0, F.coef_norm)
        r = _first_integral_residual(F, S)
        checks.append(Check("first_integral_residual", r, tol, r <= tol))
    lin = verdict.certificate.supporting if isinstance(verdict.certificate, SlCriterion) else verdict.certificate
    if isinstance(lin, Linearizable):
        W = lin.certificate.u_basis
        r = float(np.max(np.abs(np.einsum("ia,kij,jb->kab", W, F.A, W)))) if W.shape[1] else 0.0
        tol = 1e-10 * max(1.0, F.coef_norm)
        checks.append(Check("affine_uu_block", r, tol, r <= tol))
        L = lin.certificate.constant_forms
        r = float(np.max(np.abs(np.einsum("li,iab->lab", L, F.A)))) if len(L) else 0.0
        checks.append(Check("constant_forms_residual", r, tol, r <= tol))
    return checks


# ----------------------------------------------------------------------------
# idempotent route


def idempotent_incompleteness(F: QuadraticField, field_kind: str = "euler-dual") -> Optional[CompletenessVerdict]:
    """Incomplete with an idempotent witness if F has a strict idempotent.

    From X* the solution is alpha(t) X* with alpha' = alpha^2, alpha(0) = 1, so
    it escapes at t = 1.
    """
    idem = find_idempotents(F)
    if not idem:
        return None
    X = pick_witness(F, idem)
    return CompletenessVerdict(
        Status.INCOMPLETE,
        IdempotentWitness(X, idempotent_residual(F, X), 1.0),
        F,
        field_kind,
    )


def _witness(F: QuadraticField, X0) -> IdempotentWitness:
    X = polish_idempotent(F, np.asarray(X0, float))
    return IdempotentWitness(X, idempotent_residual(F, X), 1.0)


# ----------------------------------------------------------------------------
# E(1,1)


def e11_adapted_frame(alg: LieAlgebra3):
    """Basis E1, E2, E3 with [E1,E2] = E2, [E1,E3] = -E3, [E2,E3] = 0 (columns)."""
    c = alg.c.reshape(3, 9)
    U, s, _ = np.linalg.svd(c)
    scale = max(s[0], 1e-300)
    if not (s[1] > 1e-9 * scale and s[2] <= 1e-9 * scale):
        raise NotE11("derived algebra is not 2-dimensional")
    D = U[:, :2]
    n = U[:, 2]
    M = D.T @ alg.ad(n) @ D
    w, V = np.linalg.eig(M)
    if np.max(np.abs(w.imag)) > 1e-9 * scale or abs(w.real.sum()) > 1e-9 * max(1.0, np.abs(w).max()):
        raise NotE11(f"ad restricted to the derived algebra has eigenvalues {w}")
    w, V = w.real, V.real
    order = np.argsort(-w)
    w, V = w[order], V[:, order]
    if w[0] <= 1e-9 * scale:
        raise NotE11("ad restricted to the derived algebra is not hyperbolic")
    E1 = n / w[0]
    E2 = D @ V[:, 0]
    E3 = D @ V[:, 1]
    E2, E3 = E2 / np.linalg.norm(E2), E3 / np.linalg.norm(E3)
    P = np.column_stack([E1, E2, E3])
    res = _e11_table_residual(alg, P)
    if res > 1e-9 * max(1.0, scale):
        raise NotE11(f"adapted frame residual {res:.3e}")
    return P


def _e11_table_residual(alg, P):
    cf = alg.change_basis(P).c
    target = np.zeros((3, 3, 3))
    target[1, 0, 1], target[1, 1, 0] = 1, -1
    target[2, 0, 2], target[2, 2, 0] = -1, 1
    return float(np.max(np.abs(cf - target)))


def e11_criterion(alg: LieAlgebra3, metric, crit_tol: float = CRIT_TOL) -> CompletenessVerdict:
    cls = classify(alg)
    if cls.kind is not AlgebraType.E11:
        raise NotE11(f"algebra is {cls.kind.value}")
    S = require_nondegenerate(metric)
    F = euler_field_dual(alg, S)
    P0 = e11_adapted_frame(alg)
    E1, E2, E3 = P0.T
    _, degenerate = restrict_form(S, [E2, E3])
    if degenerate:
        s = np.linalg.inv(P0.T @ S @ P0)
        xa = np.zeros(3)
        if abs(s[0, 1]) > abs(s[0, 2]):
            xa[1] = 1 / s[0, 1]
            xa[0] = -0.5 * s[1, 1] * xa[1] ** 2
        else:
            xa[2] = -1 / s[0, 2]
            xa[0] = 0.5 * s[2, 2] * xa[2] ** 2
        W = _witness(F, np.linalg.solve(P0.T, xa))
        crit = E11SignCriterion(float(s[0, 0]), float(s[1, 1]), float(s[2, 2]), float(s[1, 2]), P0, True, W)
        return CompletenessVerdict(Status.INCOMPLETE, crit, F, "euler-dual", AlgebraType.E11)
    # make e1 metric-orthogonal to the derived algebra; the bracket table is unchanged
    G = np.array([[E2 @ S @ E2, E2 @ S @ E3], [E3 @ S @ E2, E3 @ S @ E3]])
    ab = np.linalg.solve(G, -np.array([E1 @ S @ E2, E1 @ S @ E3]))
    e1 = E1 + ab[0] * E2 + ab[1] * E3
    P = np.column_stack([e1, E2, E3])
    assert _e11_table_residual(alg, P) <= 1e-8 * max(1.0, np.abs(alg.c).max()), "adapted basis lost the bracket table"
    Sa = P.T @ S @ P
    if abs(Sa[0, 0]) <= 1e-12 * np.abs(Sa).max():
        raise InternalInconsistency("orthogonal complement of the derived algebra is isotropic")
    s = np.linalg.inv(Sa)
    lam, mu, nu, c = float(s[0, 0]), float(s[1, 1]), float(s[2, 2]), float(s[1, 2])
    margin = crit_tol * float(np.max(np.abs(s))) ** 2
    lm, ln = lam * mu, lam * nu
    for name, v in (("lambda*mu", lm), ("lambda*nu", ln)):
        if abs(v) <= margin:
            return CompletenessVerdict(
                Status.UNDECIDED, BoundaryCase(name, v, margin), F, "euler-dual", AlgebraType.E11
            )
    if lm > 0 and ln > 0:
        Q = np.diag([lam, mu, nu]) * np.sign(lam)
        # adapted dual coordinates xi_a = P^T xi
        Qx = P @ Q @ P.T
        sup = DefiniteFirstIntegral(QuadraticForm3(Qx, "dual"), float(np.linalg.eigvalsh(Qx)[0]))
        crit = E11SignCriterion(lam, mu, nu, c, P, False, sup)
        return CompletenessVerdict(Status.COMPLETE, crit, F, "euler-dual", AlgebraType.E11)
    xa = np.zeros(3)
    if lm < 0:
        xa[0] = 1 / lam
        xa[1] = np.sqrt(-1 / lm)
    else:
        xa[0] = -1 / lam
        xa[2] = np.sqrt(-1 / ln)
    W = _witness(F, np.linalg.solve(P.T, xa))
    crit = E11SignCriterion(lam, mu, nu, c, P, False, W)
    return CompletenessVerdict(Status.INCOMPLETE, crit, F, "euler-dual", AlgebraType.E11)


# ----------------------------------------------------------------------------
# sl(2, R)


def sl2_criterion(u: MetricOperatorU, alg: LieAlgebra3, crit_tol: float = CRIT_TOL) -> CompletenessVerdict:
    """Verdict from the spectrum of u, on the Lax field x' = [x, u^{-1} x]."""
    F = QuadraticField(np.einsum("kij,jm->kim", alg.c, u.U_inv))
    ed, shape = u.eigen_data, u.shape
    eig = tuple(complex(v) if abs(complex(v).imag) > 0 else float(np.real(v)) for v, _ in ed.clusters)
    T = AlgebraType.SL2R

    def verdict(status, cert):
        return CompletenessVerdict(status, cert, F, "lax", T)

    if shape.minimal_degree_le2:
        cert = is_affine_quadratic(F)
        sup = Linearizable(cert) if cert is not None else None
        if sup is None:
            raise InternalInconsistency(f"u has minimal polynomial of degree <= 2 but the Lax field is not affine ({shape.value})")
        return verdict(Status.COMPLETE, SlCriterion("i", shape, eig, supporting=sup))

    if shape is SpectrumShape.SINGLE_EIGENDIRECTION:
        idem = find_idempotents(F)
        if not idem:
            raise InternalInconsistency("single eigendirection but no idempotent found")
        X = pick_witness(F, idem)
        W = IdempotentWitness(X, idempotent_residual(F, X))
        return verdict(Status.INCOMPLETE, SlCriterion("single-eigendirection", shape, eig, supporting=W))

    if shape is SpectrumShape.THREE_DISTINCT:
        t = ed.timelike_index
        if t is None:
            raise InternalInconsistency("no unique timelike eigenvector for three distinct eigenvalues")
        w = np.linalg.eigvals(u.U).real
        w = np.sort(w)
        a3 = float(w[t])
        a1, a2 = (float(w[i]) for i in range(3) if i != t)
        value = (1 / a3 - 1 / a2) * (1 / a3 - 1 / a1)
        margin = crit_tol * max(1.0, max(abs(1 / a) for a in (a1, a2, a3))) ** 2
        if abs(value) <= margin:
            return verdict(Status.UNDECIDED, BoundaryCase("(1/a3-1/a2)(1/a3-1/a1)", value, margin))
        if value > 0:
            dc = definite_combination([q.S for q in lax_invariants_from_u(u)])
            if dc is None:
                raise InternalInconsistency("case (ii) criterion positive but no definite combination of k and k u^-1")
            sup = DefiniteFirstIntegral(dc.form, dc.min_eigenvalue)
            cert = SlCriterion("ii", shape, eig, value, timelike_eigenvalue=a3, supporting=sup)
            return verdict(Status.COMPLETE, cert)
        idem = find_idempotents(F)
        if not idem:
            raise InternalInconsistency("case (ii) criterion negative but no idempotent found")
        X = pick_witness(F, idem)
        cert = SlCriterion("ii", shape, eig, value, timelike_eigenvalue=a3,
                           supporting=IdempotentWitness(X, idempotent_residual(F, X)))
        return verdict(Status.INCOMPLETE, cert)

    # one double, one simple, cyclic
    ad, asimple, gamma = ed.double_value, ed.simple_value, ed.gamma
    value = gamma * (1 / ad - 1 / asimple)
    margin = crit_tol * max(1.0, abs(gamma)) * max(1.0, abs(1 / ad), abs(1 / asimple))
    if abs(value) <= margin:
        return verdict(Status.UNDECIDED, BoundaryCase("gamma*(1/a_double-1/a_simple)", value, margin))
    if value > 0:
        dc = definite_combination(quadratic_first_integrals(F))
        sup = DefiniteFirstIntegral(dc.form, dc.min_eigenvalue) if dc is not None else None
        return verdict(Status.COMPLETE, SlCriterion("iii", shape, eig, value, gamma=gamma, supporting=sup))
    idem = find_idempotents(F)
    if not idem:
        raise InternalInconsistency("case (iii) criterion negative but no idempotent found")
    X = pick_witness(F, idem)
    cert = SlCriterion("iii", shape, eig, value, gamma=gamma, supporting=IdempotentWitness(X, idempotent_residual(F, X)))
    return verdict(Status.INCOMPLETE, cert)


def lax_invariants_from_u(u: MetricOperatorU):
    k = u.k_ref
    return [QuadraticForm3(k), QuadraticForm3(k @ u.U_inv)]


# ----------------------------------------------------------------------------
# dispatch

_STRUCTURAL = {
    AlgebraType.ABELIAN: "Abelian",
    AlgebraType.HEISENBERG: "Heisenberg",
    AlgebraType.SU2: "Compact",
    AlgebraType.E2: "E2",
}

NON_UNIMODULAR_NOTE = (
    "no idempotent found; on non-unimodular algebras this is necessary but not sufficient for completeness"
)


def _settle_boundary(verdict: CompletenessVerdict) -> CompletenessVerdict:
    """Boundary cases of a criterion: try linearization, then the idempotent route."""
    F = verdict.field
    cert = is_affine_quadratic(F)
    note = (f"boundary of the closed-form criterion: {verdict.certificate.quantity}",)
    if cert is not None:
        return CompletenessVerdict(Status.COMPLETE, Linearizable(cert), F, verdict.field_kind, verdict.algebra_type, note)
    v = idempotent_incompleteness(F, verdict.field_kind)
    if v is not None:
        return CompletenessVerdict(v.status, v.certificate, F, verdict.field_kind, verdict.algebra_type, note)
    return verdict


def _guard(verdict: CompletenessVerdict) -> CompletenessVerdict:
    """Cross-check a closed-form verdict against the generic idempotent search."""
    if verdict.status is Status.UNDECIDED:
        return _settle_boundary(verdict)
    idem = find_idempotents(verdict.field)
    if verdict.status is Status.COMPLETE and idem:
        raise InternalInconsistency(f"criterion says Complete but an idempotent exists: {idem[0]}")
    if verdict.status is Status.INCOMPLETE and not idem:
        raise InternalInconsistency("criterion says Incomplete but the idempotent search is empty")
    return verdict


def decide(alg: LieAlgebra3, metric, guard: bool = True) -> CompletenessVerdict:
    S = require_nondegenerate(metric)
    kind = classify(alg).kind
    if kind in _STRUCTURAL:
        F = euler_field_dual(alg, S)
        return CompletenessVerdict(Status.COMPLETE, StructuralComplete(_STRUCTURAL[kind]), F, "euler-dual", kind)
    if kind is AlgebraType.E11:
        v = e11_criterion(alg, S)
        return _guard(v) if guard else v
    if kind is AlgebraType.SL2R:
        v = sl2_criterion(u_from_metric(alg, S), alg)
        return _guard(v) if guard else v
    F = euler_field_dual(alg, S)
    dirs = invariant_directions(F)
    v = idempotent_incompleteness(F, "euler-dual")
    if v is not None:
        return CompletenessVerdict(v.status, v.certificate, F, "euler-dual", kind)
    n_zero = sum(d.kind == "Zero" for d in dirs)
    return CompletenessVerdict(
        Status.UNDECIDED, NecessaryOnly(NON_UNIMODULAR_NOTE, len(dirs), n_zero), F, "euler-dual", kind
    )
