"""Geodesic-flow quadratic fields of a left-invariant metric.

The algebra-side Euler field comes from the Levi-Civita product (Koszul
formula). The dual field is assembled directly from the structure constants
and S^{-1}, so the two routes can be checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedMetric
from .forms import QuadraticForm3, require_nondegenerate, u_from_metric
from .lie3 import LieAlgebra3
from .quadfield import QuadraticField

COND_LIMIT = 1e12


def _metric_matrix(metric) -> np.ndarray:
    S = np.asarray(getattr(metric, "S", metric), float)
    cond = np.linalg.cond(S)
    # checked before the signature, whose relative cutoff would report these as plain degenerate
    if np.isfinite(cond) and COND_LIMIT < cond < 1e16:
        raise IllConditionedMetric(f"metric condition number {cond:.3e} exceeds {COND_LIMIT:g}")
    return np.array(require_nondegenerate(S), float)


@dataclass(frozen=True, eq=False)
class LeviCivitaProduct:
    """``table[k, i, j]`` is the k-th component of e_i . e_j."""

    table: np.ndarray
    metric: np.ndarray

    def product(self, x, y) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.table, np.asarray(x, float), np.asarray(y, float))


def koszul_residual(lc: LeviCivitaProduct, alg: LieAlgebra3) -> float:
    S = lc.metric
    lhs = np.einsum("kij,kl->ijl", lc.table, S)  # <e_i . e_j, e_l>
    br = np.einsum("kij,kl->ijl", alg.c, S)  # <[e_i, e_j], e_l>
    rhs = 0.5 * (br - np.einsum("jki->ijk", br) + np.einsum("kij->ijk", br))
    return float(np.max(np.abs(lhs - rhs)))


def torsion_residual(lc: LeviCivitaProduct, alg: LieAlgebra3) -> float:
    return float(np.max(np.abs(lc.table - np.swapaxes(lc.table, 1, 2) - alg.c)))


def levi_civita(alg: LieAlgebra3, metric) -> LeviCivitaProduct:
    S = _metric_matrix(metric)
    # <[e_i,e_j], e_k>
    br = np.einsum("mij,mk->ijk", alg.c, S)
    # G[i,j,k] = <e_i . e_j, e_k> = 1/2 (<[ei,ej],ek> - <[ej,ek],ei> + <[ek,ei],ej>)
    G = 0.5 * (br - np.einsum("jki->ijk", br) + np.einsum("kij->ijk", br))
    table = np.einsum("lk,ijk->lij", np.linalg.inv(S), G)
    return LeviCivitaProduct(table=table, metric=S)


def euler_field_algebra(alg: LieAlgebra3, metric) -> QuadraticField:
    """x' = -x.x"""
    lc = levi_civita(alg, metric)
    return QuadraticField(-lc.table)


def euler_field_dual(alg: LieAlgebra3, metric) -> QuadraticField:
    """xi' = -ad*_x xi with x = S^{-1} xi and (ad*_x xi)(y) = -xi([x, y])."""
    S = _metric_matrix(metric)
    Sinv = np.linalg.inv(S)
    # xi'_j = sum_{k,i} xi_k c[k,i,j] x_i, x_i = Sinv[i,m] xi_m
    A = np.einsum("kij,im->jkm", alg.c, Sinv)
    return QuadraticField(A)


def lax_field(alg: LieAlgebra3, metric) -> QuadraticField:
    """x' = [x, u^{-1} x]"""
    u = u_from_metric(alg, metric)
    return QuadraticField(np.einsum("kij,jm->kim", alg.c, u.U_inv))


def pushforward(F: QuadraticField, M) -> QuadraticField:
    """The field G with G(M x) = M F(x)."""
    return F.transform(np.linalg.inv(np.asarray(M, float)))


def energy_form(metric, frame_tag: str = "algebra") -> QuadraticForm3:
    S = _metric_matrix(metric)
    if frame_tag == "algebra":
        return QuadraticForm3(S, "algebra")
    if frame_tag == "dual":
        return QuadraticForm3(np.linalg.inv(S), "dual")
    raise ValueError(f"frame_tag must be 'algebra' or 'dual', got {frame_tag!r}")


def lax_invariants(alg: LieAlgebra3, metric):
    """The two quadratic first integrals k(x, x) and k(x, u^{-1} x) of the Lax field."""
    u = u_from_metric(alg, metric)
    k = u.k_ref
    return [QuadraticForm3(k), QuadraticForm3(k @ u.U_inv)]
