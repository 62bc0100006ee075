"""Quadratic forms on the algebra and its dual, the Killing form and the operator u."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AmbiguousSpectrum, DegenerateKilling, DegenerateMetric, DependentSpan
from .lie3 import LieAlgebra3

SIG_TOL = 1e-9
EIG_TOL = 1e-8
KILLING_SCALE = 2.0


@dataclass(frozen=True, eq=False)
class QuadraticForm3:
    """Symmetric form x -> x^T S x on the algebra (``space_tag="algebra"``) or its dual."""

    S: np.ndarray
    space_tag: str = "algebra"

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError(f"form matrix must be square, got shape {S.shape}")
        S = 0.5 * (S + S.T)
        S.setflags(write=False)
        object.__setattr__(self, "S", S)

    def __call__(self, x) -> float:
        x = np.asarray(x, float)
        return float(x @ self.S @ x)

    def polar(self, x, y) -> float:
        return float(np.asarray(x, float) @ self.S @ np.asarray(y, float))

    def signature(self, tol: float = SIG_TOL):
        return signature(self, tol)

    @property
    def nondegenerate(self) -> bool:
        return signature(self)[2] == 0


def _as_matrix(q) -> np.ndarray:
    return q.S if isinstance(q, QuadraticForm3) else np.asarray(q, float)


def signature(q, tol: float = SIG_TOL):
    """(p, n, z): counts of positive, negative and (relatively) zero eigenvalues."""
    S = _as_matrix(q)
    ev = np.linalg.eigvalsh(0.5 * (S + S.T))
    cut = tol * max(1.0, float(np.max(np.abs(ev))) if ev.size else 1.0)
    p = int(np.sum(ev > cut))
    n = int(np.sum(ev < -cut))
    return p, n, len(ev) - p - n


def require_nondegenerate(q, what="metric") -> np.ndarray:
    S = _as_matrix(q)
    if signature(S)[2] > 0:
        raise DegenerateMetric(f"{what} is degenerate (signature {signature(S)})")
    return S


def musical_iso(q, x) -> np.ndarray:
    """x -> S x, the covector <x, .>."""
    S = require_nondegenerate(q)
    return S @ np.asarray(x, float)


def musical_iso_inv(q, xi) -> np.ndarray:
    S = require_nondegenerate(q)
    return np.linalg.solve(S, np.asarray(xi, float))


def killing_form(alg: LieAlgebra3) -> QuadraticForm3:
    """K(x, y) = tr(ad_x ad_y)."""
    ads = [alg.ad(e) for e in np.eye(3)]
    K = np.array([[np.trace(a @ b) for b in ads] for a in ads])
    return QuadraticForm3(K, "algebra")


def normalized_killing(alg: LieAlgebra3) -> np.ndarray:
    """Killing form divided by 2, the bi-invariant form k with k(E1,E1)=1 in the standard sl(2) frames."""
    return killing_form(alg).S / KILLING_SCALE


def restrict_form(q, span, tol: float = SIG_TOL):
    """Gram matrix of q on span{v1, v2} and whether it is degenerate there."""
    V = np.column_stack([np.asarray(v, float) for v in span])
    if V.shape[1] != 2 or np.linalg.matrix_rank(V, tol=1e-12 * max(1.0, np.abs(V).max())) < 2:
        raise DependentSpan("span vectors must be two linearly independent vectors")
    G = V.T @ _as_matrix(q) @ V
    G = 0.5 * (G + G.T)
    degenerate = abs(np.linalg.det(G)) < tol * max(1.0, float(np.max(np.abs(G))) ** 2)
    return G, bool(degenerate)


class SpectrumShape(enum.Enum):
    DEGREE_LE2 = "DegreeLE2"
    THREE_DISTINCT = "ThreeDistinct"
    DOUBLE_SIMPLE_DIAGONALIZABLE = "OneDoubleOneSimple_Diagonalizable"
    DOUBLE_SIMPLE_CYCLIC = "OneDoubleOneSimple_Cyclic"
    SINGLE_EIGENDIRECTION = "SingleEigendirection"
    TRIPLE_DEGENERATE = "TripleDegenerate"

    @property
    def minimal_degree_le2(self) -> bool:
        return self in (
            SpectrumShape.DEGREE_LE2,
            SpectrumShape.DOUBLE_SIMPLE_DIAGONALIZABLE,
            SpectrumShape.TRIPLE_DEGENERATE,
        )


@dataclass(frozen=True, eq=False)
class EigenData:
    eigenvalues: np.ndarray  # complex in general, sorted
    clusters: list  # list of (value, multiplicity)
    eigenvectors: Optional[np.ndarray] = None  # columns, ThreeDistinct only
    k_norms: Optional[np.ndarray] = None  # k(E, E) for those eigenvectors
    timelike_index: Optional[int] = None
    double_value: Optional[float] = None
    simple_value: Optional[float] = None
    eigenvector: Optional[np.ndarray] = None  # isotropic eigenvector E2 (cyclic case)
    cyclic_vector: Optional[np.ndarray] = None  # E3 with k(E2,E3)=1, k(E3,E3)=0
    gamma: Optional[float] = None  # <E3, E3>


@dataclass(frozen=True, eq=False)
class MetricOperatorU:
    """u with <x, y> = k(u x, y) for the normalized bi-invariant form k."""

    U: np.ndarray
    k_ref: np.ndarray
    metric: np.ndarray
    eigen_data: EigenData
    shape: SpectrumShape
    killing_scale: float = KILLING_SCALE

    @property
    def U_inv(self) -> np.ndarray:
        return np.linalg.inv(self.U)


def _rank_from_singular(M: np.ndarray, scale: float, lo=1e-7, hi=1e-4) -> int:
    """Numerical rank with an explicit ambiguity band between lo and hi (relative)."""
    s = np.linalg.svd(M, compute_uv=False)
    rank = 0
    for v in s:
        r = v / scale
        if r > hi:
            rank += 1
        elif r > lo:
            raise AmbiguousSpectrum(f"singular value {v:.3e} inside ambiguity band (scale {scale:.3e})")
    return rank


def _cluster(ev: np.ndarray, scale: float, eig_tol: float):
    """Group eigenvalues whose squared gap is below eig_tol * scale^2."""
    order = np.lexsort((ev.imag, ev.real))
    ev = ev[order]
    groups = []
    for v in ev:
        for g in groups:
            if abs(v - np.mean(g)) ** 2 <= eig_tol * scale**2:
                g.append(v)
                break
        else:
            groups.append([v])
    # a squared gap just above the cut is not trustworthy either
    means = [np.mean(g) for g in groups]
    for a in range(len(means)):
        for b in range(a + 1, len(means)):
            gap2 = abs(means[a] - means[b]) ** 2 / scale**2
            if eig_tol < gap2 <= 100 * eig_tol:
                raise AmbiguousSpectrum(f"eigenvalue gap^2 {gap2:.3e} too close to eig_tol {eig_tol:g}")
    return ev, [(complex(np.mean(g)), len(g)) for g in groups]


def analyze_operator(U: np.ndarray, k: np.ndarray, S: np.ndarray, eig_tol: float = EIG_TOL):
    """Spectral shape of a k-symmetric operator U plus the data the sl(2) criterion needs."""
    scale = max(1e-300, float(np.max(np.abs(np.linalg.eigvals(U)))), float(np.linalg.norm(U, 2)))
    ev, clusters = _cluster(np.linalg.eigvals(U), scale, eig_tol)
    imag_cut = np.sqrt(eig_tol) * scale
    real_clusters = [(v, m) for v, m in clusters if abs(v.imag) <= imag_cut]
    I = np.eye(3)

    if len(real_clusters) < len(clusters):
        return SpectrumShape.SINGLE_EIGENDIRECTION, EigenData(ev, clusters)

    vals = [v.real for v, _ in clusters]
    mults = [m for _, m in clusters]
    if len(clusters) == 3:
        w, V = np.linalg.eig(U)
        w, V = w.real, V.real
        order = np.argsort(w)
        w, V = w[order], V[:, order]
        V = V / np.linalg.norm(V, axis=0)
        kn = np.einsum("ia,ij,ja->a", V, k, V)
        neg = [a for a in range(3) if kn[a] < 0]
        timelike = neg[0] if len(neg) == 1 else None
        return SpectrumShape.THREE_DISTINCT, EigenData(
            ev, clusters, eigenvectors=V, k_norms=kn, timelike_index=timelike
        )
    if len(clusters) == 1:
        alpha = vals[0]
        rank = _rank_from_singular(U - alpha * I, scale)
        if rank == 0:
            return SpectrumShape.DEGREE_LE2, EigenData(ev, clusters)
        if rank == 1:
            return SpectrumShape.TRIPLE_DEGENERATE, EigenData(ev, clusters)
        return SpectrumShape.SINGLE_EIGENDIRECTION, EigenData(ev, clusters)

    # one double, one simple
    d_idx = 0 if mults[0] == 2 else 1
    alpha, beta = vals[d_idx], vals[1 - d_idx]
    N = U - alpha * I
    rank = _rank_from_singular(N, scale)
    if rank == 1:
        return SpectrumShape.DOUBLE_SIMPLE_DIAGONALIZABLE, EigenData(
            ev, clusters, double_value=alpha, simple_value=beta
        )
    # Jordan block: eigenvector spans ker N, cyclic vector solves N w = E2
    _, _, Vt = np.linalg.svd(N)
    E2 = Vt[-1]
    # restrict to the generalized eigenspace ker N^2 (k-orthogonal to the simple eigenvector)
    _, _, Vt2 = np.linalg.svd(N @ N)
    B = Vt2[-2:].T
    w = np.linalg.lstsq(N @ B, E2, rcond=None)[0]
    E3 = B @ w
    kk = E2 @ k @ E3
    if abs(kk) < 1e-12 * max(1.0, np.abs(k).max()) * np.linalg.norm(E2) * np.linalg.norm(E3):
        raise AmbiguousSpectrum("generalized eigenspace is not a hyperbolic plane")
    E3 = E3 / kk
    E3 = E3 - 0.5 * (E3 @ k @ E3) * E2
    gamma = float(E3 @ S @ E3)
    return SpectrumShape.DOUBLE_SIMPLE_CYCLIC, EigenData(
        ev, clusters, double_value=alpha, simple_value=beta, eigenvector=E2, cyclic_vector=E3, gamma=gamma
    )


def u_from_metric(alg: LieAlgebra3, metric, eig_tol: float = EIG_TOL) -> MetricOperatorU:
    """U = k^{-1} S for the normalized Killing form k."""
    k = normalized_killing(alg)
    if signature(k)[2] > 0:
        raise DegenerateKilling("Killing form is degenerate; u is only defined for semisimple algebras")
    S = require_nondegenerate(metric)
    U = np.linalg.solve(k, S)
    shape, data = analyze_operator(U, k, S, eig_tol)
    return MetricOperatorU(U=U, k_ref=k, metric=np.array(S), eigen_data=data, shape=shape)


def k_symmetry_residual(U: np.ndarray, k: np.ndarray) -> float:
    kU = k @ U
    return float(np.max(np.abs(kU - kU.T)))
