"""Homogeneous quadratic vector fields in two or three variables.

A field is stored as a list of symmetric matrices ``A[i]`` with
``F_i(X) = X^T A[i] X``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize, minimize_scalar
from scipy.spatial import cKDTree

from .errors import DegenerateInput, ResidualTooHigh
from .forms import QuadraticForm3

DIRECTION_TOL = 1e-9
IDEMPOTENT_TOL = 1e-8
RHO_ZERO_CUT = 1e-7
DEDUP_ANGLE = 1e-6
FIRST_INTEGRAL_SVD_TOL = 1e-10
FIRST_INTEGRAL_RESIDUAL_TOL = 1e-10
DEFINITE_TOL = 1e-9
RESULTANT_TOL = 1e-10
CRIT_TOL = 1e-9
DEFAULT_GRID = 20_000


@dataclass(frozen=True, eq=False)
class QuadraticField:
    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 3 or A.shape[0] != A.shape[1] or A.shape[1] != A.shape[2] or A.shape[0] not in (2, 3):
            raise ValueError(f"coefficient array must have shape (n, n, n) with n in (2, 3), got {A.shape}")
        A = 0.5 * (A + np.swapaxes(A, 1, 2))
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @classmethod
    def zero(cls, dim=3) -> "QuadraticField":
        return cls(np.zeros((dim, dim, dim)))

    @classmethod
    def from_terms(cls, components: Sequence[dict], one_based=True) -> "QuadraticField":
        """``components[k]`` maps index pairs ``(i, j)`` to the coefficient of ``x_i x_j``."""
        n = len(components)
        off = 1 if one_based else 0
        A = np.zeros((n, n, n))
        for k, comp in enumerate(components):
            for (i, j), v in comp.items():
                i, j = i - off, j - off
                if i == j:
                    A[k, i, i] += v
                else:
                    A[k, i, j] += v / 2
                    A[k, j, i] += v / 2
        return cls(A)

    def __call__(self, x) -> np.ndarray:
        return evaluate(self, x)

    def jacobian(self, x) -> np.ndarray:
        return 2.0 * np.einsum("kij,j->ki", self.A, np.asarray(x, float))

    @property
    def coef_norm(self) -> float:
        return float(np.max(np.abs(self.monomial_coefficients()))) if self.A.size else 0.0

    def monomial_coefficients(self) -> np.ndarray:
        """Array (n, n_monomials) of coefficients of x_i x_j, i <= j."""
        n = self.dim
        out = []
        for k in range(n):
            row = []
            for i, j in _pairs(n):
                row.append(self.A[k, i, i] if i == j else 2 * self.A[k, i, j])
            out.append(row)
        return np.array(out)

    def transform(self, P) -> "QuadraticField":
        """The same flow in coordinates y with x = P y."""
        P = np.asarray(P, float)
        Pinv = np.linalg.inv(P)
        B = np.einsum("ia,mij,jb->mab", P, self.A, P)
        return QuadraticField(np.einsum("km,mab->kab", Pinv, B))

    def negate(self) -> "QuadraticField":
        return QuadraticField(-self.A)

    def scale(self, lam: float) -> "QuadraticField":
        return QuadraticField(lam * self.A)

    def terms(self, tol: float = 0.0) -> List[dict]:
        """Per-component ``{"x1*x2": coef}`` dictionaries (1-based names)."""
        out = []
        for row in self.monomial_coefficients():
            comp = {}
            for (i, j), v in zip(_pairs(self.dim), row):
                if abs(v) > tol:
                    comp[f"x{i + 1}^2" if i == j else f"x{i + 1}*x{j + 1}"] = float(v)
            out.append(comp)
        return out

    def pretty(self, var="x", digits=6) -> str:
        lines = []
        for k, comp in enumerate(self.terms(tol=1e-14)):
            body = " + ".join(f"{v:.{digits}g}*{m}" for m, v in comp.items()) or "0"
            lines.append(f"d{var}{k + 1}/dt = {body.replace('x', var)}")
        return "\n".join(lines)


def _pairs(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def evaluate(F: QuadraticField, x) -> np.ndarray:
    x = np.asarray(x, float)
    if x.ndim == 1:
        return np.einsum("kij,i,j->k", F.A, x, x)
    return np.einsum("kij,...i,...j->...k", F.A, x, x)


# ----------------------------------------------------------------------------
# invariant directions and idempotents


@dataclass(frozen=True, eq=False)
class InvariantDirection:
    d: np.ndarray
    rho: float
    kind: str  # "Zero" | "IdempotentRay"
    residual: float
    flagged: bool = False  # small nonzero rho reported as Zero

    @property
    def idempotent(self) -> Optional[np.ndarray]:
        return None if self.kind != "IdempotentRay" else self.d / self.rho


@functools.lru_cache(maxsize=4)
def _sphere_grid(n: int):
    """Fibonacci points on S^2 and their 10-nearest-neighbour graph."""
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = np.pi * (1 + 5**0.5) * i
    pts = np.column_stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])
    _, nbr = cKDTree(pts).query(pts, k=11)
    pts.setflags(write=False)
    nbr.setflags(write=False)
    return pts, nbr[:, 1:]


def _newton_directions(F: QuadraticField, seeds: np.ndarray, iters: int = 100):
    """Solve F(X) = rho X, |X| = 1 from each seed; returns X, rho, residual arrays."""
    n = F.dim
    X = seeds / np.linalg.norm(seeds, axis=1, keepdims=True)
    rho = np.einsum("mi,mi->m", X, evaluate(F, X))
    eye = np.eye(n)
    for _ in range(iters):
        FX = evaluate(F, X)
        G = np.concatenate([FX - rho[:, None] * X, 0.5 * (np.sum(X * X, axis=1) - 1)[:, None]], axis=1)
        J = np.zeros((len(X), n + 1, n + 1))
        J[:, :n, :n] = 2.0 * np.einsum("kij,mj->mki", F.A, X) - rho[:, None, None] * eye
        J[:, :n, n] = -X
        J[:, n, :n] = X
        step = np.einsum("mab,mb->ma", np.linalg.pinv(J), G)
        X = X - step[:, :n]
        rho = rho - step[:, n]
        if np.max(np.abs(step)) < 1e-15:
            break
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    rho = np.einsum("mi,mi->m", X, evaluate(F, X))
    res = np.linalg.norm(evaluate(F, X) - rho[:, None] * X, axis=1)
    return X, rho, res


def _damped_polish(F: QuadraticField, X: np.ndarray, rho: float):
    """Levenberg-Marquardt on the bordered system; recovers roots where the Jacobian is near singular."""

    def resid(z):
        return np.concatenate([evaluate(F, z[:-1]) - z[-1] * z[:-1], [0.5 * (z[:-1] @ z[:-1] - 1)]])

    sol = least_squares(resid, np.append(X, rho), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    Y = sol.x[:-1] / np.linalg.norm(sol.x[:-1])
    r = float(Y @ evaluate(F, Y))
    return Y, r, float(np.linalg.norm(evaluate(F, Y) - r * Y))


def _seeds_dim3(F: QuadraticField, n_grid: int) -> np.ndarray:
    pts, nbr = _sphere_grid(n_grid)
    FX = evaluate(F, pts)
    g = np.sum(np.cross(pts, FX) ** 2, axis=1)
    is_min = g <= np.min(g[nbr], axis=1)
    c = max(F.coef_norm, 1e-300)
    coarse = is_min & (g <= 0.05 * c**2)
    idx = np.flatnonzero(coarse)
    # keep the search finite on plateaus (continua of invariant directions)
    if len(idx) > 2000:
        idx = idx[np.argsort(g[idx], kind="stable")[:2000]]
    return pts[idx]


def _binary_roots(coeffs, tol=1e-12) -> List[np.ndarray]:
    """Real projective roots (x, y) of sum_k coeffs[k] x^(d-k) y^k."""
    coeffs = np.asarray(coeffs, float)
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return []
    c = coeffs / scale
    out = []
    if abs(c[0]) <= tol:
        out.append(np.array([1.0, 0.0]))
    for t in np.roots(c):  # numpy strips leading zeros
        if abs(t.imag) <= 1e-6 * (1 + abs(t)):
            out.append(np.array([t.real, 1.0]))
    return out


def _seeds_dim2(F: QuadraticField) -> Optional[np.ndarray]:
    A = F.A
    a1, b1, c1 = A[0, 0, 0], A[0, 0, 1], A[0, 1, 1]
    a2, b2, c2 = A[1, 0, 0], A[1, 0, 1], A[1, 1, 1]
    cubic = [a2, 2 * b2 - a1, c2 - 2 * b1, -c1]
    if np.max(np.abs(cubic)) <= 1e-14 * max(1.0, F.coef_norm):
        return None  # every direction is invariant
    roots = _binary_roots(cubic)
    return np.array(roots) if roots else np.zeros((0, 2))


def _canonical_sign(d: np.ndarray) -> np.ndarray:
    for v in d:
        if abs(v) > 1e-9:
            return d if v > 0 else -d
    return d


def invariant_directions(F: QuadraticField, n_grid: int = DEFAULT_GRID, strict: bool = True) -> List[InvariantDirection]:
    """Unit directions d (up to sign) with F(d) parallel to d."""
    n = F.dim
    c = F.coef_norm
    scale = max(1.0, c)
    if c == 0.0:
        return [InvariantDirection(e, 0.0, "Zero", 0.0) for e in np.eye(n)]
    continuum = False
    if n == 3:
        seeds = _seeds_dim3(F, n_grid)
    else:
        seeds = _seeds_dim2(F)
        if seeds is None:
            continuum = True
            ang = np.linspace(0, np.pi, 8, endpoint=False)
            seeds = np.column_stack([np.cos(ang), np.sin(ang)])
    if len(seeds) == 0:
        return []
    X, rho, res = _newton_directions(F, seeds)
    ok = res <= DIRECTION_TOL * scale
    for m in np.flatnonzero((~ok) & (res <= 1e-5 * scale)):
        X[m], rho[m], res[m] = _damped_polish(F, X[m], rho[m])
    ok = res <= DIRECTION_TOL * scale
    bad = (~ok) & (res <= 1e-5 * scale)
    if strict and np.any(bad):
        raise ResidualTooHigh(
            f"{int(np.sum(bad))} invariant-direction candidate(s) stalled with residual "
            f"{float(np.max(res[bad])):.3e} > {DIRECTION_TOL:g}"
        )
    X, rho, res = X[ok], rho[ok], res[ok]
    X[np.abs(X) < 1e-15] = 0.0
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    rho = rho + 0.0
    cand = []
    for d, r, e in zip(X, rho, res):
        d2 = _canonical_sign(d)
        cand.append((tuple(np.round(d2, 12)), d2, r if d2 is d else -r, e))
    cand.sort(key=lambda t: t[0])
    kept: List[InvariantDirection] = []
    for _, d, r, e in cand:
        if any(1.0 - abs(float(d @ k.d)) < 0.5 * DEDUP_ANGLE**2 for k in kept):
            continue
        if abs(r) < RHO_ZERO_CUT * scale:
            kept.append(InvariantDirection(d, float(r), "Zero", float(e), flagged=abs(r) > 1e-12 * scale))
        else:
            kept.append(InvariantDirection(d, float(r), "IdempotentRay", float(e)))
    if continuum:
        kept = [InvariantDirection(k.d, k.rho, k.kind, k.residual, flagged=True) for k in kept]
    return kept


def polish_idempotent(F: QuadraticField, X: np.ndarray, iters: int = 8) -> np.ndarray:
    X = np.array(X, float)
    eye = np.eye(F.dim)
    for _ in range(iters):
        r = evaluate(F, X) - X
        if np.linalg.norm(r) == 0.0:
            break
        step = np.linalg.lstsq(F.jacobian(X) - eye, r, rcond=None)[0]
        Xn = X - step
        if np.linalg.norm(evaluate(F, Xn) - Xn) >= np.linalg.norm(r):
            break
        X = Xn
    return X


def idempotent_residual(F: QuadraticField, X) -> float:
    X = np.asarray(X, float)
    return float(np.linalg.norm(evaluate(F, X) - X))


def idempotent_tolerance(X) -> float:
    return IDEMPOTENT_TOL * max(1.0, float(np.linalg.norm(X))) ** 2


def transverse_growth(F: QuadraticField, X) -> float:
    """Largest real part among the eigenvalues of DF(X) other than the radial one.

    Along x(t) = X/(1-t) a transverse perturbation grows like (1-t)^-mu while
    |x| grows like (1-t)^-1, so for mu > 1 rounding errors pull a numerical
    solution off the ray before it escapes.
    """
    ev = np.linalg.eigvals(F.jacobian(np.asarray(X, float)))
    rest = np.delete(ev, int(np.argmin(np.abs(ev - 2.0))))
    return float(np.max(rest.real))


def pick_witness(F: QuadraticField, idem: List[np.ndarray]) -> np.ndarray:
    """Deterministic choice: most transversally stable, then smallest norm, then lexicographic."""
    return min(
        idem,
        key=lambda X: (round(transverse_growth(F, X), 6), round(float(np.linalg.norm(X)), 9), tuple(np.round(X, 9))),
    )


def find_idempotents(F: QuadraticField, directions: Optional[List[InvariantDirection]] = None) -> List[np.ndarray]:
    """Strict idempotents X* = d / rho, one per idempotent ray."""
    if directions is None:
        directions = invariant_directions(F)
    out = []
    for d in directions:
        if d.kind != "IdempotentRay":
            continue
        X = polish_idempotent(F, d.d / d.rho)
        if idempotent_residual(F, X) <= idempotent_tolerance(X):
            out.append(X)
    return out


# ----------------------------------------------------------------------------
# first integrals


@dataclass(frozen=True, eq=False)
class FirstIntegralBasis:
    basis: List[np.ndarray]  # symmetric matrices
    residuals: List[float]
    dim: int

    def __len__(self):
        return len(self.basis)

    def forms(self, space_tag="algebra") -> List[QuadraticForm3]:
        return [QuadraticForm3(S, space_tag) for S in self.basis]

    def contains(self, S, tol: float = 1e-10) -> float:
        """Residual of the orthogonal projection of S onto the span (0 when a member)."""
        v = sym_to_vec(np.asarray(S, float))
        if not self.basis:
            return float(np.linalg.norm(v))
        B = np.column_stack([sym_to_vec(b) for b in self.basis])
        coef = np.linalg.lstsq(B, v, rcond=None)[0]
        return float(np.linalg.norm(B @ coef - v))


def sym_to_vec(S: np.ndarray) -> np.ndarray:
    """Monomial coefficients (x_i x_j, i <= j) of x^T S x."""
    n = S.shape[0]
    return np.array([S[i, i] if i == j else 2 * S[i, j] for i, j in _pairs(n)])


def vec_to_sym(v: np.ndarray, n: int) -> np.ndarray:
    S = np.zeros((n, n))
    for (i, j), q in zip(_pairs(n), v):
        if i == j:
            S[i, i] = q
        else:
            S[i, j] = S[j, i] = q / 2
    return S


def _cubic_monomials(n):
    return list(itertools.combinations_with_replacement(range(n), 3))


def derivative_cubic(F: QuadraticField, S: np.ndarray) -> np.ndarray:
    """Monomial coefficients of the cubic d/dt (X^T S X) = 2 X^T S F(X)."""
    n = F.dim
    mono = {m: k for k, m in enumerate(_cubic_monomials(n))}
    T = 2.0 * np.einsum("ab,bij->aij", S, F.A)
    out = np.zeros(len(mono))
    for a, i, j in itertools.product(range(n), repeat=3):
        out[mono[tuple(sorted((a, i, j)))]] += T[a, i, j]
    return out


def _rref(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    M = np.array(M, float)
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(M[r:, c])))
        if abs(M[p, c]) <= tol:
            M[r:, c] = 0.0
            continue
        M[[r, p]] = M[[p, r]]
        M[r] /= M[r, c]
        for q in range(rows):
            if q != r:
                M[q] -= M[q, c] * M[r]
        r += 1
    M[np.abs(M) < tol] = 0.0
    return M[:r]


def quadratic_first_integrals(F: QuadraticField, rel_tol: float = FIRST_INTEGRAL_SVD_TOL) -> FirstIntegralBasis:
    """Basis of quadratic forms Q with dQ/dt = 0 along F, in reduced row-echelon form."""
    n = F.dim
    pairs = _pairs(n)
    cols = []
    for k in range(len(pairs)):
        e = np.zeros(len(pairs))
        e[k] = 1.0
        cols.append(derivative_cubic(F, vec_to_sym(e, n)))
    M = np.column_stack(cols)
    _, s, Vt = np.linalg.svd(M)
    smax = s[0] if s.size and s[0] > 0 else 0.0
    rank = int(np.sum(s > rel_tol * smax)) if smax > 0 else 0
    null = Vt[rank:]
    basis_vecs = _rref(null) if len(null) else np.zeros((0, len(pairs)))
    basis = [vec_to_sym(v, n) for v in basis_vecs]
    residuals = [float(np.max(np.abs(derivative_cubic(F, S)))) if S.size else 0.0 for S in basis]
    return FirstIntegralBasis(basis=basis, residuals=residuals, dim=n)


# ----------------------------------------------------------------------------
# definite combinations


@dataclass(frozen=True, eq=False)
class DefiniteSearch:
    found: bool
    coefficients: Optional[np.ndarray]
    form: Optional[np.ndarray]
    min_eigenvalue: float
    exact: bool  # True for spans of dimension <= 2 (pencil analysis)
    grid: List[tuple]  # (parameter, min eigenvalue) samples inspected


def _lmin(S):
    return float(np.linalg.eigvalsh(S)[0])


def _normalized(basis):
    out = []
    for b in basis:
        S = np.asarray(b.S if isinstance(b, QuadraticForm3) else b, float)
        nrm = np.linalg.norm(S)
        out.append(S / nrm if nrm > 0 else S)
    return out


def definite_search(basis, seed: int = 0, tol: float = DEFINITE_TOL) -> DefiniteSearch:
    """Look for a positive-definite member of span(basis)."""
    if isinstance(basis, FirstIntegralBasis):
        basis = basis.basis
    B = _normalized(basis)
    m = len(B)
    if m == 0:
        return DefiniteSearch(False, None, None, -np.inf, True, [])
    if m == 1:
        S = B[0]
        grid = [(1.0, _lmin(S)), (-1.0, _lmin(-S))]
        best = max(grid, key=lambda g: g[1])
        coef = np.array([best[0]])
        return DefiniteSearch(best[1] > tol, coef, coef[0] * S, best[1], True, grid)
    if m == 2:
        return _pencil_search(B[0], B[1], tol)
    return _sampled_search(B, seed, tol)


def _pencil_search(Q1, Q2, tol):
    n = Q1.shape[0]

    def Q(th):
        return np.cos(th) * Q1 + np.sin(th) * Q2

    # det(Q1 + t Q2) is a polynomial of degree <= n in t
    ts = np.arange(n + 1, dtype=float) - n / 2
    dets = [np.linalg.det(Q1 + t * Q2) for t in ts]
    poly = np.polyfit(ts, dets, n)
    crit = []
    if np.max(np.abs(poly)) > 1e-14:
        for r in np.roots(poly):
            if abs(r.imag) <= 1e-9 * (1 + abs(r)):
                th = float(np.arctan(r.real))
                crit += [th % (2 * np.pi), (th + np.pi) % (2 * np.pi)]
    crit += [np.pi / 2, 3 * np.pi / 2]  # the direction t = infinity
    crit = sorted(set(np.round(crit, 15)))
    grid = []
    best = (-np.inf, None, None)
    for a, b in zip(crit, crit[1:] + [crit[0] + 2 * np.pi]):
        if b - a < 1e-12:
            continue
        mid = 0.5 * (a + b)
        lm = _lmin(Q(mid))
        grid.append((float(mid % (2 * np.pi)), lm))
        if lm > best[0]:
            best = (lm, a, b)
    lm, a, b = best
    th = 0.5 * (a + b)
    if lm > tol:
        res = minimize_scalar(lambda t: -_lmin(Q(t)), bounds=(a, b), method="bounded", options={"xatol": 1e-12})
        if -res.fun > lm:
            th, lm = float(res.x), float(-res.fun)
    coef = np.array([np.cos(th), np.sin(th)])
    return DefiniteSearch(lm > tol, coef, Q(th), lm, True, grid)


def _sampled_search(B, seed, tol, n_samples=4000):
    m = len(B)
    rng = np.random.default_rng(seed)
    stack = np.array(B)
    C = rng.normal(size=(n_samples, m))
    C /= np.linalg.norm(C, axis=1, keepdims=True)
    mats = np.einsum("sm,mij->sij", C, stack)
    lms = np.linalg.eigvalsh(mats)[:, 0]
    order = np.argsort(-lms)[:8]
    grid = [(tuple(C[i]), float(lms[i])) for i in order]

    def obj(c):
        c = c / max(np.linalg.norm(c), 1e-300)
        return -_lmin(np.einsum("m,mij->ij", c, stack))

    best_c, best_l = C[order[0]], float(lms[order[0]])
    for i in order:
        res = minimize(obj, C[i], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
        if -res.fun > best_l:
            best_c, best_l = res.x / np.linalg.norm(res.x), float(-res.fun)
    return DefiniteSearch(best_l > tol, best_c, np.einsum("m,mij->ij", best_c, stack), best_l, False, grid)


@dataclass(frozen=True, eq=False)
class DefiniteCombination:
    coefficients: np.ndarray
    form: QuadraticForm3
    min_eigenvalue: float
    exact: bool


def definite_combination(basis, seed: int = 0, space_tag: str = "algebra") -> Optional[DefiniteCombination]:
    """A positive-definite element of the span, or None.

    For spans of dimension >= 3 a None answer only means that the sampled
    search found nothing.
    """
    res = definite_search(basis, seed=seed)
    if not res.found:
        return None
    return DefiniteCombination(res.coefficients, QuadraticForm3(res.form, space_tag), res.min_eigenvalue, res.exact)


# ----------------------------------------------------------------------------
# affine-quadratic (linearizable) fields


@dataclass(frozen=True, eq=False)
class AffineCertificate:
    """Coordinates (u, v) with v' = 0 and u' = A(v) u + B(v).

    ``constant_forms`` rows are linear forms l with l(F(X)) = 0; ``u_basis``
    columns span their common kernel, on which F vanishes identically.
    ``change_of_basis`` has columns ``[u_basis | complement]``.
    """

    constant_forms: np.ndarray
    u_basis: np.ndarray
    change_of_basis: np.ndarray
    residual: float


def is_affine_quadratic(F: QuadraticField, tol: float = 1e-10) -> Optional[AffineCertificate]:
    n = F.dim
    scale = max(1.0, F.coef_norm)
    M = np.column_stack([sym_to_vec(F.A[i]) for i in range(n)])
    _, s, Vt = np.linalg.svd(M)
    rank = int(np.sum(s > tol * scale))
    L = Vt[rank:]  # linear forms with l o F == 0
    if len(L):
        _, sl, Wt = np.linalg.svd(L)
        W = Wt[len(L):].T
    else:
        W = np.eye(n)
    if W.shape[1]:
        block = np.einsum("ia,kij,jb->kab", W, F.A, W)
        residual = float(np.max(np.abs(block)))
    else:
        residual = 0.0
    if residual > tol * scale:
        return None
    comp = L.T @ np.linalg.inv(L @ L.T) if len(L) else np.zeros((n, 0))
    return AffineCertificate(L, W, np.column_stack([W, comp]), residual)


# ----------------------------------------------------------------------------
# planar classifier


@dataclass(frozen=True, eq=False)
class PlanarVerdict:
    complete: bool
    case: Optional[str]  # "i" (affine-quadratic) | "ii" (common factor) | None
    coefficients: Optional[tuple] = None  # (a, b, c, d)
    discriminant: Optional[float] = None
    change_of_basis: Optional[np.ndarray] = None
    affine: Optional[AffineCertificate] = None
    witness: Optional[np.ndarray] = None


def _binary_quadratic(A2):
    """(p0, p1, p2) for p0 x^2 + p1 x y + p2 y^2."""
    return np.array([A2[0, 0], 2 * A2[0, 1], A2[1, 1]])


def resultant_binary_quadratics(p, q) -> float:
    p0, p1, p2 = p
    q0, q1, q2 = q
    syl = np.array([[p0, p1, p2, 0], [0, p0, p1, p2], [q0, q1, q2, 0], [0, q0, q1, q2]], float)
    return float(np.linalg.det(syl))


def planar_completeness(F: QuadraticField, crit_tol: float = CRIT_TOL) -> PlanarVerdict:
    """Completeness of a planar homogeneous quadratic field (affine-quadratic or common-factor normal form)."""
    if F.dim != 2:
        raise ValueError("planar_completeness needs a 2-dimensional field")
    cert = is_affine_quadratic(F)
    if cert is not None:
        return PlanarVerdict(True, "i", affine=cert)
    p, q = _binary_quadratic(F.A[0]), _binary_quadratic(F.A[1])
    pn, qn = np.linalg.norm(p), np.linalg.norm(q)
    if pn == 0 and qn == 0:
        raise DegenerateInput("zero field should have been affine-quadratic")
    candidates = []
    if pn == 0 or qn == 0:
        candidates = _binary_roots(q if pn == 0 else p, tol=1e-12)
    elif abs(resultant_binary_quadratics(p / pn, q / qn)) < RESULTANT_TOL:
        rp, rq = _binary_roots(p / pn), _binary_roots(q / qn)
        for a in rp:
            a = a / np.linalg.norm(a)
            for b in rq:
                b = b / np.linalg.norm(b)
                if 1 - abs(a @ b) < 1e-8:
                    candidates.append(a + np.sign(a @ b) * b)
    best = None
    for r in candidates:
        r = r / np.linalg.norm(r)
        T = np.array([[r[0], r[1]], [-r[1], r[0]]])  # x' = r.X, y' = l.X with l(r) = 0
        G = F.transform(T.T)
        c1, c2 = _binary_quadratic(G.A[0]), _binary_quadratic(G.A[1])
        scale = max(np.max(np.abs(c1)), np.max(np.abs(c2)))
        if max(abs(c1[0]), abs(c2[0])) > 1e-8 * scale:
            continue
        a, b, c, d = c1[1], c1[2], c2[1], c2[2]
        disc = (a + d) ** 2 - 4 * (a * d - b * c)
        if best is None or disc < best[0]:
            best = (disc, (a, b, c, d), T, scale)
    if best is not None and best[0] < -crit_tol * best[3] ** 2:
        disc, coeffs, T, _ = best
        return PlanarVerdict(True, "ii", tuple(float(v) for v in coeffs), float(disc), T)
    idem = find_idempotents(F)
    witness = pick_witness(F, idem) if idem else None
    disc = None if best is None else float(best[0])
    coeffs = None if best is None else tuple(float(v) for v in best[1])
    return PlanarVerdict(False, None, coeffs, disc, None if best is None else best[2], witness=witness)


def planar_subsystem(F: QuadraticField, indices: Sequence[int], one_based: bool = True) -> Optional[QuadraticField]:
    """The closed planar system for the given coordinates, if they decouple."""
    idx = [i - 1 if one_based else i for i in indices]
    others = [i for i in range(F.dim) if i not in idx]
    for k in idx:
        for o in others:
            if np.any(np.abs(F.A[k, o, :]) > 0) or np.any(np.abs(F.A[k, :, o]) > 0):
                return None
    return QuadraticField(F.A[np.ix_(idx, idx, idx)])
