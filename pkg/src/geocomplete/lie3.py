"""Three-dimensional real Lie algebras given by structure constants.

Convention: ``c[k, i, j]`` is the k-th component of ``[e_i, e_j]`` (0-based
indices internally, 1-based in user-facing bracket lists).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import BadParams, InconsistentBrackets, JacobiViolation, NotUnimodular

JACOBI_TOL = 1e-10
UNIMODULAR_TOL = 1e-10
ANTISYM_TOL = 1e-12
MILNOR_RESIDUAL_TOL = 1e-9


class AlgebraType(enum.Enum):
    ABELIAN = "Abelian"
    HEISENBERG = "Heisenberg"
    SU2 = "SU2"
    E2 = "E2"
    E11 = "E11"
    SL2R = "SL2R"
    NON_UNIMODULAR = "NonUnimodular"


# canonical sign signature -> algebra (Milnor's table, rows a-f)
_SIGNATURE_TABLE = {
    (0, 0, 0): AlgebraType.ABELIAN,
    (1, 0, 0): AlgebraType.HEISENBERG,
    (1, 1, 1): AlgebraType.SU2,
    (1, 1, 0): AlgebraType.E2,
    (1, 0, -1): AlgebraType.E11,
    (1, 1, -1): AlgebraType.SL2R,
}


@dataclass(frozen=True, eq=False)
class LieAlgebra3:
    """Structure constants of a 3-dimensional real Lie algebra.

    Construction enforces exact antisymmetry in (i, j) and rejects tensors whose
    Jacobi residual exceeds ``jacobi_tol``.
    """

    c: np.ndarray
    basis_labels: tuple = ("E1", "E2", "E3")
    jacobi_tol: float = JACOBI_TOL

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.shape != (3, 3, 3):
            raise InvalidShape(c.shape)
        skew = c + np.swapaxes(c, 1, 2)
        scale = max(1.0, float(np.max(np.abs(c))))
        if np.max(np.abs(skew)) > ANTISYM_TOL * scale:
            raise InconsistentBrackets(
                f"structure constants not antisymmetric (residual {np.max(np.abs(skew)):.3e})"
            )
        c = 0.5 * (c - np.swapaxes(c, 1, 2))
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "basis_labels", tuple(self.basis_labels))
        res = jacobi_residual(c)
        if res > self.jacobi_tol * scale**2:
            raise JacobiViolation(f"Jacobi residual {res:.3e} exceeds {self.jacobi_tol:g}")

    @classmethod
    def from_brackets(cls, brackets: Iterable, basis_labels=("E1", "E2", "E3"), one_based=True):
        """Build from a sparse list of ``(i, j, result)`` or ``{"i", "j", "result"}`` entries.

        Unlisted pairs are zero; a pair listed in both orders must agree up to sign.
        """
        c = np.zeros((3, 3, 3))
        seen = np.zeros((3, 3), dtype=bool)
        off = 1 if one_based else 0
        for entry in brackets:
            if isinstance(entry, Mapping):
                i, j, r = entry["i"], entry["j"], entry["result"]
            else:
                i, j, r = entry
            i, j = int(i) - off, int(j) - off
            r = np.asarray(r, dtype=float)
            if not (0 <= i < 3 and 0 <= j < 3) or r.shape != (3,):
                raise InconsistentBrackets(f"bad bracket entry {entry!r}")
            if i == j:
                if np.max(np.abs(r)) > ANTISYM_TOL:
                    raise InconsistentBrackets(f"[e{i + off}, e{i + off}] must vanish")
                continue
            if seen[i, j]:
                if np.max(np.abs(c[:, i, j] - r)) > ANTISYM_TOL:
                    raise InconsistentBrackets(f"conflicting entries for [e{i + off}, e{j + off}]")
                continue
            c[:, i, j] = r
            c[:, j, i] = -r
            seen[i, j] = seen[j, i] = True
        return cls(c, basis_labels=basis_labels)

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.c, np.asarray(x, float), np.asarray(y, float))

    def ad(self, x) -> np.ndarray:
        """Matrix of ad_x, so that ``ad(x) @ y == bracket(x, y)``."""
        return np.einsum("kij,i->kj", self.c, np.asarray(x, float))

    def trace_vector(self) -> np.ndarray:
        """(tr ad_{e_1}, tr ad_{e_2}, tr ad_{e_3})."""
        return np.einsum("kik->i", self.c)

    def change_basis(self, P) -> "LieAlgebra3":
        """Structure constants in the basis given by the columns of ``P``."""
        P = np.asarray(P, float)
        Pinv = np.linalg.inv(P)
        c = np.einsum("mk,kij,ia,jb->mab", Pinv, self.c, P, P)
        return LieAlgebra3(c, basis_labels=self.basis_labels, jacobi_tol=self.jacobi_tol)

    def bracket_list(self, tol=0.0):
        """Sparse 1-based bracket list (i < j) suitable for JSON specs."""
        out = []
        for i in range(3):
            for j in range(i + 1, 3):
                r = self.c[:, i, j]
                if np.max(np.abs(r)) > tol:
                    out.append({"i": i + 1, "j": j + 1, "result": [float(v) for v in r]})
        return out

    def milnor_operator(self) -> np.ndarray:
        """The operator L with [X, Y] = L(X x Y) for the Euclidean product of this basis."""
        L = np.empty((3, 3))
        for m in range(3):
            L[:, m] = self.c[:, (m + 1) % 3, (m + 2) % 3]
        return L


class InvalidShape(InconsistentBrackets):
    def __init__(self, shape):
        super().__init__(f"structure-constant tensor must have shape (3, 3, 3), got {shape}")


def jacobi_residual(c: np.ndarray) -> float:
    c = np.asarray(c, float)
    # [[e_i, e_j], e_k]_m = sum_l c[l,i,j] c[m,l,k]
    t = np.einsum("lij,mlk->mijk", c, c)
    cyc = t + np.transpose(t, (0, 2, 3, 1)) + np.transpose(t, (0, 3, 1, 2))
    return float(np.max(np.abs(cyc)))


def bracket(alg: LieAlgebra3, x, y) -> np.ndarray:
    return alg.bracket(x, y)


def is_unimodular(alg: LieAlgebra3, tol: float = UNIMODULAR_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(alg.c))))
    return bool(np.all(np.abs(alg.trace_vector()) <= tol * scale))


def _sign(v: float, tol: float) -> int:
    if abs(v) <= tol:
        return 0
    return 1 if v > 0 else -1


def canonical_signature(alphas: Sequence[float], tol: Optional[float] = None) -> tuple:
    """Sign triple, globally flipped so #(+) >= #(-), sorted descending."""
    a = np.asarray(alphas, float)
    if tol is None:
        tol = 1e-9 * max(1.0, float(np.max(np.abs(a))))
    s = [_sign(v, tol) for v in a]
    if s.count(-1) > s.count(1):
        s = [-v for v in s]
    return tuple(sorted(s, reverse=True))


def signature_str(sig: Sequence[int]) -> str:
    return "(" + ",".join({1: "+", 0: "0", -1: "-"}[v] for v in sig) + ")"


@dataclass(frozen=True, eq=False)
class MilnorData:
    alphas: np.ndarray
    frame: np.ndarray
    sign_signature: tuple
    residual: float


def milnor_normal_form(alg: LieAlgebra3) -> MilnorData:
    """Eigenvalues and positively oriented orthonormal eigenframe of Milnor's L."""
    if not is_unimodular(alg):
        raise NotUnimodular(f"trace vector {alg.trace_vector()} is nonzero; L is not symmetric")
    L = alg.milnor_operator()
    L = 0.5 * (L + L.T)
    alphas, Q = np.linalg.eigh(L)
    if np.linalg.det(Q) < 0:
        Q[:, 2] = -Q[:, 2]
    # structure constants in the eigenframe must be diagonal: [E2,E3]=a1 E1, ...
    cf = alg.change_basis(Q).c
    target = np.zeros((3, 3, 3))
    for m in range(3):
        i, j = (m + 1) % 3, (m + 2) % 3
        target[m, i, j] = alphas[m]
        target[m, j, i] = -alphas[m]
    residual = float(np.max(np.abs(cf - target)))
    scale = max(1.0, float(np.max(np.abs(alphas))))
    if residual > MILNOR_RESIDUAL_TOL * scale:
        raise NotUnimodular(f"Milnor frame residual {residual:.3e} too large")
    return MilnorData(alphas=alphas, frame=Q, sign_signature=canonical_signature(alphas), residual=residual)


@dataclass(frozen=True, eq=False)
class Classification:
    kind: AlgebraType
    trace_vector: np.ndarray
    milnor: Optional[MilnorData] = None

    def describe(self) -> str:
        if self.kind is AlgebraType.NON_UNIMODULAR:
            tv = ",".join(f"{v:.12g}" for v in self.trace_vector)
            return f"NonUnimodular, trace vector ({tv})"
        return f"{self.kind.value}, signature {signature_str(self.milnor.sign_signature)}"


def classify(alg: LieAlgebra3) -> Classification:
    tv = alg.trace_vector()
    if not is_unimodular(alg):
        return Classification(AlgebraType.NON_UNIMODULAR, tv)
    md = milnor_normal_form(alg)
    return Classification(_SIGNATURE_TABLE[md.sign_signature], tv, md)


def standard_algebra(t: AlgebraType, params: Optional[Mapping] = None) -> LieAlgebra3:
    """The standard bracket tables.

    ``params`` is only used for ``SL2R`` (``{"frame": "orthonormal" | "hyperbolic"}``)
    and ``NON_UNIMODULAR`` (``alpha, beta, gamma, delta`` with ``alpha + delta = 2``).
    """
    params = dict(params or {})
    if t is AlgebraType.ABELIAN:
        return LieAlgebra3(np.zeros((3, 3, 3)))
    if t is AlgebraType.HEISENBERG:
        return LieAlgebra3.from_brackets([(1, 2, (0, 0, 1))])
    if t is AlgebraType.SU2:
        return LieAlgebra3.from_brackets([(2, 3, (1, 0, 0)), (3, 1, (0, 1, 0)), (1, 2, (0, 0, 1))])
    if t is AlgebraType.E2:
        return LieAlgebra3.from_brackets([(2, 3, (0, 0, 0)), (3, 1, (0, 1, 0)), (1, 2, (0, 0, 1))])
    if t is AlgebraType.E11:
        return LieAlgebra3.from_brackets([(1, 2, (0, 1, 0)), (1, 3, (0, 0, -1)), (2, 3, (0, 0, 0))])
    if t is AlgebraType.SL2R:
        frame = params.get("frame", "orthonormal")
        if frame == "orthonormal":
            return LieAlgebra3.from_brackets([(1, 2, (0, 0, -1)), (1, 3, (0, -1, 0)), (2, 3, (1, 0, 0))])
        if frame == "hyperbolic":
            return LieAlgebra3.from_brackets([(1, 2, (0, 1, 0)), (1, 3, (0, 0, -1)), (2, 3, (1, 0, 0))])
        raise BadParams(f"unknown sl(2,R) frame {frame!r}")
    if t is AlgebraType.NON_UNIMODULAR:
        try:
            a, b, g, d = (float(params[k]) for k in ("alpha", "beta", "gamma", "delta"))
        except KeyError as exc:
            raise BadParams(f"missing parameter {exc}") from None
        if abs(a + d - 2.0) > 1e-10:
            raise BadParams(f"alpha + delta must equal 2, got {a + d}")
        return LieAlgebra3.from_brackets([(1, 2, (0, a, b)), (1, 3, (0, g, d))])
    raise BadParams(f"unsupported algebra type {t}")


def algebra_from_milnor(alphas: Sequence[float]) -> LieAlgebra3:
    """Unimodular algebra with [E2,E3]=a1 E1, [E3,E1]=a2 E2, [E1,E2]=a3 E3."""
    a1, a2, a3 = (float(v) for v in alphas)
    return LieAlgebra3.from_brackets([(2, 3, (a1, 0, 0)), (3, 1, (0, a2, 0)), (1, 2, (0, 0, a3))])
