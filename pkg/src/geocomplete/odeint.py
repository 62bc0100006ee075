"""Adaptive Dormand-Prince 5(4) integration of quadratic fields with blow-up detection."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numba
import numpy as np

from .errors import BadOptions, InsufficientTail
from .quadfield import QuadraticField

# Dormand-Prince coefficients
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
# continuous extension
D1, D3, D4, D5 = -12715105075 / 11282082432, 87487479700 / 32700410799, -10690763975 / 1880347072, 701980252875 / 199316789632
D6, D7 = -1453857185 / 822651844, 69997945 / 29380423

STOP_HORIZON = 0
STOP_NORM = 1
STOP_UNDERFLOW = 2
STOP_MAXSTEPS = 3


@numba.njit(cache=True)
def _rhs(A, x, out):
    n = x.shape[0]
    for k in range(n):
        s = 0.0
        for i in range(n):
            xi = x[i]
            for j in range(n):
                s += A[k, i, j] * xi * x[j]
        out[k] = s


@numba.njit(cache=True)
def _err_norm(e, y0, y1, rtol, atol):
    s = 0.0
    n = e.shape[0]
    for i in range(n):
        sc = atol + rtol * max(abs(y0[i]), abs(y1[i]))
        s += (e[i] / sc) ** 2
    return math.sqrt(s / n)


@numba.njit(cache=True)
def _norm(x):
    s = 0.0
    for v in x:
        s += v * v
    return math.sqrt(s)


@numba.njit(cache=True)
def _dopri(A, x0, t0, T, rtol, atol, stop_norm, h_min, max_steps, h_init):
    n = x0.shape[0]
    cap = 1024
    ts = np.empty(cap)
    xs = np.empty((cap, n))
    dense = np.empty((cap, 5, n))
    ts[0] = t0
    xs[0] = x0
    count = 1
    k1 = np.empty(n); k2 = np.empty(n); k3 = np.empty(n); k4 = np.empty(n)
    k5 = np.empty(n); k6 = np.empty(n); k7 = np.empty(n)
    y = x0.copy()
    yt = np.empty(n)
    ynew = np.empty(n)
    err = np.empty(n)
    _rhs(A, y, k1)
    t = t0
    h = h_init
    status = STOP_HORIZON
    steps = 0
    while True:
        if t >= T:
            status = STOP_HORIZON
            break
        if _norm(y) >= stop_norm:
            status = STOP_NORM
            break
        if steps >= max_steps:
            status = STOP_MAXSTEPS
            break
        if h < h_min:
            status = STOP_UNDERFLOW
            break
        last = False
        if t + h >= T:
            h = T - t
            last = True
        if t + h == t:
            status = STOP_UNDERFLOW
            break
        for i in range(n):
            yt[i] = y[i] + h * A21 * k1[i]
        _rhs(A, yt, k2)
        for i in range(n):
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        _rhs(A, yt, k3)
        for i in range(n):
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _rhs(A, yt, k4)
        for i in range(n):
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _rhs(A, yt, k5)
        for i in range(n):
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        _rhs(A, yt, k6)
        for i in range(n):
            ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        _rhs(A, ynew, k7)
        for i in range(n):
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        en = _err_norm(err, y, ynew, rtol, atol)
        steps += 1
        finite = True
        for i in range(n):
            if not math.isfinite(ynew[i]):
                finite = False
        if finite and en <= 1.0:
            if count == cap:
                cap *= 2
                ts2 = np.empty(cap)
                ts2[:count] = ts[:count]
                ts = ts2
                xs2 = np.empty((cap, n))
                xs2[:count] = xs[:count]
                xs = xs2
                d2 = np.empty((cap, 5, n))
                d2[:count] = dense[:count]
                dense = d2
            # dense output coefficients for the step [t, t + h]
            for i in range(n):
                ydiff = ynew[i] - y[i]
                bspl = h * k1[i] - ydiff
                dense[count - 1, 0, i] = y[i]
                dense[count - 1, 1, i] = ydiff
                dense[count - 1, 2, i] = bspl
                dense[count - 1, 3, i] = ydiff - h * k7[i] - bspl
                dense[count - 1, 4, i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            t = T if last else t + h
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = k7[i]
            ts[count] = t
            xs[count] = y
            count += 1
            fac = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            h = h * fac
        else:
            fac = 0.2 if not finite else min(1.0, max(0.2, 0.9 * en ** -0.2))
            h = h * fac
    return ts[:count], xs[:count], dense[: max(count - 1, 0)], status, h


def _initial_step(F: QuadraticField, x0, rtol, atol):
    sc = atol + rtol * np.abs(x0)
    f0 = F(x0)
    d0 = np.sqrt(np.mean((x0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    x1 = x0 + h0 * f0
    d2 = np.sqrt(np.mean(((F(x1) - f0) / sc) ** 2)) / h0
    h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


class StatusKind(enum.Enum):
    REACHED_HORIZON = "ReachedHorizon"
    BLOW_UP = "BlowUp"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass(frozen=True)
class TrajectoryStatus:
    kind: StatusKind
    t: float  # horizon, stop time, or underflow time
    t_star: Optional[float] = None
    norm_at_stop: Optional[float] = None
    h_at_stop: Optional[float] = None
    fit_residual: Optional[float] = None

    def describe(self) -> str:
        if self.kind is StatusKind.BLOW_UP:
            return f"BlowUp t*={self.t_star:.10g} norm={self.norm_at_stop:.3e}"
        if self.kind is StatusKind.REACHED_HORIZON:
            return f"ReachedHorizon T={self.t:.10g}"
        return f"StepUnderflow t={self.t:.10g}"


@dataclass(frozen=True)
class IntegrateOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    norm_cap: float = 1e8
    h_min: float = 1e-14
    max_steps: int = 5_000_000
    tail_cap_factor: float = 1e22

    def validate(self) -> "IntegrateOptions":
        for name in ("rtol", "atol", "norm_cap", "h_min", "tail_cap_factor"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise BadOptions(f"{name} must be a positive finite number, got {v!r}")
        if self.rtol < 1e-15:
            raise BadOptions("rtol below 1e-15 cannot be met in double precision")
        if int(self.max_steps) <= 0:
            raise BadOptions("max_steps must be positive")
        return self


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray  # integration variable s, increasing from 0
    states: np.ndarray
    status: TrajectoryStatus
    direction: int  # +1 forward, -1 backward (physical time is direction * s)
    dense: np.ndarray = field(repr=False)
    drift_report: Dict[str, float] = field(default_factory=dict)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def sample(self, t) -> np.ndarray:
        """Dense-output state at integration times t (within the saved range)."""
        t = np.atleast_1d(np.asarray(t, float))
        idx = np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, len(self.times) - 2)
        if len(self.times) < 2:
            return np.repeat(self.states[:1], len(t), axis=0)
        t0, t1 = self.times[idx], self.times[idx + 1]
        th = ((t - t0) / (t1 - t0))[:, None]
        th1 = 1 - th
        r = self.dense[idx]
        return r[:, 0] + th * (r[:, 1] + th1 * (r[:, 2] + th * (r[:, 3] + th1 * r[:, 4])))


def _decade_crossings(times, norms, start_norm):
    first = math.floor(math.log10(max(start_norm, 1e-300))) + 1
    out = []
    k = first
    for t, v in zip(times, norms):
        while v >= 10.0**k:
            out.append(t)
            k += 1
    return out


def superlinear_growth(times, norms, ratio=0.9, decades=3) -> bool:
    """Gaps between successive decade crossings of the norm must shrink."""
    cross = _decade_crossings(times, norms, norms[0] if norms[0] > 0 else norms[norms > 0][0])
    gaps = np.diff(cross)
    if len(gaps) < decades + 1:
        return False
    g = gaps[-(decades + 1):]
    if np.any(g <= 0):
        return True
    return bool(np.all(g[1:] / g[:-1] < ratio))


def _drift(states, monitor):
    out = {}
    for name, S in (monitor or {}).items():
        S = np.asarray(getattr(S, "S", S), float)
        q = np.einsum("mi,ij,mj->m", states, S, states)
        out[name] = float(np.max(np.abs(q - q[0])))
    return out


def integrate(
    F: QuadraticField,
    x0,
    T: float,
    opts: Optional[IntegrateOptions] = None,
    backward: bool = False,
    monitor: Optional[Dict[str, object]] = None,
) -> Trajectory:
    """Integrate x' = F(x) (or x' = -F(x) when backward) from x0 over [0, T]."""
    opts = (opts or IntegrateOptions()).validate()
    if not (math.isfinite(T) and T > 0):
        raise BadOptions(f"horizon T must be positive, got {T!r}")
    x0 = np.array(x0, dtype=float)
    if x0.shape != (F.dim,):
        raise BadOptions(f"initial condition must have {F.dim} components")
    G = F.negate() if backward else F
    A = np.ascontiguousarray(G.A)
    h0 = _initial_step(G, x0, opts.rtol, opts.atol)
    ts, xs, dense, code, h = _dopri(A, x0, 0.0, float(T), opts.rtol, opts.atol, opts.norm_cap, opts.h_min, int(opts.max_steps), h0)
    direction = -1 if backward else 1
    if code == STOP_HORIZON:
        status = TrajectoryStatus(StatusKind.REACHED_HORIZON, float(T))
    elif code == STOP_NORM and superlinear_growth(ts, np.linalg.norm(xs, axis=1)):
        # follow the escape until the step size collapses
        tail_cap = opts.norm_cap * opts.tail_cap_factor
        ts2, xs2, dense2, code2, h2 = _dopri(
            A, xs[-1].copy(), ts[-1], float(T), opts.rtol, opts.atol, tail_cap, opts.h_min, int(opts.max_steps), h
        )
        ts = np.concatenate([ts, ts2[1:]])
        xs = np.concatenate([xs, xs2[1:]])
        dense = np.concatenate([dense, dense2])
        norm_end = float(np.linalg.norm(xs[-1]))
        if code2 in (STOP_UNDERFLOW, STOP_NORM):
            traj = Trajectory(ts, xs, TrajectoryStatus(StatusKind.BLOW_UP, float(ts[-1])), direction, dense)
            t_star, res = _fit_blowup(traj)
            status = TrajectoryStatus(StatusKind.BLOW_UP, float(ts[-1]), t_star, norm_end, float(h2), res)
        elif code2 == STOP_HORIZON:
            status = TrajectoryStatus(StatusKind.REACHED_HORIZON, float(T))
        else:
            status = TrajectoryStatus(StatusKind.STEP_UNDERFLOW, float(ts[-1]), norm_at_stop=norm_end, h_at_stop=float(h2))
    else:
        status = TrajectoryStatus(
            StatusKind.STEP_UNDERFLOW, float(ts[-1]), norm_at_stop=float(np.linalg.norm(xs[-1])), h_at_stop=float(h)
        )
    return Trajectory(ts, xs, status, direction, dense, _drift(xs, monitor))


def _fit_blowup(traj: Trajectory):
    norms = traj.norms
    tail = norms >= norms[-1] / 10
    # the final decade must be contiguous at the end of the trajectory
    start = len(norms) - int(np.argmin(tail[::-1])) if not np.all(tail) else 0
    t = traj.times[start:]
    y = 1.0 / norms[start:]
    if len(t) < 10:
        raise InsufficientTail(f"only {len(t)} samples in the final decade of growth")
    tl = t[-1]
    M = np.column_stack([np.ones_like(t), t - tl])
    (a, b), *_ = np.linalg.lstsq(M, y, rcond=None)
    resid = float(np.sqrt(np.mean((M @ np.array([a, b]) - y) ** 2)) * norms[-1])
    return float(tl - a / b), resid


def estimate_blowup_time(traj: Trajectory) -> float:
    """Root of a least-squares line through 1/|x(t)| over the final decade of growth."""
    if traj.status.kind is not StatusKind.BLOW_UP:
        raise InsufficientTail(f"trajectory status is {traj.status.kind.value}, not BlowUp")
    return _fit_blowup(traj)[0]


def verify_against_closed_form(traj: Trajectory, sampler: Callable, t_max: Optional[float] = None) -> float:
    """Max relative error of the saved knots against an exact solution."""
    mask = np.ones(len(traj.times), bool) if t_max is None else traj.times <= t_max
    worst = 0.0
    for t, x in zip(traj.times[mask], traj.states[mask]):
        ex = np.asarray(sampler(traj.direction * t), float)
        diff = float(np.linalg.norm(x - ex))
        if diff == 0.0:
            continue
        worst = max(worst, diff / max(float(np.linalg.norm(ex)), 1e-300))
    return worst


def write_csv(traj: Trajectory, path, energy=None) -> None:
    """Columns t, x1..xn, energy; one row per accepted step, 17 significant digits."""
    S = None if energy is None else np.asarray(getattr(energy, "S", energy), float)
    n = traj.states.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + ["energy"])
        for t, x in zip(traj.times, traj.states):
            e = float(x @ S @ x) if S is not None else float("nan")
            w.writerow(["%.17g" % (traj.direction * t)] + ["%.17g" % v for v in x] + ["%.17g" % e])
