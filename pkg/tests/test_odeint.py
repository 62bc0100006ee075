import numpy as np
import pytest

from conftest import EX3_LAX, EX4_IDEMPOTENT, EX4_LAX, EX5_DUAL, R2
from geocomplete.errors import BadOptions, InsufficientTail
from geocomplete.odeint import (
    IntegrateOptions,
    StatusKind,
    Trajectory,
    TrajectoryStatus,
    estimate_blowup_time,
    integrate,
    superlinear_growth,
    verify_against_closed_form,
    write_csv,
)
from geocomplete.quadfield import QuadraticField, quadratic_first_integrals

RICCATI = QuadraticField.from_terms([{(1, 1): 1}, {}, {}])
EX3_FORMS = [np.diag([1.0, 1, -1]), np.diag([0.0, 1, 1])]
S2 = np.sqrt(2.0)


def ex5_exact(t):
    s = 1 - S2 * t
    return np.array([R2 / s, s**-0.5, s**-1.5])


def unit_starts(n, seed):
    X = np.random.default_rng(seed).normal(size=(n, 3))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


class TestBlowUp:
    def test_example5(self):
        tr = integrate(EX5_DUAL, [R2, 1, 1], 2.0)
        assert tr.status.kind is StatusKind.BLOW_UP
        assert tr.status.t_star == pytest.approx(1 / S2, abs=1e-3)
        assert estimate_blowup_time(tr) == pytest.approx(1 / S2, abs=1e-3)

    def test_example5_closed_form(self):
        tr = integrate(EX5_DUAL, [R2, 1, 1], 2.0)
        assert verify_against_closed_form(tr, ex5_exact, t_max=0.6) <= 1e-6

    def test_example4_idempotent(self):
        tr = integrate(EX4_LAX, EX4_IDEMPOTENT, 2.0)
        assert tr.status.kind is StatusKind.BLOW_UP
        assert tr.status.t_star == pytest.approx(1.0, abs=1e-3)

    def test_riccati(self):
        tr = integrate(RICCATI, [1.0, 0, 0], 2.0)
        assert estimate_blowup_time(tr) == pytest.approx(1.0, abs=1e-3)
        assert verify_against_closed_form(tr, lambda t: np.array([1 / (1 - t), 0, 0]), t_max=0.999) <= 1e-6

    @pytest.mark.parametrize("alpha", [0.5, 2.0, 4.0])
    def test_scaled_ray(self, alpha):
        tr = integrate(EX4_LAX, alpha * EX4_IDEMPOTENT, 2.0)
        assert tr.status.t_star == pytest.approx(1 / alpha, abs=1e-3)

    def test_status_invariants(self):
        opts = IntegrateOptions()
        for F, x0 in ((EX5_DUAL, [R2, 1, 1]), (EX4_LAX, EX4_IDEMPOTENT), (RICCATI, [1.0, 0, 0])):
            tr = integrate(F, x0, 2.0, opts)
            st = tr.status
            assert st.kind is StatusKind.BLOW_UP
            assert st.norm_at_stop >= opts.norm_cap
            assert st.h_at_stop <= opts.h_min
            assert np.all(np.diff(tr.times) > 0) and tr.times[0] == 0.0
            np.testing.assert_array_equal(tr.states[0], x0)
            assert st.describe().startswith("BlowUp t*=")

    def test_backward_escape_of_reversed_ray(self):
        # -X* is an idempotent of -F, so backward integration from -X* escapes at 1
        tr = integrate(EX4_LAX, -EX4_IDEMPOTENT, 2.0, backward=True)
        assert tr.direction == -1
        assert tr.status.t_star == pytest.approx(1.0, abs=1e-3)

    def test_example5_backward_reaches_horizon(self):
        tr = integrate(EX5_DUAL, [R2, 1, 1], 5.0, backward=True)
        assert tr.status.kind is StatusKind.REACHED_HORIZON
        # the closed form holds for all negative times
        assert verify_against_closed_form(tr, ex5_exact) <= 1e-6


class TestEstimate:
    def test_requires_blowup(self):
        tr = integrate(EX3_LAX, [1.0, 0, 0], 1.0)
        with pytest.raises(InsufficientTail):
            estimate_blowup_time(tr)

    def test_short_tail(self):
        t = np.linspace(0, 0.9, 5)
        x = np.column_stack([1 / (1 - t), 0 * t, 0 * t])
        tr = Trajectory(t, x, TrajectoryStatus(StatusKind.BLOW_UP, 0.9), 1, np.zeros((4, 5, 3)))
        with pytest.raises(InsufficientTail):
            estimate_blowup_time(tr)

    def test_synthetic_exact_line(self):
        t = 1 - np.logspace(0, -9, 400)
        t[0] = 0.0
        x = np.column_stack([1 / (1 - t), 0 * t, 0 * t])
        tr = Trajectory(t, x, TrajectoryStatus(StatusKind.BLOW_UP, t[-1]), 1, np.zeros((len(t) - 1, 5, 3)))
        assert estimate_blowup_time(tr) == pytest.approx(1.0, abs=1e-9)


class TestSuperlinear:
    def test_hyperbolic_growth(self):
        t = 1 - np.logspace(0, -8, 200)
        assert superlinear_growth(t, 1 / (1 - t))

    def test_exponential_growth_rejected(self):
        t = np.linspace(0, 30, 500)
        assert not superlinear_growth(t, np.exp(t))

    def test_too_few_decades(self):
        t = np.linspace(0, 0.9, 50)
        assert not superlinear_growth(t, 1 / (1 - t))


class TestBounded:
    def test_zero_field(self):
        for x0 in unit_starts(100, 0):
            tr = integrate(QuadraticField.zero(), x0, 10.0)
            assert tr.status.kind is StatusKind.REACHED_HORIZON
            assert np.all(tr.states == x0)

    def test_definite_integral_field(self):
        for x0 in unit_starts(100, 1):
            for backward in (False, True):
                tr = integrate(EX3_LAX, x0, 20.0, backward=backward)
                assert tr.status.kind is StatusKind.REACHED_HORIZON

    def test_drift_default_tolerances(self):
        fields = [EX3_LAX, QuadraticField.from_terms([{(2, 3): 1}, {(1, 3): -1}, {}])]
        for F in fields:
            forms = quadratic_first_integrals(F).basis
            for x0 in unit_starts(5, 2):
                tr = integrate(F, x0, 100.0, monitor={f"q{i}": Q for i, Q in enumerate(forms)})
                assert tr.status.kind is StatusKind.REACHED_HORIZON
                for i, Q in enumerate(forms):
                    assert tr.drift_report[f"q{i}"] <= 1e-8 * (1 + abs(x0 @ Q @ x0))

    def test_example3_long_horizon_drift(self):
        # the long run needs a tighter rtol than the default
        opts = IntegrateOptions(rtol=1e-11, atol=1e-13)
        for x0 in unit_starts(3, 3):
            tr = integrate(EX3_LAX, x0, 1000.0, opts, monitor={"a": EX3_FORMS[0], "b": EX3_FORMS[1]})
            assert tr.status.kind is StatusKind.REACHED_HORIZON
            assert max(tr.drift_report.values()) <= 1e-8

    def test_time_reversal(self):
        for x0 in unit_starts(10, 4):
            fwd = integrate(EX3_LAX, x0, 10.0)
            back = integrate(EX3_LAX, fwd.states[-1], 10.0, backward=True)
            assert np.linalg.norm(back.states[-1] - x0) <= 1e-7


class TestDenseOutput:
    def test_knots_reproduced(self):
        tr = integrate(EX3_LAX, [0.3, 0.5, 0.2], 5.0)
        np.testing.assert_allclose(tr.sample(tr.times), tr.states, atol=1e-13)

    def test_midpoints_accurate(self):
        tr = integrate(EX5_DUAL, [R2, 1, 1], 0.6, IntegrateOptions(rtol=1e-10))
        mids = 0.5 * (tr.times[1:] + tr.times[:-1])
        got = tr.sample(mids)
        exact = np.array([ex5_exact(t) for t in mids])
        assert np.max(np.linalg.norm(got - exact, axis=1) / np.linalg.norm(exact, axis=1)) <= 1e-8


class TestOptions:
    @pytest.mark.parametrize("kw", [{"rtol": -1.0}, {"atol": 0.0}, {"norm_cap": float("inf")}, {"rtol": 1e-17}, {"max_steps": 0}])
    def test_bad_options(self, kw):
        with pytest.raises(BadOptions):
            integrate(EX3_LAX, [1.0, 0, 0], 1.0, IntegrateOptions(**kw))

    @pytest.mark.parametrize("T", [0.0, -1.0, float("nan")])
    def test_bad_horizon(self, T):
        with pytest.raises(BadOptions):
            integrate(EX3_LAX, [1.0, 0, 0], T)

    def test_bad_x0(self):
        with pytest.raises(BadOptions):
            integrate(EX3_LAX, [1.0, 0], 1.0)

    def test_planar(self):
        F = QuadraticField.from_terms([{(2, 2): 1}, {(1, 2): -1}])
        tr = integrate(F, [0.0, 1.0], 3.0)
        assert tr.status.kind is StatusKind.REACHED_HORIZON
        # y' = -x y, x' = y^2 keeps x^2 + y^2 = 1
        assert abs(tr.norms[-1] - 1) <= 1e-9

    def test_max_steps_exhausted(self):
        tr = integrate(EX3_LAX, [0.6, 0.8, 0.0], 100.0, IntegrateOptions(max_steps=10))
        assert tr.status.kind is StatusKind.STEP_UNDERFLOW
        assert tr.status.t < 100.0


class TestCsv:
    def test_format(self, tmp_path):
        tr = integrate(EX3_LAX, [0.6, 0.8, 0.0], 1.0)
        p = tmp_path / "traj.csv"
        write_csv(tr, p, energy=EX3_FORMS[0])
        raw = p.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0] == "t,x1,x2,x3,energy"
        assert len(lines) == len(tr.times) + 1
        first = lines[1].split(",")
        assert float(first[0]) == 0.0 and float(first[1]) == 0.6
        assert float(first[4]) == pytest.approx(1.0)
        last = [float(v) for v in lines[-1].split(",")]
        assert last[0] == 1.0
        np.testing.assert_array_equal(last[1:4], tr.states[-1])

    def test_backward_times_negative(self, tmp_path):
        tr = integrate(EX3_LAX, [0.6, 0.8, 0.0], 1.0, backward=True)
        p = tmp_path / "b.csv"
        write_csv(tr, p)
        last = p.read_text().splitlines()[-1].split(",")
        assert float(last[0]) == -1.0
        assert last[-1] == "nan"
