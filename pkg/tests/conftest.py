import numpy as np
import pytest

from geocomplete.lie3 import AlgebraType, standard_algebra
from geocomplete.quadfield import QuadraticField, derivative_cubic

R2 = 2**-0.5
R3 = 3**-0.5

# metrics in the algebra frame
EX1_METRIC = np.array([[-1.0, 0, 1], [0, 1, 0], [1, 0, 0]])
EX1_PRINTED_METRIC = np.array([[-1.0, 0, 0], [0, 1, 1], [0, 1, 0]])
EX2_METRIC = np.array([[1.0, 0, 0], [0, 0, 0.5], [0, 0.5, 1]])  # hyperbolic frame
EX3_METRIC = np.diag([0.5, 1 / 3, -1.0])
EX4_METRIC = np.diag([1.0, -1.0, 2.0])
EX5_DUAL_ENERGY = np.array([[2.0, 0, 0], [0, 0, -0.5], [0, -0.5, 0]])
EX5_METRIC = np.linalg.inv(EX5_DUAL_ENERGY)

EX3_LAX = QuadraticField.from_terms([{(2, 3): -2}, {(1, 3): 1}, {(1, 2): -1}])
EX4_LAX = QuadraticField.from_terms([{(2, 3): 0.5}, {(1, 3): 1.5}, {(1, 2): 2}])
EX5_DUAL = QuadraticField.from_terms([{(2, 3): 1}, {(1, 2): 1}, {(1, 3): 3}])
EX4_IDEMPOTENT = np.array([R3, 1.0, 2 * R3])


@pytest.fixture(scope="session")
def algebras():
    return {
        "abelian": standard_algebra(AlgebraType.ABELIAN),
        "heisenberg": standard_algebra(AlgebraType.HEISENBERG),
        "su2": standard_algebra(AlgebraType.SU2),
        "e2": standard_algebra(AlgebraType.E2),
        "e11": standard_algebra(AlgebraType.E11),
        "sl2": standard_algebra(AlgebraType.SL2R),
        "sl2h": standard_algebra(AlgebraType.SL2R, {"frame": "hyperbolic"}),
        "ex5": standard_algebra(AlgebraType.NON_UNIMODULAR, {"alpha": 0.5, "beta": 0, "gamma": 0, "delta": 1.5}),
    }


def random_orthogonal(rng):
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    return Q * np.sign(np.diag(R))


def random_metric(rng, low=-2.0, high=2.0):
    M = rng.uniform(low, high, size=(3, 3))
    return 0.5 * (M + M.T)


def conserving_field(rng, Q):
    """Random quadratic field with x^T Q x as a first integral (projection of a Gaussian field)."""
    n = Q.shape[0]
    A = rng.normal(size=(n, n, n))
    A = 0.5 * (A + np.swapaxes(A, 1, 2))
    basis = np.eye(n**3).reshape(-1, n, n, n)
    C = np.column_stack([derivative_cubic(QuadraticField(B), Q) for B in basis])
    a = A.ravel()
    a = a - np.linalg.pinv(C) @ (C @ a)
    return QuadraticField(a.reshape(n, n, n))


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and "criterion_" in report.nodeid:
        key = report.nodeid.split("::")[-1]
        if report.when == "call" or report.outcome != "passed":
            _ACCEPTANCE[key] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split("_")[2])):
        verdict = "PASS" if _ACCEPTANCE[key] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {key}")
