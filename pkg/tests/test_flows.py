import numpy as np
import pytest

from conftest import random_orthogonal, EX1_METRIC, EX1_PRINTED_METRIC, EX3_LAX, EX3_METRIC, EX4_LAX, EX4_METRIC, EX5_DUAL, EX5_METRIC
from geocomplete.errors import DegenerateMetric, IllConditionedMetric
from geocomplete.flows import (
    energy_form,
    euler_field_algebra,
    euler_field_dual,
    koszul_residual,
    lax_field,
    lax_invariants,
    levi_civita,
    pushforward,
    torsion_residual,
)
from geocomplete.forms import normalized_killing, u_from_metric
from geocomplete.lie3 import AlgebraType, standard_algebra
from geocomplete.quadfield import QuadraticField, quadratic_first_integrals

EX1_DUAL = QuadraticField.from_terms([{(1, 2): 1}, {(3, 3): 1}, {(2, 3): -1}])
# the same construction fed the metric exactly as printed
EX1_PRINTED_DUAL = QuadraticField.from_terms([{(2, 2): 1, (2, 3): -1, (3, 3): -1}, {(1, 3): -1}, {(1, 2): 1}])


def _random_pairs(n, seed):
    rng = np.random.default_rng(seed)
    types = [t for t in AlgebraType if t is not AlgebraType.NON_UNIMODULAR]
    out = []
    while len(out) < n:
        k = len(out) % (len(types) + 1)
        if k < len(types):
            alg = standard_algebra(types[k])
        else:
            a = rng.uniform(0.2, 1.8)
            alg = standard_algebra(AlgebraType.NON_UNIMODULAR, {"alpha": a, "beta": 0, "gamma": 0, "delta": 2 - a})
        # well-conditioned frames: orthogonal times a bounded stretch
        alg = alg.change_basis(random_orthogonal(rng) @ np.diag(rng.uniform(0.5, 2.0, 3)))
        M = rng.uniform(-2, 2, (3, 3))
        S = M + M.T
        if np.min(np.abs(np.linalg.eigvalsh(S))) < 0.1:
            continue
        out.append((alg, S))
    return out


PAIRS = _random_pairs(100, 0)


def _max_diff(F, G):
    return float(np.max(np.abs(F.A - G.A)))


class TestLeviCivita:
    def test_abelian_zero(self, algebras):
        lc = levi_civita(algebras["abelian"], EX3_METRIC)
        assert not np.any(lc.table)

    def test_bi_invariant_x_dot_x(self, algebras):
        alg = algebras["sl2"]
        lc = levi_civita(alg, normalized_killing(alg))
        for x in np.random.default_rng(1).normal(size=(100, 3)):
            assert np.max(np.abs(lc.product(x, x))) <= 1e-12 * (1 + x @ x)

    @pytest.mark.parametrize("i", range(100))
    def test_koszul_and_torsion(self, i):
        alg, S = PAIRS[i]
        lc = levi_civita(alg, S)
        assert koszul_residual(lc, alg) <= 1e-10 * max(1, np.abs(alg.c).max() * np.abs(S).max())
        assert torsion_residual(lc, alg) <= 1e-10 * max(1, np.abs(alg.c).max())

    def test_metric_compatibility(self, algebras):
        # <x.y, z> + <y, x.z> = 0 for a left-invariant Levi-Civita product
        alg = algebras["ex5"]
        lc = levi_civita(alg, EX5_METRIC)
        S = EX5_METRIC
        for x, y, z in np.random.default_rng(2).normal(size=(50, 3, 3)):
            assert abs(lc.product(x, y) @ S @ z + y @ S @ lc.product(x, z)) <= 1e-10

    def test_degenerate(self, algebras):
        with pytest.raises(DegenerateMetric):
            levi_civita(algebras["e2"], np.diag([1.0, 1.0, 0.0]))

    def test_ill_conditioned(self, algebras):
        with pytest.raises(IllConditionedMetric):
            levi_civita(algebras["e2"], np.diag([1e6, 1.0, 5e-7]))


class TestEulerFields:
    def test_example1(self, algebras):
        assert _max_diff(euler_field_dual(algebras["e2"], EX1_METRIC), EX1_DUAL) <= 1e-12

    def test_example1_printed_metric(self, algebras):
        assert _max_diff(euler_field_dual(algebras["e2"], EX1_PRINTED_METRIC), EX1_PRINTED_DUAL) <= 1e-12

    def test_example5(self, algebras):
        assert _max_diff(euler_field_dual(algebras["ex5"], EX5_METRIC), EX5_DUAL) <= 1e-12

    def test_abelian_zero(self, algebras):
        assert not np.any(euler_field_algebra(algebras["abelian"], EX3_METRIC).A)
        assert not np.any(euler_field_dual(algebras["abelian"], EX3_METRIC).A)

    def test_bi_invariant_zero(self, algebras):
        alg = algebras["sl2"]
        assert np.abs(euler_field_algebra(alg, normalized_killing(alg)).A).max() <= 1e-14

    def test_e11_diagonal(self, algebras):
        S = np.diag([2.0, 3.0, 5.0])
        F = euler_field_dual(algebras["e11"], S)
        for x in np.random.default_rng(3).normal(size=(20, 3)):
            xi = S @ x
            expected = [-x[1] * xi[1] + x[2] * xi[2], x[0] * xi[1], -x[0] * xi[2]]
            np.testing.assert_allclose(F(xi), expected, atol=1e-12)

    @pytest.mark.parametrize("i", range(100))
    def test_dual_is_pushforward(self, i):
        alg, S = PAIRS[i]
        G = pushforward(euler_field_algebra(alg, S), S)
        F = euler_field_dual(alg, S)
        assert _max_diff(F, G) <= 1e-10 * max(1.0, F.coef_norm)

    @pytest.mark.parametrize("i", range(100))
    def test_energy_conserved(self, i):
        alg, S = PAIRS[i]
        assert quadratic_first_integrals(euler_field_algebra(alg, S)).contains(energy_form(S).S / np.abs(S).max()) <= 1e-10
        Sd = energy_form(S, "dual").S
        assert quadratic_first_integrals(euler_field_dual(alg, S)).contains(Sd / np.abs(Sd).max()) <= 1e-10


class TestLax:
    def test_example3(self, algebras):
        assert _max_diff(lax_field(algebras["sl2"], EX3_METRIC), EX3_LAX) <= 1e-12

    def test_example4(self, algebras):
        assert _max_diff(lax_field(algebras["sl2"], EX4_METRIC), EX4_LAX) <= 1e-12

    def test_identity_u_zero(self, algebras):
        alg = algebras["sl2"]
        assert np.abs(lax_field(alg, normalized_killing(alg)).A).max() <= 1e-14

    def test_conjugate_to_euler(self, algebras):
        rng = np.random.default_rng(4)
        alg = algebras["sl2"]
        for _ in range(30):
            M = rng.uniform(-2, 2, (3, 3))
            S = M + M.T
            U = u_from_metric(alg, S).U
            assert _max_diff(pushforward(euler_field_algebra(alg, S), U), lax_field(alg, S)) <= 1e-9 * max(1, np.abs(np.linalg.inv(S)).max())

    @pytest.mark.parametrize("metric", [EX3_METRIC, EX4_METRIC, np.array([[1.0, 0.3, 0], [0.3, -1, 0.2], [0, 0.2, 2]])])
    def test_invariants_are_first_integrals(self, algebras, metric):
        alg = algebras["sl2"]
        fib = quadratic_first_integrals(lax_field(alg, metric))
        for q in lax_invariants(alg, metric):
            assert fib.contains(q.S / np.abs(q.S).max()) <= 1e-10

    def test_example3_invariants(self, algebras):
        k, ku = lax_invariants(algebras["sl2"], EX3_METRIC)
        np.testing.assert_allclose(k.S, np.diag([1.0, 1, -1]), atol=1e-15)
        np.testing.assert_allclose(ku.S, np.diag([2.0, 3, -1]), atol=1e-14)


class TestEnergyForm:
    def test_identity_dual(self):
        np.testing.assert_array_equal(energy_form(np.eye(3), "dual").S, np.eye(3))

    def test_example5(self):
        np.testing.assert_allclose(energy_form(EX5_METRIC, "dual").S, [[2, 0, 0], [0, 0, -0.5], [0, -0.5, 0]], atol=1e-15)

    def test_example1_printed(self):
        np.testing.assert_allclose(energy_form(EX1_PRINTED_METRIC, "dual").S, np.linalg.inv(EX1_PRINTED_METRIC))

    def test_bad_tag(self):
        with pytest.raises(ValueError):
            energy_form(np.eye(3), "group")
