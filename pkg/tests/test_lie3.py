import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_orthogonal
from geocomplete.errors import BadParams, InconsistentBrackets, JacobiViolation, NotUnimodular
from geocomplete.lie3 import (
    AlgebraType,
    LieAlgebra3,
    algebra_from_milnor,
    bracket,
    canonical_signature,
    classify,
    is_unimodular,
    jacobi_residual,
    milnor_normal_form,
    standard_algebra,
)

E = np.eye(3)
vec3 = arrays(np.float64, 3, elements=st.floats(-10, 10))
UNIMODULAR = [t for t in AlgebraType if t is not AlgebraType.NON_UNIMODULAR]


class TestBracket:
    def test_e2_e3_e1(self, algebras):
        np.testing.assert_array_equal(bracket(algebras["e2"], E[2], E[0]), E[1])

    def test_e2_e2_e3_vanishes(self, algebras):
        np.testing.assert_array_equal(bracket(algebras["e2"], E[1], E[2]), np.zeros(3))

    def test_e11_e1_e2(self, algebras):
        np.testing.assert_array_equal(bracket(algebras["e11"], E[0], E[1]), E[1])

    def test_self_bracket_zero(self, algebras):
        x = np.array([0.3, -1.2, 2.5])
        for alg in algebras.values():
            assert np.all(bracket(alg, x, x) == 0)

    @settings(max_examples=50, deadline=None)
    @given(vec3, vec3, vec3, st.floats(-3, 3))
    def test_bilinear_antisymmetric(self, x, y, z, a):
        alg = standard_algebra(AlgebraType.SL2R)
        lhs = bracket(alg, a * x + z, y)
        rhs = a * bracket(alg, x, y) + bracket(alg, z, y)
        np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))
        np.testing.assert_array_equal(bracket(alg, x, y), -bracket(alg, y, x))

    def test_components_from_structure_constants(self, algebras):
        alg = algebras["ex5"]
        x, y = np.array([1.0, 2, 3]), np.array([-1.0, 0.5, 2])
        expected = np.array([sum(alg.c[k, i, j] * x[i] * y[j] for i in range(3) for j in range(3)) for k in range(3)])
        np.testing.assert_allclose(bracket(alg, x, y), expected, rtol=1e-14)


class TestConstruction:
    def test_from_brackets_sparse_defaults_zero(self):
        alg = LieAlgebra3.from_brackets([(1, 2, (0, 0, 1))])
        assert alg.c[2, 0, 1] == 1 and alg.c[2, 1, 0] == -1
        assert np.count_nonzero(alg.c) == 2

    def test_reversed_pair_consistent(self):
        a = LieAlgebra3.from_brackets([(2, 1, (0, 0, -1))])
        np.testing.assert_array_equal(a.c, standard_algebra(AlgebraType.HEISENBERG).c)

    def test_conflicting_pairs_rejected(self):
        with pytest.raises(InconsistentBrackets):
            LieAlgebra3.from_brackets([(1, 2, (0, 0, 1)), (2, 1, (0, 0, 1))])

    def test_diagonal_bracket_rejected(self):
        with pytest.raises(InconsistentBrackets):
            LieAlgebra3.from_brackets([(1, 1, (1, 0, 0))])

    def test_jacobi_violation_rejected(self):
        # [e1,e2]=e1, [e2,e3]=e2, [e3,e1]=e3 breaks Jacobi
        with pytest.raises(JacobiViolation):
            LieAlgebra3.from_brackets([(1, 2, (1, 0, 0)), (2, 3, (0, 1, 0)), (3, 1, (0, 0, 1))])

    def test_antisymmetry_exact(self, algebras):
        for alg in algebras.values():
            np.testing.assert_array_equal(alg.c, -np.swapaxes(alg.c, 1, 2))
            assert jacobi_residual(alg.c) <= 1e-10

    def test_immutable(self, algebras):
        with pytest.raises(ValueError):
            algebras["e2"].c[0, 0, 0] = 1.0


class TestUnimodular:
    def test_e2(self, algebras):
        assert is_unimodular(algebras["e2"])

    def test_example5_family(self, algebras):
        alg = algebras["ex5"]
        assert not is_unimodular(alg)
        np.testing.assert_allclose(alg.trace_vector(), [2, 0, 0], atol=1e-15)

    def test_abelian(self, algebras):
        assert is_unimodular(algebras["abelian"])

    @pytest.mark.parametrize("t", UNIMODULAR, ids=lambda t: t.value)
    def test_trace_ad_vanishes_linearly(self, t):
        rng = np.random.default_rng(7)
        alg = standard_algebra(t).change_basis(rng.normal(size=(3, 3)))
        for x in rng.normal(size=(100, 3)):
            assert abs(np.trace(alg.ad(x))) <= 1e-10 * (1 + np.abs(alg.c).max()) * np.linalg.norm(x)


class TestMilnor:
    def test_e2_alphas(self, algebras):
        md = milnor_normal_form(algebras["e2"])
        np.testing.assert_allclose(sorted(md.alphas), [0, 1, 1], atol=1e-12)
        assert md.sign_signature == (1, 1, 0)

    def test_abelian_alphas(self, algebras):
        np.testing.assert_array_equal(milnor_normal_form(algebras["abelian"]).alphas, np.zeros(3))

    def test_sl2_signature(self, algebras):
        assert milnor_normal_form(algebras["sl2"]).sign_signature == (1, 1, -1)
        assert milnor_normal_form(algebras["sl2h"]).sign_signature == (1, 1, -1)

    def test_frame_diagonalizes_brackets(self):
        rng = np.random.default_rng(3)
        alg = standard_algebra(AlgebraType.SU2).change_basis(rng.normal(size=(3, 3)))
        md = milnor_normal_form(alg)
        cf = alg.change_basis(md.frame).c
        for m in range(3):
            i, j = (m + 1) % 3, (m + 2) % 3
            np.testing.assert_allclose(cf[:, i, j], md.alphas[m] * np.eye(3)[m], atol=1e-9)
        assert md.residual <= 1e-9
        np.testing.assert_allclose(md.frame.T @ md.frame, np.eye(3), atol=1e-12)
        assert np.linalg.det(md.frame) > 0

    def test_not_unimodular(self, algebras):
        with pytest.raises(NotUnimodular):
            milnor_normal_form(algebras["ex5"])

    def test_canonical_flip(self):
        assert canonical_signature([-1.0, -2.0, 3.0]) == (1, 1, -1)
        assert canonical_signature([0.0, -1.0, 0.0]) == (1, 0, 0)
        assert canonical_signature([-1.0, 1.0, 0.0]) == (1, 0, -1)


class TestClassify:
    @pytest.mark.parametrize(
        "alphas, kind",
        [
            ((0, 0, 0), AlgebraType.ABELIAN),
            ((1, 0, 0), AlgebraType.HEISENBERG),
            ((1, 1, 1), AlgebraType.SU2),
            ((1, 1, 0), AlgebraType.E2),
            ((1, -1, 0), AlgebraType.E11),
            ((1, 1, -1), AlgebraType.SL2R),
        ],
    )
    def test_signature_table(self, alphas, kind):
        assert classify(algebra_from_milnor(alphas)).kind is kind

    @pytest.mark.parametrize("t", UNIMODULAR, ids=lambda t: t.value)
    def test_standard_roundtrip(self, t):
        assert classify(standard_algebra(t)).kind is t

    @pytest.mark.parametrize("t", UNIMODULAR, ids=lambda t: t.value)
    def test_invariant_under_orthogonal_conjugation(self, t):
        rng = np.random.default_rng(11)
        alg = standard_algebra(t)
        for _ in range(100):
            assert classify(alg.change_basis(random_orthogonal(rng))).kind is t

    def test_non_unimodular(self, algebras):
        cls = classify(algebras["ex5"])
        assert cls.kind is AlgebraType.NON_UNIMODULAR
        assert cls.describe() == "NonUnimodular, trace vector (2,0,0)"

    def test_describe_e2(self, algebras):
        assert classify(algebras["e2"]).describe() == "E2, signature (+,+,0)"


class TestStandardAlgebra:
    def test_e2_table(self, algebras):
        alg = algebras["e2"]
        assert alg.bracket_list() == [
            {"i": 1, "j": 2, "result": [0.0, 0.0, 1.0]},
            {"i": 1, "j": 3, "result": [0.0, -1.0, 0.0]},
        ]

    def test_example5_table(self, algebras):
        alg = algebras["ex5"]
        np.testing.assert_array_equal(alg.bracket(E[0], E[1]), [0, 0.5, 0])
        np.testing.assert_array_equal(alg.bracket(E[0], E[2]), [0, 0, 1.5])
        np.testing.assert_array_equal(alg.bracket(E[1], E[2]), [0, 0, 0])

    def test_abelian_zero(self, algebras):
        assert not np.any(algebras["abelian"].c)

    def test_bad_params(self):
        with pytest.raises(BadParams):
            standard_algebra(AlgebraType.NON_UNIMODULAR, {"alpha": 1, "beta": 0, "gamma": 0, "delta": 0.5})
        with pytest.raises(BadParams):
            standard_algebra(AlgebraType.SL2R, {"frame": "polar"})

    def test_sl2_tables(self, algebras):
        o, h = algebras["sl2"], algebras["sl2h"]
        np.testing.assert_array_equal(o.bracket(E[0], E[1]), -E[2])
        np.testing.assert_array_equal(o.bracket(E[0], E[2]), -E[1])
        np.testing.assert_array_equal(o.bracket(E[1], E[2]), E[0])
        np.testing.assert_array_equal(h.bracket(E[0], E[1]), E[1])
        np.testing.assert_array_equal(h.bracket(E[0], E[2]), -E[2])
        np.testing.assert_array_equal(h.bracket(E[1], E[2]), E[0])
