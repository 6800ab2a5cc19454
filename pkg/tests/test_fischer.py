import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divlab.errors import DimensionMismatchError, ParameterError
from divlab.fischer import (
    HomogeneousPoly,
    PolyVector,
    ZPoly,
    apply_unitary,
    apply_unitary_vec,
    derivative_family,
    gaussian_norm_check,
    mf_inner,
    mf_norm,
    multi_indices,
    poly_mul,
    random_unitary,
    symmetric_power_matrix,
    zpoly_grid_norm,
    zpoly_majorant_norm,
)
from divlab.series_core import DomainSpec, FourierTaylorSeries

mono = HomogeneousPoly.monomial
seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=3)
degs = st.integers(min_value=0, max_value=6)


def test_multi_indices_count():
    for d in (1, 2, 3):
        for k in range(6):
            assert len(multi_indices(d, k)) == math.comb(k + d - 1, d - 1)


class TestInner:
    def test_examples(self):
        assert mf_inner(mono((1, 1)), mono((1, 1))) == pytest.approx(0.5)
        assert mf_inner(mono((2, 0)), mono((0, 2))) == 0
        assert mf_inner(mono((2, 0)), mono((2, 0))) == pytest.approx(1.0)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            mf_inner(mono((1, 1)), mono((1, 0, 1)))
        with pytest.raises(DimensionMismatchError):
            mf_inner(mono((1, 1)), mono((1, 0)))

    def test_bad_multi_index(self):
        with pytest.raises(DimensionMismatchError):
            HomogeneousPoly(2, 2, {(1, 0): 1.0})

    @given(seeds, dims, degs)
    def test_hermitian_and_positive(self, seed, d, k):
        rng = np.random.default_rng(seed)
        p, q = HomogeneousPoly.random(d, k, rng), HomogeneousPoly.random(d, k, rng)
        assert mf_inner(p, q) == pytest.approx(mf_inner(q, p).conjugate(), abs=1e-13)
        assert mf_inner(p, p).real > 0

    @given(seeds, dims, st.integers(0, 3), st.integers(0, 3))
    def test_submultiplicative(self, seed, d, k1, k2):
        rng = np.random.default_rng(seed)
        p, q = HomogeneousPoly.random(d, k1, rng), HomogeneousPoly.random(d, k2, rng)
        assert mf_norm(poly_mul(p, q)) <= mf_norm(p) * mf_norm(q) + 1e-12

    def test_json_round_trip(self, rng):
        p = HomogeneousPoly.random(3, 4, rng)
        assert HomogeneousPoly.from_dict(p.to_dict()) == p


class TestUnitary:
    def test_identity(self, rng):
        p = HomogeneousPoly.random(3, 3, rng)
        q = apply_unitary(np.eye(3), p)
        assert all(abs(q.coeffs[Q] - p.coeffs[Q]) == 0 for Q in p.coeffs)

    def test_swap(self):
        q = apply_unitary(np.array([[0, 1], [1, 0]]), mono((2, 0)))
        assert {Q: v for Q, v in q.coeffs.items() if v != 0} == {(0, 2): 1}

    def test_rotation_expansion(self):
        T = np.array([[1, 1], [-1, 1]]) / math.sqrt(2)
        q = apply_unitary(T, mono((2, 0)))
        # (x1 + x2)^2 / 2
        assert q.coeffs[(2, 0)] == pytest.approx(0.5)
        assert q.coeffs[(1, 1)] == pytest.approx(1.0)
        assert q.coeffs[(0, 2)] == pytest.approx(0.5)
        assert abs(mf_norm(q) - 1.0) < 1e-12

    def test_non_unitary_rejected(self):
        with pytest.raises(ParameterError):
            apply_unitary(np.array([[2, 0], [0, 1]]), mono((1, 1)))

    @given(seeds, dims, degs)
    def test_substitution_invariance(self, seed, d, k):
        rng = np.random.default_rng(seed)
        p = HomogeneousPoly.random(d, k, rng)
        T = random_unitary(d, rng)
        assert abs(mf_norm(apply_unitary(T, p)) - mf_norm(p)) <= 1e-10

    def test_substitution_pointwise(self, rng):
        p = HomogeneousPoly.random(3, 4, rng)
        T = random_unitary(3, rng)
        x = rng.normal(size=(10, 3)) + 1j * rng.normal(size=(10, 3))
        assert np.allclose(apply_unitary(T, p).evaluate(x), p.evaluate(x @ T.T), rtol=1e-12)

    @given(seeds, dims, degs)
    def test_component_invariance(self, seed, d, k):
        rng = np.random.default_rng(seed)
        g = PolyVector(tuple(HomogeneousPoly.random(d, k, rng) for _ in range(d)))
        T = random_unitary(d, rng)
        assert abs(mf_norm(apply_unitary_vec(T, g)) - mf_norm(g)) <= 1e-10

    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("L", [2, 3, 4, 5])
    def test_symmetric_power_unitary(self, d, L):
        t = random_unitary(d, np.random.default_rng(10 * d + L))
        M, basis = symmetric_power_matrix(t, L)
        assert M.shape == (len(basis), len(basis))
        assert np.max(np.abs(M @ M.conj().T - np.eye(len(basis)))) <= 1e-10

    def test_symmetric_power_raw_basis_not_unitary(self):
        t = random_unitary(2, np.random.default_rng(3))
        M, basis = symmetric_power_matrix(t, 3, orthonormal=False)
        assert np.max(np.abs(M @ M.conj().T - np.eye(len(basis)))) > 1e-3


class TestGaussian:
    def test_zero(self):
        exact, est = gaussian_norm_check(HomogeneousPoly.zero(2, 3), 1000)
        assert exact == 0 and est == 0

    def test_linear(self):
        exact, est = gaussian_norm_check(mono((1,)), 200_000)
        assert exact == pytest.approx(1.0)
        assert est == pytest.approx(1.0, rel=0.02)

    def test_product(self):
        exact, est = gaussian_norm_check(mono((1, 1)), 10**6, seed=1)
        assert exact == pytest.approx(0.5)
        assert est == pytest.approx(0.5, rel=0.05)

    @pytest.mark.parametrize("Q", [(3,), (2, 1), (1, 1, 1), (0, 4, 1)])
    def test_monomial_moment(self, Q):
        # int |x^Q|^2 e^{-|x|^2} dV / pi^d = Q!, then divided by |Q|!
        moment = math.prod(math.factorial(q) for q in Q) / math.factorial(sum(Q))
        assert mf_norm(mono(Q)) ** 2 == pytest.approx(moment, rel=1e-15)

    def test_samples_validated(self):
        with pytest.raises(ParameterError):
            gaussian_norm_check(mono((1,)), 0)


DOM = DomainSpec(1.0, 1.0, 1, 6)


def zcoef(modes):
    return FourierTaylorSeries.from_terms(DOM, {(0, j): c for j, c in modes.items()})


class TestDerivativeFamily:
    def test_zero_order(self):
        f = ZPoly(1, 1, {(1,): zcoef({1: 1.0})})
        g = derivative_family(f, 0)
        assert g.coeffs[(1,)] == f.coeffs[(1,)]

    def test_first_mode(self):
        g = derivative_family(ZPoly(1, 1, {(1,): zcoef({1: 1.0})}), (1,))
        assert g.coeffs[(1,)][0, 1] == pytest.approx(1j)

    def test_second_mode(self):
        g = derivative_family(ZPoly(1, 1, {(1,): zcoef({2: 1.0})}), (2,))
        assert g.coeffs[(1,)][0, 2] == pytest.approx(-2.0)

    @given(seeds, st.integers(0, 5), st.floats(0.05, 0.9))
    def test_cauchy_estimate(self, seed, P, gap):
        rng = np.random.default_rng(seed)
        coeffs = {
            Q: zcoef({j: complex(*rng.normal(size=2)) for j in range(-6, 7)}) for Q in multi_indices(2, 2)
        }
        f = ZPoly(2, 2, coeffs)
        delta = 1.0
        lhs = zpoly_majorant_norm(derivative_family(f, P), delta - gap)
        assert lhs <= zpoly_majorant_norm(f, delta) / gap**P * (1 + 1e-12)

    def test_constant_coefficients_grid_is_exact(self):
        f = ZPoly(2, 2, {(2, 0): zcoef({0: 3.0}), (1, 1): zcoef({0: 1.0})})
        assert zpoly_grid_norm(f, 0.5) == pytest.approx(zpoly_majorant_norm(f, 0.5), rel=1e-14)

    def test_majorant_bounds_grid(self, rng):
        f = ZPoly(1, 2, {(2,): zcoef({j: complex(*rng.normal(size=2)) for j in range(-3, 4)})})
        assert zpoly_grid_norm(f, 0.7) <= zpoly_majorant_norm(f, 0.7) * (1 + 1e-12)
