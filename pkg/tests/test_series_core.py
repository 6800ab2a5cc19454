import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from divlab.errors import DimensionMismatchError, OrderError
from divlab.series_core import (
    DomainSpec,
    FourierTaylorSeries,
    MapGerm,
    VerticalVectorField,
    coeff_sup_bound,
    compose_into,
    compose_maps,
    flow_time_one,
    fts_add,
    fts_mul,
    invert_map,
    jet,
    log_of_map,
)
from oracles import naive_compose, naive_mul

DOM = DomainSpec(1.0, 1.0, 6, 4)


def fts(terms, dom=DOM, min_order=None):
    return FourierTaylorSeries.from_terms(dom, terms, min_order)


def random_fts(rng, dom=DOM, min_order=0, scale=1.0, band=None):
    arr = np.zeros(dom.shape, dtype=complex)
    J = dom.fourier_band
    k = J if band is None else band
    block = rng.normal(size=(dom.taylor_order + 1, 2 * k + 1)) + 1j * rng.normal(size=(dom.taylor_order + 1, 2 * k + 1))
    arr[:, J - k : J + k + 1] = scale * block
    arr[:min_order] = 0
    return FourierTaylorSeries(dom, arr, min_order)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestArithmetic:
    def test_add_identity_and_inverse(self, rng):
        a = random_fts(rng)
        assert fts_add(a, FourierTaylorSeries.zeros(DOM)) == a
        assert fts_add(a, -a).is_zero()

    def test_add_disjoint_modes(self):
        s = fts_add(fts({(1, 1): 1}), fts({(1, -1): 1}))
        assert s[1, 1] == 1 and s[1, -1] == 1
        assert s.min_order == 1

    def test_add_mismatch(self):
        other = FourierTaylorSeries.zeros(DomainSpec(1.0, 1.0, 5, 4))
        with pytest.raises(DimensionMismatchError):
            fts_add(fts({(1, 0): 1}), other)

    def test_mul_examples(self):
        v = fts({(1, 0): 1})
        assert fts_mul(v, v)[2, 0] == 1
        ve = fts({(1, 1): 1})
        p = fts_mul(ve, ve)
        assert p[2, 2] == 1 and np.count_nonzero(p.coeffs) == 1
        one_plus = fts({(0, 0): 1, (1, 0): 1})
        one_minus = fts({(0, 0): 1, (1, 0): -1})
        q = fts_mul(one_plus, one_minus, out_order=1)
        assert q[0, 0] == 1 and q[1, 0] == 0 and q[2, 0] == 0

    def test_mul_drops_out_of_band_modes(self):
        top = fts({(1, 4): 1})
        p = fts_mul(top, top)
        assert p.is_zero()

    @given(seeds)
    def test_mul_matches_naive(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_fts(rng), random_fts(rng)
        ref = naive_mul(np.array(a.coeffs), np.array(b.coeffs), 6, 4)
        assert np.allclose(fts_mul(a, b).coeffs, ref, rtol=0, atol=1e-12 * np.abs(ref).max())


class TestJet:
    def test_examples(self):
        u = fts({(1, 0): 1, (3, 0): 1})
        assert jet(u, 1, "up_to") == fts({(1, 0): 1}, min_order=1)
        assert np.array_equal(jet(u, DOM.taylor_order, "up_to").coeffs, u.coeffs)
        w = fts({(2, 1): 1, (3, 0): 1})
        assert np.array_equal(jet(w, 2, "exact_degree").coeffs, fts({(2, 1): 1}).coeffs)

    def test_out_of_range(self):
        with pytest.raises(OrderError):
            jet(fts({(1, 0): 1}), 7)

    @given(seeds, st.integers(min_value=0, max_value=6))
    def test_decomposition_exact(self, seed, m):
        u = random_fts(np.random.default_rng(seed))
        total = jet(u, m, "up_to") + jet(u, m, "above")
        assert np.array_equal(total.coeffs, u.coeffs)


class TestCompose:
    def test_linear_substitution(self):
        lam = 0.3 + 0.4j
        v = fts({(1, 0): 1})
        out = compose_into(v, FourierTaylorSeries.zeros(DOM), fts({(1, 0): lam}))
        assert out[1, 0] == lam and np.count_nonzero(out.coeffs) == 1

    def test_vertical_substitution(self):
        outer = fts({(1, 1): 1})
        out = compose_into(outer, FourierTaylorSeries.zeros(DOM), fts({(1, 0): 1, (2, 0): 1}))
        assert out[1, 1] == 1 and out[2, 1] == 1 and np.count_nonzero(out.coeffs) == 2

    def test_first_order_shift(self):
        outer = fts({(1, 1): 1})
        out = compose_into(outer, fts({(1, 0): 1}), fts({(1, 0): 1}), out_order=2)
        assert out[1, 1] == 1 and out[2, 1] == 1j
        assert np.count_nonzero(out.coeffs) == 2

    def test_order_preconditions(self):
        outer = fts({(1, 1): 1})
        with pytest.raises(OrderError):
            compose_into(outer, fts({(0, 1): 1}), fts({(1, 0): 1}))

    def test_linear_substitutions_associate(self, rng):
        lam = np.exp(0.7j)
        u = random_fts(rng)
        lv = fts({(1, 0): lam})
        z = FourierTaylorSeries.zeros(DOM)
        twice = compose_into(compose_into(u, z, lv), z, lv)
        once = compose_into(u, z, fts({(1, 0): lam * lam}))
        assert np.allclose(twice.coeffs, once.coeffs, rtol=1e-15, atol=1e-15)

    @given(seeds)
    def test_matches_naive_oracle(self, seed):
        # band 2 + 6 * 1 never overflows J = 8, so band-J arithmetic is exact
        rng = np.random.default_rng(seed)
        dom = DomainSpec(1.0, 1.0, 6, 8)
        outer = random_fts(rng, dom, band=2)
        hs = random_fts(rng, dom, min_order=1, scale=0.3, band=1)
        vs = random_fts(rng, dom, min_order=1, scale=0.3, band=1)
        got = compose_into(outer, hs, vs)
        ref = naive_compose(np.array(outer.coeffs), 0.0, np.array(hs.coeffs), np.array(vs.coeffs), 6, 8)
        assert np.allclose(got.coeffs, ref, rtol=0, atol=1e-12 * max(1.0, np.abs(ref).max()))


class TestMaps:
    def test_inverse_round_trip(self, rng):
        dom = DomainSpec(1.0, 1.0, 8, 8)
        g = MapGerm(0j, 1 + 0j, random_fts(rng, dom, 1, 0.1, band=1), random_fts(rng, dom, 2, 0.1, band=1))
        gi = invert_map(g)
        ident = compose_maps(g, gi)
        assert ident.max_abs_difference(MapGerm.identity(dom)) < 1e-14

    def test_flow_of_v_squared(self):
        dom = DomainSpec(1.0, 1.0, 4, 0)
        Y = VerticalVectorField(FourierTaylorSeries.zeros(dom, 2), FourierTaylorSeries.from_terms(dom, {(2, 0): 1}))
        F = flow_time_one(Y, 4)
        assert np.allclose(F.v_perturbation.coeffs[:, 0], [0, 0, 1, 1, 1])
        back = log_of_map(F, 4)
        assert np.allclose(back.v_component.coeffs[:, 0], [0, 0, 1, 0, 0], atol=1e-15)

    def test_zero_field(self):
        dom = DomainSpec(1.0, 1.0, 4, 2)
        z = FourierTaylorSeries.zeros(dom, 2)
        F = flow_time_one(VerticalVectorField(z, z))
        assert F.max_abs_difference(MapGerm.identity(dom)) == 0
        Y = log_of_map(MapGerm.identity(dom))
        assert Y.h_component.is_zero() and Y.v_component.is_zero()

    @given(seeds)
    def test_flow_log_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        dom = DomainSpec(1.0, 1.0, 6, 6)
        Yh = random_fts(rng, dom, 2, 0.1, band=1).truncate(6)
        Yv = random_fts(rng, dom, 2, 0.1, band=1).truncate(6)
        Y = VerticalVectorField(Yh, Yv)
        back = log_of_map(flow_time_one(Y))
        for got, ref in ((back.h_component, Yh), (back.v_component, Yv)):
            assert np.max(np.abs(got.coeffs - ref.coeffs)) <= 1e-10 * np.max(np.abs(ref.coeffs))


class TestSupBound:
    def test_examples(self):
        assert coeff_sup_bound(FourierTaylorSeries.zeros(DOM), 1.0, 1.0) == 0
        assert coeff_sup_bound(fts({(1, 0): 1}), 1.0, 0.5) == 0.5
        assert coeff_sup_bound(fts({(1, 1): 1}), 1.0, 1.0) == pytest.approx(np.e, rel=1e-15)

    def test_bounds_pointwise_values(self, rng):
        u = random_fts(rng, scale=0.2)
        h = rng.uniform(0, 2 * np.pi, 50) + 1j * rng.uniform(-0.9, 0.9, 50)
        v = 0.9 * np.exp(2j * np.pi * rng.random(50))
        assert np.all(np.abs(u.evaluate(h, v)) <= coeff_sup_bound(u, 0.9, 0.9))

    @given(seeds, st.integers(min_value=2, max_value=6), st.floats(min_value=0.01, max_value=0.99))
    def test_schwarz_truncation(self, seed, m, theta):
        u = random_fts(np.random.default_rng(seed), min_order=m)
        assert coeff_sup_bound(u, 0.5, theta) <= theta**m * coeff_sup_bound(u, 0.5, 1.0) * (1 + 1e-14)


class TestSerialization:
    @given(seeds)
    def test_json_round_trip_bit_exact(self, seed):
        u = random_fts(np.random.default_rng(seed), min_order=1)
        back = FourierTaylorSeries.from_json(u.to_json())
        assert back == u

    def test_json_layout(self):
        d = json.loads(fts({(1, -1): 2 + 1j, (0, 0): 1}).to_json())
        assert d["coeffs"] == [[0, 0, 1.0, 0.0], [1, -1, 2.0, 1.0]]
        assert (d["N"], d["J"]) == (6, 4)

    def test_min_order_validated(self):
        with pytest.raises(OrderError):
            FourierTaylorSeries.from_terms(DOM, {(1, 0): 1}, min_order=2)
