import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wienerlp.norms import QuadratureOptions, lp_integral
from wienerlp.spectrum import (TAU_PD, ZERO, TrigPoly, classify, combine, dilate, dirichlet,
                               dumps_poly, evaluate_grid, filter_multiples, loads_poly, make_poly,
                               min_coefficient, modulate, monomial, multiply, read_poly,
                               translate, write_poly)


def coef_map(f):
    return {h: c for h, c in f.items()}


small_freq = st.integers(-40, 40)
coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
polys = st.lists(st.tuples(small_freq, coef), min_size=1, max_size=12).map(make_poly)
pd_polys = st.lists(st.tuples(st.integers(0, 60), st.floats(0, 5)), min_size=1, max_size=12).map(make_poly)


def direct_sum(f, t):
    return np.array([sum(c * np.exp(2j * np.pi * h * x) for h, c in f.items()) for x in t])


class TestMakePoly:
    def test_support(self):
        f = make_poly([(0, 1), (1, 1)])
        assert f.freqs.tolist() == [0, 1]

    def test_cancellation_gives_zero(self):
        f = make_poly([(3, 2 + 0j), (3, -2 + 0j)])
        assert f.is_zero and f.degree == 0 and f.support_size == 0

    def test_cosine(self):
        f = make_poly([(-1, 0.5), (1, 0.5)])
        assert f(0.0) == pytest.approx(1.0)
        assert f(0.5) == pytest.approx(-1.0)

    def test_duplicates_are_summed(self):
        f = make_poly([(2, 1), (5, 1), (2, 0.5)])
        assert coef_map(f) == {2: 1.5, 5: 1}

    def test_arrays_are_read_only(self):
        f = dirichlet(3)
        with pytest.raises(ValueError):
            f.coefs[0] = 7

    @given(polys)
    def test_no_stored_zeros_and_sorted(self, f):
        assert np.all(f.coefs != 0)
        assert np.all(np.diff(f.freqs) > 0)


class TestDirichlet:
    def test_n1_is_constant(self):
        assert coef_map(dirichlet(1)) == {0: 1}

    def test_n3(self):
        f = dirichlet(3)
        assert coef_map(f) == {0: 1, 1: 1, 2: 1}
        assert f(0.0) == pytest.approx(3)

    def test_alternating_sum_at_half(self):
        assert abs(dirichlet(4)(0.5)) < 1e-12

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            dirichlet(0)

    @pytest.mark.parametrize("n", [2, 5, 17])
    def test_matches_geometric_sum(self, n):
        # sum form: e^{pi i (n-1) x} sin(pi n x) / sin(pi x)
        x = np.linspace(0.013, 0.49, 9)
        closed = np.exp(1j * np.pi * (n - 1) * x) * np.sin(np.pi * n * x) / np.sin(np.pi * x)
        assert np.allclose(dirichlet(n)(x), closed, atol=1e-12)


class TestShiftsAndDilations:
    def test_modulate_support(self):
        assert modulate(dirichlet(3), 5).freqs.tolist() == [5, 6, 7]

    def test_modulate_zero_is_identity(self):
        f = make_poly([(1, 2j), (4, -1)])
        assert modulate(f, 0) == f

    @given(polys, st.integers(-100, 100))
    @settings(max_examples=50)
    def test_modulate_keeps_modulus(self, f, K):
        M = 2 * (f.degree + abs(K)) + 1
        assert np.allclose(np.abs(evaluate_grid(modulate(f, K), M)),
                           np.abs(evaluate_grid(f, M)), atol=1e-9)

    def test_dilate_support(self):
        assert dilate(dirichlet(3), 4).freqs.tolist() == [0, 4, 8]

    def test_dilate_one_is_identity(self):
        f = make_poly([(1, 2j), (-4, -1)])
        assert dilate(f, 1) == f

    def test_dilate_rejects_zero(self):
        with pytest.raises(ValueError):
            dilate(dirichlet(3), 0)

    @given(polys, st.integers(1, 6))
    @settings(max_examples=30)
    def test_dilate_is_substitution(self, f, N):
        t = np.linspace(-0.5, 0.5, 13)
        assert np.allclose(dilate(f, N)(t), f(N * t), atol=1e-9)

    @pytest.mark.parametrize("p", [1.0, 2.5, 3.0])
    def test_norm_invariance(self, p):
        f = make_poly([(0, 1), (2, -0.5j), (5, 0.3)])
        opts = QuadratureOptions(oversample=64)
        base = lp_integral(f, p, opts=opts)
        for g in (dilate(f, 3), modulate(f, 11)):
            other = lp_integral(g, p, opts=opts)
            assert abs(other.value - base.value) <= other.error_bound + base.error_bound

    def test_translate(self):
        f = make_poly([(1, 1), (3, 2)])
        t = np.linspace(-0.5, 0.5, 7)
        assert np.allclose(translate(f, 0.2)(t), f(t - 0.2), atol=1e-12)


class TestMultiplyCombine:
    def test_majorant_expansions(self):
        g = multiply(make_poly([(0, 1), (3, 1)]), make_poly([(0, 1), (4, -1)]))
        G = multiply(make_poly([(0, 1), (3, 1)]), make_poly([(0, 1), (4, 1)]))
        assert coef_map(g) == {0: 1, 3: 1, 4: -1, 7: -1}
        assert coef_map(G) == {0: 1, 3: 1, 4: 1, 7: 1}

    def test_unit(self):
        f = make_poly([(1, 2j), (-4, -1)])
        assert multiply(f, make_poly([(0, 1)])) == f

    def test_dense_path_matches_outer(self):
        rng = np.random.default_rng(3)
        f = make_poly(zip(range(2100), rng.random(2100)))
        g = make_poly(zip(range(0, 4200, 2), rng.random(2100)))
        fast = multiply(f, g)
        t = np.array([0.0, 0.1, 0.37])
        assert np.allclose(fast(t), f(t) * g(t), rtol=1e-10)

    @given(pd_polys, pd_polys)
    @settings(max_examples=40)
    def test_product_of_positive_definite(self, f, g):
        assert classify(multiply(f, g)).is_positive_definite

    @given(polys, polys)
    @settings(max_examples=40)
    def test_pointwise_product(self, f, g):
        t = np.linspace(-0.5, 0.5, 11)
        assert np.allclose(multiply(f, g)(t), f(t) * g(t), atol=1e-8)

    def test_combine_cancels(self):
        f = make_poly([(1, 2j), (-4, -1)])
        assert combine(1, f, -1, f).is_zero

    def test_combine_union(self):
        assert combine(1, dirichlet(2), 1, modulate(dirichlet(2), 2)) == dirichlet(4)

    def test_combine_constants(self):
        assert coef_map(combine(2, 1, 0, dirichlet(3))) == {0: 2}

    def test_operators(self):
        f, g = dirichlet(2), monomial(5, 3)
        assert f + g == combine(1, f, 1, g)
        assert (f - f).is_zero
        assert 2 * f == combine(2, f, 0, ZERO)
        assert f * g == multiply(f, g)


class TestFilterAndClassify:
    def test_filter(self):
        f = filter_multiples(dirichlet(12), 4)
        assert coef_map(f) == {0: 1, 4: 1, 8: 1}
        assert classify(f).min_gap == 4

    def test_filter_one_is_identity(self):
        f = make_poly([(1, 2j), (-4, -1)])
        assert filter_multiples(f, 1) == f

    @given(st.integers(1, 200), st.integers(1, 9))
    def test_filter_keeps_idempotents(self, n, k):
        assert classify(filter_multiples(dirichlet(n), k)).is_idempotent

    def test_classify_dirichlet(self):
        r = classify(dirichlet(5))
        assert (r.is_idempotent, r.is_positive_definite, r.min_gap, r.degree) == (True, True, 1, 4)

    def test_negative_coefficient(self):
        assert not classify(make_poly([(0, 1), (3, -1)])).is_positive_definite

    def test_zero_polynomial_conventions(self):
        r = classify(ZERO)
        assert r.is_positive_definite and r.is_idempotent and r.min_gap == 0 and r.degree == 0
        assert min_coefficient(ZERO) == 0.0

    def test_tolerance(self):
        f = make_poly([(0, 1), (1, -0.5 * TAU_PD)])
        assert classify(f).is_positive_definite
        assert not classify(f, tau_pd=0).is_positive_definite

    @given(polys)
    def test_idempotent_implies_pd(self, f):
        r = classify(f)
        assert not r.is_idempotent or r.is_positive_definite
        if r.is_idempotent:
            assert np.allclose(f.coefs, f.coefs**2, atol=TAU_PD)


class TestEvaluateGrid:
    def test_roots_of_unity(self):
        v = evaluate_grid(make_poly([(0, 1), (1, 1)]), 4)
        assert np.allclose(v, [2, 1 + 1j, 0, 1 - 1j], atol=1e-15)

    def test_constant(self):
        assert np.allclose(evaluate_grid(make_poly([(0, 2.5)]), 9), 2.5)

    def test_alias_floor(self):
        with pytest.raises(ValueError):
            evaluate_grid(dirichlet(5), 8)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 256), st.integers(1, 4))
    @settings(max_examples=25, deadline=None)
    def test_direct_summation_oracle(self, seed, degree, over):
        rng = np.random.default_rng(seed)
        h = rng.choice(np.arange(-degree, degree + 1), size=min(20, 2 * degree + 1), replace=False)
        f = make_poly(zip(h.tolist(), (rng.standard_normal(h.size) + 1j * rng.standard_normal(h.size)).tolist()))
        M = over * (2 * f.degree + 1)
        t = np.arange(M) / M
        ref = direct_sum(f, t)
        assert np.max(np.abs(evaluate_grid(f, M) - ref)) <= 1e-12 * np.max(np.abs(ref))


class TestPositiveDefiniteShape:
    @given(pd_polys)
    @settings(max_examples=40)
    def test_modulus_is_even(self, f):
        M = 2 * f.degree + 1
        v = np.abs(evaluate_grid(f, M))
        mirrored = v[(-np.arange(M)) % M]
        assert np.max(np.abs(v - mirrored)) <= 1e-10 * f.abs_sum()

    @given(pd_polys)
    @settings(max_examples=40)
    def test_peak_at_zero(self, f):
        v = np.abs(evaluate_grid(f, 4 * f.degree + 1))
        assert np.all(v <= f(0.0).real * (1 + 1e-12))
        assert f(0.0).real == pytest.approx(f.abs_sum())


class TestFileFormat:
    @given(polys)
    def test_round_trip_is_exact(self, f):
        assert loads_poly(dumps_poly(f)) == f

    def test_file_round_trip(self, tmp_path):
        f = make_poly([(-3, 0.1 + 0.2j), (7, 1 / 3)])
        path = tmp_path / "f.json"
        write_poly(path, f)
        assert read_poly(path) == f
        assert json.loads(path.read_text())[0] == [-3, 0.1, 0.2]

    @pytest.mark.parametrize("text", ['{"a": 1}', "[[1, 2]]", "[[1.5, 1, 0]]"])
    def test_bad_records(self, text):
        with pytest.raises(ValueError):
            loads_poly(text)

    def test_read_only_fields_of_equal_polys(self):
        assert TrigPoly(np.array([0]), np.array([1.0])) == dirichlet(1)
