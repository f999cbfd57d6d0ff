import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wienerlp import constructions as C
from wienerlp.norms import QuadratureOptions, lp_integral, lp_integrals
from wienerlp.spectrum import (TAU_PD, classify, dilate, dirichlet, make_poly, min_coefficient,
                               modulate, multiply, translate)
from wienerlp.torus import TORUS, complement, make_set, symmetric_interval


def direct_three_term(g, G, N, a, tail_budget=0.05):
    # the defining sum, built from translate/dilate/multiply only
    T = C.triangle_poly(N, tail_budget)
    g2, G2 = dilate(g, 2 * N), dilate(G, 2 * N)
    return (multiply(translate(T, a), g2) + multiply(translate(T, -a), g2)
            + 2 * multiply(T, G2))


class TestShapiroExample:
    def test_support(self):
        f = C.shapiro_counterexample(12, 4)
        assert f.freqs.tolist() == [0, 4, 8]
        r = classify(f)
        assert r.is_idempotent and r.min_gap == 4

    @pytest.mark.parametrize("n,k", [(5, 1), (3, 4)])
    def test_rejects(self, n, k):
        with pytest.raises(ValueError):
            C.shapiro_counterexample(n, k)


class TestTriangle:
    @pytest.mark.parametrize("N", [1, 3, 10])
    def test_mean_and_signs(self, N):
        T = C.triangle_poly(N)
        assert T.coef(0) == pytest.approx(1 / (2 * N))
        assert np.all(T.coefs.real >= 0) and np.all(T.coefs.imag == 0)

    @pytest.mark.parametrize("N,budget", [(2, 0.1), (10, 0.05), (25, 0.01)])
    def test_peak_value(self, N, budget):
        v = C.triangle_poly(N, budget)(0.0).real
        assert 1 - budget <= v <= 1

    @pytest.mark.parametrize("N,budget", [(3, 0.2), (10, 0.05)])
    def test_cutoff_is_minimal(self, N, budget):
        M = C.triangle_cutoff(N, budget)
        assert C._triangle_tail(N, M) <= budget / (2 * N) < C._triangle_tail(N, M - 1)

    def test_tail_formula_matches_brute_force(self):
        N, M = 4, 30
        stop = 400_000
        m = np.arange(M + 1, stop)
        s = np.sin(np.pi * m / (2 * N)) ** 2
        brute = 2 * np.sum(2 * N * s / (np.pi * m) ** 2)
        # sin^2 averages 1/2 over a period, so the rest is about 2N / (pi^2 stop)
        brute += 2 * N / (np.pi**2 * stop)
        assert C._triangle_tail(N, M) == pytest.approx(brute, rel=1e-8)

    def test_shape(self):
        N = 5
        T = C.triangle_poly(N, 0.01)
        t = np.array([0.0, 0.05, 0.08, 0.15, 0.4])
        exact = np.maximum(1 - 2 * N * np.abs(t), 0)
        assert np.max(np.abs(T(t).real - exact)) <= 0.01

    def test_bad_budget(self):
        with pytest.raises(ValueError):
            C.triangle_poly(3, 1.5)


class TestThreeTerm:
    @pytest.mark.parametrize("a", [0.0, 0.35, 0.2371])
    def test_matches_direct_assembly(self, a):
        rng = np.random.default_rng(1)
        eta = rng.integers(0, 2, 9) * 2 - 1
        g = make_poly(zip(range(9), eta.astype(float).tolist()))
        G = dirichlet(9)
        fast = C.three_term_coefficients(g, G, 4, a)
        slow = direct_three_term(g, G, 4, a)
        diff = (fast - slow).coefs
        assert np.max(np.abs(diff), initial=0) <= 1e-12
        assert np.max(np.abs(slow.coefs.imag)) <= 1e-12

    def test_closed_form_spot_check(self):
        sv = C.sign_search(64, 1.5, 1.2, 10.0, seed=3)
        params = C.ConcentratorParams(64, 10, 0.35, 1.5, 1.2, 10.0)
        f = C.lowp_concentrator(params, sv)
        rng = np.random.default_rng(0)
        for h in rng.choice(f.freqs, size=100, replace=False):
            ref = C.three_term_reference(sv.poly(), dirichlet(65), 10, 0.35, int(h))
            assert abs(f.coef(int(h)).real - ref) <= 1e-10

    def test_degenerate_centre(self):
        # eta = +1 and a = 0: f = 4 Delta(t) D(2Nt), coefficients 4 Delta^(m)
        G = dirichlet(5)
        f = C.three_term_coefficients(G, G, 3, 0.0)
        T = C.triangle_poly(3)
        assert f.coef(0) == pytest.approx(4 * T.coef(0))
        expected = sum(4 * T.coef(13 - 6 * k) for k in range(5))
        assert f.coef(13) == pytest.approx(expected, rel=1e-12)
        assert classify(f).is_positive_definite

    def test_majorant_condition_enforced(self):
        with pytest.raises(ValueError):
            C.three_term_coefficients(make_poly([(0, 2)]), make_poly([(0, 1)]), 3, 0.3)

    def test_complex_rejected(self):
        with pytest.raises(ValueError):
            C.three_term_coefficients(make_poly([(0, 1j)]), make_poly([(0, 1)]), 3, 0.3)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.floats(0.0, 0.5))
    @settings(max_examples=25, deadline=None)
    def test_positive_definite(self, seed, N, a):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 40))
        eta = rng.integers(0, 2, n) * 2 - 1
        f = C.three_term_coefficients(make_poly(zip(range(n), eta.astype(float).tolist())),
                                      dirichlet(n), N, a)
        assert min_coefficient(f) >= -TAU_PD
        assert classify(f).is_positive_definite


class TestSignSearch:
    def test_large_n_succeeds_fast(self):
        sv = C.sign_search(256, 1, 2, 0.5, seed=0)
        assert sv.ratio <= 0.5 and sv.trials_used <= 64
        assert set(sv.signs) <= {1, -1} and len(sv.signs) == 257

    def test_impossible_target(self):
        with pytest.raises(C.SignSearchError) as info:
            C.sign_search(4, 1.5, 1.5, 1e-6, budget=8, seed=0)
        assert info.value.best.trials_used <= 8
        assert info.value.best.ratio > 1e-6

    def test_all_plus_vector_meets_loose_target(self):
        n, p, q = 16, 1.5, 1.0
        D = dirichlet(n + 1)
        eps = lp_integral(D, p).norm / lp_integral(D, q).norm
        assert lp_integral(D, p).norm <= eps * lp_integral(D, q).norm * (1 + 1e-12)

    def test_seeded(self):
        a = C.sign_search(32, 1.2, 1.0, 5.0, seed=9)
        b = C.sign_search(32, 1.2, 1.0, 5.0, seed=9)
        assert a == b

    def test_bad_sign_entries(self):
        with pytest.raises(ValueError):
            C.SignVector((1, 0, -1), 0, 1, 1.0)

    def test_bad_params(self):
        with pytest.raises(ValueError):
            C.ConcentratorParams(4, 3, 0.3, 1.0, 1.5, 0.1)
        with pytest.raises(ValueError):
            C.sign_search(4, 1.0, 1.0, 0.5, budget=0)


class TestMajorantPair:
    def test_coefficients(self):
        g0, G0 = C.ms_pair(3)
        assert dict(g0.items()) == {0: 1, 3: 1, 4: -1, 7: -1}
        assert dict(G0.items()) == {0: 1, 3: 1, 4: 1, 7: 1}
        assert classify(G0).is_idempotent

    def test_l2_norms_equal(self):
        g0, G0 = C.ms_pair(5)
        assert lp_integral(g0, 2).norm == pytest.approx(2) == lp_integral(G0, 2).norm

    def test_even_j_rejected(self):
        with pytest.raises(ValueError):
            C.ms_pair(4)

    def test_strict_inequality_p3(self):
        g0, G0 = C.ms_pair(3)
        opts = QuadratureOptions(oversample=2048)
        a, b = lp_integral(g0, 3, opts=opts), lp_integral(G0, 3, opts=opts)
        assert b.value + b.error_bound < a.value - a.error_bound


class TestRiesz:
    def test_k0_is_base_pair(self):
        assert C.riesz_pair(3, 0) == C.ms_pair(3)

    @pytest.mark.parametrize("K", [1, 2])
    def test_support_and_idempotence(self, K):
        g, G = C.riesz_pair(3, K)
        assert g.support_size == G.support_size == 4 ** (K + 1)
        assert classify(G).is_idempotent
        assert np.array_equal(np.abs(g.coefs), np.abs(G.coefs))
        assert lp_integral(G, 2).norm == pytest.approx(2 ** (K + 1))

    def test_multiplicative_coefficients(self):
        j, K = 3, 2
        g0, _ = C.ms_pair(j)
        scales = [1] + C.riesz_scales(j, K)
        g, _ = C.riesz_pair(j, K)
        base = dict(g0.items())
        for combo in np.ndindex(*(4,) * (K + 1)):
            freqs = [int(g0.freqs[i]) for i in combo]
            h = sum(s * f for s, f in zip(scales, freqs))
            assert g.coef(h) == math.prod(base[f] for f in freqs)

    def test_growth_validation(self):
        with pytest.raises(ValueError):
            C.riesz_scales(3, 2, growth=1)
        with pytest.raises(OverflowError):
            C.riesz_scales(3, 40)

    def test_lacunary_scales_amplify_norm_gap(self):
        opts = QuadratureOptions(oversample=64)
        ratios = []
        for K in (0, 1, 2):
            g, G = C.riesz_pair(3, K, growth=16)
            ratios.append(lp_integral(g, 3, opts=opts).value / lp_integral(G, 3, opts=opts).value)
        assert ratios[0] > 1 and ratios[0] < ratios[1] < ratios[2]
        assert ratios[2] == pytest.approx(ratios[0] ** 3, rel=1e-5)

    def test_highp_concentrator_positive_definite(self):
        f = C.highp_concentrator(10, 0.35, 3, 1, growth=8)
        assert classify(f).is_positive_definite

    def test_idempotent_in_both_slots(self):
        _, G = C.ms_pair(3)
        assert classify(C.three_term_coefficients(G, G, 10, 0.35)).is_positive_definite


class TestPlacement:
    def test_fit_triangle(self):
        E = make_set([(0.3, 0.4), (-0.4, -0.3)])
        N, a = C.fit_triangle(E)
        assert (N, a) == (10, pytest.approx(0.35))
        assert C.contains_set(E, C.target_interval(N, a))

    def test_fit_triangle_too_small(self):
        with pytest.raises(ValueError):
            C.fit_triangle(make_set([(0.3, 0.4), (-0.4, -0.3)]), N=5)

    def test_default_alpha(self):
        assert C.default_alpha(2.5, 2.0) == 15
        a = C.default_alpha(3.0, 1.0)
        assert a * (1 - 1 / 3) >= 2 and (a - 1) * (1 - 1 / 3) < 2

    def test_default_j(self):
        assert [C.default_j(p) for p in (1.5, 2.5, 3, 5.5)] == [1, 3, 3, 3]
        assert all(C.default_j(p) > p / 2 and C.default_j(p) % 2 for p in (2.5, 6.5, 7.2))

    def test_builder_resolution(self):
        assert C.BuilderOptions().resolve(1.5) == "lowp"
        assert C.BuilderOptions().resolve(2.5) == "highp"
        with pytest.raises(ValueError):
            C.BuilderOptions().resolve(4.0)


@pytest.fixture(scope="module")
def series():
    return C.gap_series(symmetric_interval(0.3), 4, 2.5, 2.0, alpha=1)


class TestGapSeries:
    def test_single_block(self):
        gs = C.gap_series(symmetric_interval(0.3), 1, 2.5, 2.0, alpha=1)
        (b,) = gs.blocks
        assert gs.assembled == modulate(b.f, b.m)
        assert np.array_equal(gs.assembled.freqs, b.f.freqs + b.m)

    def test_spectra_disjoint_and_gapped(self, series):
        spectra = series.block_spectra()
        for k, s in enumerate(spectra, start=1):
            if k > 1:
                assert s[0] > spectra[k - 2][-1]
            assert series.block_gaps()[k - 1] >= k
        assert series.assembled.freqs[0] >= 0

    def test_sets(self, series):
        for k, b in enumerate(series.blocks, start=1):
            assert b.E.measure < 2.0 ** (-series.alpha * k)
            assert C.contains_set(series.target, b.E)
            for other in series.blocks[:k - 1]:
                assert all(hi <= lo2 or hi2 <= lo for lo, hi in b.E.intervals for lo2, hi2 in other.E.intervals)

    def test_normalization(self, series):
        for k, b in enumerate(series.blocks, start=1):
            r = lp_integral(b.f, series.p)
            lo, hi = r.norm_interval()
            assert lo <= 2 ** (k / 2) <= hi or abs(r.norm - 2 ** (k / 2)) <= 1e-9

    def test_positive_definite(self, series):
        assert classify(series.assembled).is_positive_definite
        for b in series.blocks:
            assert classify(b.f).is_positive_definite

    def test_bump_lands_on_block_set(self, series):
        # one of the d translated bumps of the dilated concentrator sits on E_k
        for b in series.blocks:
            inside, total = lp_integrals(b.f, [(series.p, b.E), (series.p, TORUS)])
            assert inside.value > 0.01 * total.value

    def test_default_alpha_rejected_at_desk_scale(self):
        with pytest.raises(ValueError, match="smaller alpha"):
            C.gap_series(symmetric_interval(0.3), 6, 2.5, 2.0)

    @pytest.mark.parametrize("kw", [dict(K=0), dict(q=3.0), dict(p=4.0, q=2.0), dict(alpha=0)])
    def test_bad_arguments(self, kw):
        args = dict(target_E=symmetric_interval(0.3), K=2, p=2.5, q=2.0, alpha=1) | kw
        with pytest.raises(ValueError):
            C.gap_series(**args)

    def test_lowp_builder(self):
        gs = C.gap_series(symmetric_interval(0.3), 2, 1.5, 1.2, alpha=1,
                          builder=C.BuilderOptions(n=64))
        assert classify(gs.assembled).is_positive_definite
        assert gs.block_gaps()[1] >= 2

    def test_complement_fraction_reported(self, series):
        b = series.blocks[0]
        out, tot = lp_integrals(b.f, [(series.p, complement(b.E)), (series.p, TORUS)])
        assert 0 < out.value < tot.value
