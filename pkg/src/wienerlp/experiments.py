"""Seeded desk-scale experiments, each producing an :class:`ExperimentReport`.

Reports are deterministic: the same experiment, parameters and seed give a
byte-identical JSON document (wall-clock runtime is kept out of the canonical
form).
"""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import constructions as C
from .norms import (QuadratureOptions, concentration_ratio, hq_estimate, lp_integral,
                    lp_integrals)
from .serialize import dumps
from .spectrum import TAU_PD, TrigPoly, classify, make_poly, min_coefficient, modulate
from .torus import (TORUS, SymmetricSet, complement, diophantine_set, make_set,
                    symmetric_interval)


@dataclass(frozen=True)
class Quantity:
    label: str
    value: float
    error_bound: float = 0.0


@dataclass(frozen=True)
class Verdict:
    claim: str
    passed: bool
    refs: tuple[str, ...]


@dataclass
class ExperimentReport:
    experiment_id: str
    parameters: dict
    seed: int
    quantities: list[Quantity] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)
    runtime_ms: int = field(default=0, compare=False)

    def add(self, label: str, value, error_bound: float = 0.0) -> str:
        if any(q.label == label for q in self.quantities):
            raise ValueError(f"duplicate quantity {label!r}")
        self.quantities.append(Quantity(label, _num(value), float(error_bound)))
        return label

    def check(self, claim: str, passed: bool, *refs: str) -> bool:
        known = {q.label for q in self.quantities}
        missing = [r for r in refs if r not in known]
        if missing or not refs:
            raise ValueError(f"verdict {claim!r} references unknown quantities {missing}")
        self.verdicts.append(Verdict(claim, bool(passed), tuple(refs)))
        return bool(passed)

    def quantity(self, label: str) -> Quantity:
        for q in self.quantities:
            if q.label == label:
                return q
        raise KeyError(label)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {
            "experiment_id": self.experiment_id,
            "parameters": self.parameters,
            "seed": self.seed,
            "quantities": [{"label": q.label, "value": q.value, "error_bound": q.error_bound}
                           for q in self.quantities],
            "verdicts": [{"claim": v.claim, "pass": v.passed, "refs": list(v.refs)}
                         for v in self.verdicts],
            "all_pass": self.passed,
        }
        if include_runtime:
            d["runtime_ms"] = self.runtime_ms
        return d

    def to_json(self, include_runtime: bool = False) -> str:
        return dumps(self.to_dict(include_runtime))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "value"])
            for q in self.quantities:
                w.writerow([q.label, format(q.value, ".17g") if isinstance(q.value, float) else q.value])


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return int(bool(x))
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(x)


class _Timer:
    def __init__(self, report: ExperimentReport):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.runtime_ms = int(round(1000 * (time.perf_counter() - self.t0)))
        return False


def _opts(oversample: int) -> QuadratureOptions:
    return QuadratureOptions(oversample=int(oversample))


def _map(fn, items, threads: int | None):
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- Shapiro inequality and its sharpness -----------------------------------------------

def random_pd_poly(rng: np.random.Generator, degree_cap: int) -> TrigPoly:
    """Uniform [0,1] coefficients on a random support inside 0..degree_cap."""
    size = int(rng.integers(1, degree_cap + 2))
    support = np.sort(rng.choice(degree_cap + 1, size=size, replace=False))
    coefs = rng.random(size)
    return make_poly(zip(support.tolist(), coefs.tolist()))


def verify_shapiro(p: int = 2, a: float = 0.25, corpus_size: int = 500, degree_cap: int = 64,
                   seed: int = 0, oversample: int = 16, k: int = 4,
                   sweep: Sequence[int] = (256, 512, 1024, 2048, 4096),
                   sharp_a: float | None = None, threads: int | None = None) -> ExperimentReport:
    """Check (1/2a) int_{-a}^{a} |f|^p >= (1/2) int_T |f|^p on a random positive definite
    corpus, then follow the idempotent D_n * mu_k whose window share tends to 1/k."""
    if p not in (2, 4, 6):
        raise ValueError("p must be one of 2, 4, 6")
    if not 0 < a < 0.5:
        raise ValueError("a must lie in (0, 1/2)")
    if sharp_a is None:
        sharp_a = a if a < 1.0 / k else 0.8 / k
    if not 0 < sharp_a < 1.0 / k:
        raise ValueError("sharpness window must satisfy a < 1/k")
    opts = _opts(oversample)
    params = {"p": p, "a": a, "corpus_size": corpus_size, "degree_cap": degree_cap,
              "oversample": oversample, "k": k, "sweep": list(sweep), "sharp_a": sharp_a}
    report = ExperimentReport("verify-shapiro", params, seed)
    with _Timer(report):
        window = symmetric_interval(a)

        def one(i):
            f = random_pd_poly(np.random.default_rng([seed, i]), degree_cap)
            inside, total = lp_integrals(f, [(p, window), (p, TORUS)], opts)
            lhs, rhs = inside.value / (2 * a), total.value / 2
            err = inside.error_bound / (2 * a) + total.error_bound / 2
            return lhs, rhs, err

        rows = _map(one, range(corpus_size), threads)
        beyond = sum(lhs < rhs - err for lhs, rhs, err in rows)
        raw = sum(lhs < rhs for lhs, rhs, _ in rows)
        worst = min(range(len(rows)), key=lambda i: (rows[i][0] - rows[i][1]) / rows[i][1])
        lhs, rhs, err = rows[worst]
        report.add("corpus_violations_beyond_bounds", beyond)
        report.add("corpus_raw_violations", raw)
        report.add("worst_sample_index", worst)
        report.add("worst_window_mean", lhs, err)
        report.add("worst_half_total", rhs)
        report.add("worst_relative_margin", (lhs - rhs) / rhs, err / rhs)
        report.check(f"(1/2a) int_(-a,a) |f|^{p} >= (1/2) int_T |f|^{p} on all {corpus_size} samples",
                     beyond == 0, "corpus_violations_beyond_bounds", "worst_relative_margin")

        W = symmetric_interval(sharp_a)
        dists = []
        labels = []
        for n in sweep:
            r = concentration_ratio(C.shapiro_counterexample(n, k), p, W, opts)
            labels.append(report.add(f"sharpness_ratio_n{n}", r.value, r.error_bound))
            dists.append(abs(r.value - 1.0 / k))
        report.add("sharpness_target", 1.0 / k)
        report.check(f"share of D_n*mu_{k} on (-{sharp_a},{sharp_a}) within 0.02 of 1/{k} at n={sweep[-1]}",
                     dists[-1] <= 0.02, labels[-1], "sharpness_target")
        report.check("distance to 1/k is nonincreasing along the sweep",
                     all(x >= y for x, y in zip(dists, dists[1:])), *labels)
    return report


def demo_diophantine(L: int = 4, l_max: int = 32, exponent: int = 3, n: int = 4096, l: int = 5,
                     p: float = 2, oversample: int = 16, tolerance: float = 0.03) -> ExperimentReport:
    """Share of D_n * mu_l on the torus minus small arcs around rationals of denominator in (L, l_max]."""
    opts = _opts(oversample)
    params = {"L": L, "l_max": l_max, "exponent": exponent, "n": n, "l": l, "p": float(p),
              "oversample": oversample, "tolerance": tolerance}
    report = ExperimentReport("demo-diophantine", params, 0)
    with _Timer(report):
        E = diophantine_set(L, l_max, exponent)
        report.add("set_measure", E.measure)
        report.add("set_interval_count", len(E.intervals))
        report.add("measure_lower_bound", 1 - 4.0 / L)
        report.check("measure(E) >= 1 - 4/L", E.measure >= 1 - 4.0 / L, "set_measure", "measure_lower_bound")
        r = concentration_ratio(C.shapiro_counterexample(n, l), p, E, opts)
        report.add("ratio", r.value, r.error_bound)
        report.add("target", 1.0 / l)
        report.check(f"share on E within {tolerance} of 1/{l}", abs(r.value - 1.0 / l) <= tolerance,
                     "ratio", "target")
    return report


# -- majorant pair --------------------------------------------------------------------

def demo_majorant(j: int = 3, p: float = 3, oversample: int = 2048) -> ExperimentReport:
    """||G0||_p < ||g0||_p for the Mockenhaupt-Schlag pair, with margin against the quadrature bounds."""
    opts = _opts(oversample)
    report = ExperimentReport("demo-majorant", {"j": j, "p": float(p), "oversample": oversample}, 0)
    with _Timer(report):
        g0, G0 = C.ms_pair(j)
        Ig = lp_integral(g0, p, TORUS, opts)
        IG = lp_integral(G0, p, TORUS, opts)
        report.add("int_abs_g0_p", Ig.value, Ig.error_bound)
        report.add("int_abs_G0_p", IG.value, IG.error_bound)
        report.add("norm_g0", Ig.norm)
        report.add("norm_G0", IG.norm)
        margin = Ig.value - IG.value
        report.add("margin", margin, Ig.error_bound + IG.error_bound)
        report.add("combined_error_x10", 10 * (Ig.error_bound + IG.error_bound))
        report.add("grid_size", Ig.grid_size)
        report.check("||G0||_p < ||g0||_p with margin > 10x combined error bounds",
                     margin > 10 * (Ig.error_bound + IG.error_bound), "margin", "combined_error_x10")
        spec_g, spec_G = classify(g0), classify(G0)
        report.add("G0_idempotent", spec_G.is_idempotent)
        report.add("same_moduli", bool(np.array_equal(np.abs(g0.coefs), np.abs(G0.coefs))
                                       and np.array_equal(g0.freqs, G0.freqs)))
        report.check("G0 is an idempotent majorant of g0",
                     spec_G.is_idempotent and not spec_g.is_positive_definite
                     and report.quantity("same_moduli").value == 1,
                     "G0_idempotent", "same_moduli")
    return report


# -- Khintchine sign search ---------------------------------------------------------------

def demo_signs(n: int = 256, p: float = 1, q: float = 2, eps: float = 0.5, budget: int = 64,
               seed: int = 0, oversample: int = 16) -> ExperimentReport:
    opts = _opts(oversample)
    params = {"n": n, "p": float(p), "q": float(q), "eps": float(eps), "budget": budget, "oversample": oversample}
    report = ExperimentReport("demo-signs", params, seed)
    with _Timer(report):
        try:
            sv = C.sign_search(n, p, q, eps, budget, seed, opts)
            ok = True
        except C.SignSearchError as exc:
            sv, ok = exc.best, False
        g = sv.poly()
        Dp = lp_integral(C.dirichlet(n + 1), p, TORUS, opts)
        gq = lp_integral(g, q, TORUS, opts)
        report.add("norm_dirichlet_p", Dp.norm)
        report.add("norm_signs_q", gq.norm)
        report.add("ratio", sv.ratio)
        report.add("eps", eps)
        report.add("trials_used", sv.trials_used if ok else budget)
        report.add("best_trial", sv.trials_used)
        report.add("signs_checksum", int(sum((i + 1) * s for i, s in enumerate(sv.signs))))
        report.check(f"sign vector with ratio <= eps found within {budget} trials", ok and sv.ratio <= eps,
                     "ratio", "eps", "trials_used")
    return report


# -- strong concentration --------------------------------------------------------------

def _strong_sides(f: TrigPoly, p: float, q: float, E: SymmetricSet, opts):
    out, tot_q = lp_integrals(f, [(p, complement(E)), (q, TORUS)], opts)
    ratio = out.value / tot_q.value ** (p / q)
    lo_den = tot_q.value - tot_q.error_bound
    hi = (out.value + out.error_bound) / lo_den ** (p / q) if lo_den > 0 else math.inf
    return out, tot_q, ratio, hi - ratio


def demo_strong_concentration(mode: str = "lowp", E: SymmetricSet | None = None, p: float = 1.5,
                              q: float = 1.2, eps: float = 0.1, n_values: Sequence[int] = (1024, 4096, 16384),
                              N: int | None = None, a: float | None = None, sign_eps: float = 1.0,
                              budget: int = 64, j: int = 3, K_values: Sequence[int] = (0, 1, 2),
                              growth: int = 8, tail_budget: float = 0.05, seed: int = 0,
                              oversample: int = 16) -> ExperimentReport:
    """int_{cE} |f|^p <= eps (int_T |f|^q)^{p/q} for the three-term concentrator.

    lowp walks ``n_values`` and stops at the first n meeting eps; highp sweeps
    the Riesz depth over ``K_values``.
    """
    if E is None:
        E = make_set([(0.3, 0.4), (-0.4, -0.3)])
    if mode == "lowp" and not 0 < q <= p < 2:
        raise ValueError("lowp needs 0 < q <= p < 2")
    if mode == "highp" and (p <= 2 or (float(p).is_integer() and int(p) % 2 == 0)):
        raise ValueError("highp needs p > 2, not an even integer")
    if mode not in ("lowp", "highp"):
        raise ValueError("mode must be lowp or highp")
    opts = _opts(oversample)
    N, a = C.fit_triangle(E, N) if a is None else (N, a)
    I = C.target_interval(N, a)
    params = {"mode": mode, "set": str(E), "p": float(p), "q": float(q), "eps": float(eps), "N": N, "a": a,
              "tail_budget": tail_budget, "oversample": oversample}
    if mode == "lowp":
        params.update({"n_values": list(n_values), "sign_eps": sign_eps, "budget": budget})
    else:
        params.update({"j": j, "K_values": list(K_values), "growth": growth})
    report = ExperimentReport("demo-conc", params, seed)
    with _Timer(report):
        report.add("I_inside_E", C.contains_set(E, I))
        report.check("I u (-I) is contained in E", C.contains_set(E, I), "I_inside_E")
        ratio_labels, ratios, min_coefs, pd_flags = [], [], [], []
        sweep = n_values if mode == "lowp" else K_values
        for x in sweep:
            if mode == "lowp":
                sv = C.sign_search(x, p, q, sign_eps, budget, seed, opts)
                report.add(f"sign_ratio_n{x}", sv.ratio)
                f = C.lowp_concentrator(C.ConcentratorParams(x, N, a, p, q, eps), sv, tail_budget)
                tag = f"n{x}"
            else:
                f = C.highp_concentrator(N, a, j, x, tail_budget, growth)
                tag = f"K{x}"
            out, tot_q, ratio, rerr = _strong_sides(f, p, q, E, opts)
            spec = classify(f)
            report.add(f"lhs_{tag}", out.value, out.error_bound)
            report.add(f"int_q_{tag}", tot_q.value, tot_q.error_bound)
            ratio_labels.append(report.add(f"ratio_{tag}", ratio, rerr))
            report.add(f"min_coefficient_{tag}", min_coefficient(f))
            report.add(f"positive_definite_{tag}", spec.is_positive_definite)
            report.add(f"degree_{tag}", spec.degree)
            report.add(f"min_gap_{tag}", spec.min_gap)
            ratios.append(ratio)
            min_coefs.append(f"min_coefficient_{tag}")
            pd_flags.append(min_coefficient(f) >= -TAU_PD and spec.is_positive_definite)
            if mode == "lowp" and ratio <= eps:
                break
        report.add("eps", eps)
        report.check("every assembled f is positive definite (coefficients >= -1e-12)",
                     all(pd_flags), *min_coefs)
        report.check(f"int_(cE) |f|^{p} <= eps (int_T |f|^{q})^(p/q) achieved",
                     min(ratios) <= eps, *ratio_labels, "eps")
        if mode == "highp" and len(ratios) > 1:
            report.check("ratio decreases as the Riesz depth K grows",
                         all(x > y for x, y in zip(ratios, ratios[1:])), *ratio_labels)
    return report


# -- Wiener failure: truncated gap series ------------------------------------------------

def demo_wiener_failure(p: float = 2.5, q: float = 2.0, E: SymmetricSet | None = None, K: int = 6,
                        alpha: int | None = None, seed: int = 0, oversample: int = 16,
                        builder: C.BuilderOptions | None = None,
                        r_grid: Sequence[float] = (0.9, 0.99, 1.0),
                        complement_bound: float = 2.0) -> ExperimentReport:
    """Per block: L^p norm of the whole series on E_k against 2^(k/2) - sum_j 2^(-j/2),
    L^p norm outside E, the frequency gap at block k, and H^q estimates of partial sums."""
    if E is None:
        E = symmetric_interval(0.3)
    builder = builder or C.BuilderOptions()
    opts = _opts(oversample)
    gs = C.gap_series(E, K, p, q, alpha, builder, seed, opts)
    params = {"p": float(p), "q": float(q), "set": str(E), "K": K, "alpha": gs.alpha, "oversample": oversample,
              "builder": builder.resolve(p), "n": builder.n, "sign_eps": builder.sign_eps,
              "j": builder.j if builder.j is not None else C.default_j(p), "riesz_K": builder.riesz_K,
              "tail_budget": builder.tail_budget, "r_grid": list(r_grid),
              "complement_bound": complement_bound}
    report = ExperimentReport("demo-wiener", params, seed)
    with _Timer(report):
        slack = sum(2.0 ** (-jj / 2) for jj in range(1, K + 1))
        cE = complement(E)
        requests = [(p, b.E) for b in gs.blocks] + [(p, cE)]
        results = lp_integrals(gs.assembled, requests, opts)
        report.add("assembled_degree", gs.assembled.degree)
        report.add("assembled_support", gs.assembled.support_size)
        report.add("slack_sum", slack)
        gaps = gs.block_gaps()
        partial = None
        for k, (blk, res) in enumerate(zip(gs.blocks, results[:-1]), start=1):
            lo, hi = res.norm_interval()
            report.add(f"E{k}_measure", blk.E.measure)
            report.add(f"E{k}_measure_cap", 2.0 ** (-gs.alpha * k))
            norm_lbl = report.add(f"norm_on_E{k}", res.norm, hi - res.norm)
            thr_lbl = report.add(f"threshold_{k}", 2.0 ** (k / 2) - slack)
            report.check(f"||f||_(L^p(E_{k})) >= 2^({k}/2) - sum_j 2^(-j/2) - error",
                         hi >= 2.0 ** (k / 2) - slack, norm_lbl, thr_lbl)
            gap_lbl = report.add(f"min_gap_block{k}", gaps[k - 1] if gaps[k - 1] != math.inf else 0)
            report.add(f"gap_target_{k}", k)
            report.check(f"frequency gaps at block {k} are >= {k}",
                         gaps[k - 1] >= k, gap_lbl, f"gap_target_{k}")
            report.add(f"E{k}_disjoint_from_earlier",
                       all(_disjoint(blk.E, other.E) for other in gs.blocks[:k - 1]))
            out_k, tot_k = lp_integrals(blk.f, [(p, complement(blk.E)), (p, TORUS)], opts)
            report.add(f"block{k}_complement_fraction", out_k.value / tot_k.value)
            report.add(f"block{k}_first_bound", 2.0 ** (-k * p))
            report.add(f"block{k}_norm_p", tot_k.norm)
            report.add(f"block{k}_dilation", blk.dilation)
            partial = modulate(blk.f, blk.m) if partial is None else partial + modulate(blk.f, blk.m)
            report.add(f"hq_partial_{k}", hq_estimate(partial, q, r_grid, opts))
        out = results[-1]
        lo, hi = out.norm_interval()
        c_lbl = report.add("norm_outside_E", out.norm, out.norm - lo)
        report.add("complement_bound", complement_bound)
        report.check(f"||f||_(L^p(cE)) <= {complement_bound}", lo <= complement_bound,
                     c_lbl, "complement_bound")
        report.check("E_k are pairwise disjoint subsets of E",
                     all(report.quantity(f"E{k}_disjoint_from_earlier").value == 1 for k in range(1, K + 1)),
                     *[f"E{k}_disjoint_from_earlier" for k in range(1, K + 1)])
        report.add("positive_definite", classify(gs.assembled).is_positive_definite)
        report.add("negative_frequencies", int(np.count_nonzero(gs.assembled.freqs < 0)))
        report.check("assembled series is positive definite with nonnegative spectrum",
                     classify(gs.assembled).is_positive_definite and gs.assembled.freqs[0] >= 0,
                     "positive_definite", "negative_frequencies")
    return report


def _disjoint(A: SymmetricSet, B: SymmetricSet) -> bool:
    return all(ahi <= blo or bhi <= alo for alo, ahi in A.intervals for blo, bhi in B.intervals)
