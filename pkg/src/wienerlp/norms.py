"""L^p integrals of trigonometric polynomials over symmetric torus sets.

Integrals use the midpoint rule on the uniform grid t_j = j/M (cells of width
h = 1/M centred on the samples).  Every result carries a sound error bound
built cell by cell from samples of f, f' and f'' plus the coefficient bounds
D_r = (2 pi)^r sum |h|^r |a_h| on the next derivative:

* on each cell |f|, |f'|, |f''| are bounded by their sample plus D h/2 slack;
* the midpoint error is at most h^3/24 sup|phi''| for phi = |f|^p whenever
  phi is C^2 on the cell (p >= 2, or |f| provably nonzero there), and
  otherwise h^2/4 sup|phi'| (p >= 1) or h (sup|f'| h/2)^p (p < 1);
  the smaller of the applicable estimates is used;
* one full cell of sup |f|^p for every boundary point of E.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.fft import next_fast_len

from .spectrum import TrigPoly, multiply
from .torus import TORUS, SymmetricSet, grid_points

TINY = 1e-300


@dataclass(frozen=True)
class QuadratureOptions:
    oversample: int = 16
    summation: str = "pairwise"
    max_chunk: int = 2**20

    def __post_init__(self):
        if self.oversample < 1:
            raise ValueError("oversample must be >= 1")
        if self.summation != "pairwise":
            raise ValueError("only pairwise summation is supported")


DEFAULT_OPTIONS = QuadratureOptions()


@dataclass(frozen=True)
class NormResult:
    value: float
    error_bound: float
    grid_size: int
    p: float

    @property
    def norm(self) -> float:
        return self.value ** (1.0 / self.p)

    def norm_interval(self) -> tuple[float, float]:
        lo = max(self.value - self.error_bound, 0.0) ** (1.0 / self.p)
        hi = (self.value + self.error_bound) ** (1.0 / self.p)
        return lo, hi

    def to_dict(self) -> dict:
        return {"value": self.value, "error_bound": self.error_bound,
                "grid_size": self.grid_size, "p": self.p}


@dataclass(frozen=True)
class ConcentrationRatio:
    value: float
    error_bound: float
    inside: NormResult
    total: NormResult


def grid_plan(degree: int, opts: QuadratureOptions = DEFAULT_OPTIONS) -> tuple[int, int, int]:
    """Return ``(M, B, C)`` with ``M = B*C`` samples, synthesized in C chunks of B.

    M is ``oversample * (2*degree + 1)`` rounded up to an FFT-friendly size.
    Each chunk is itself alias-free (``B >= 2*degree + 1``).
    """
    floor = 2 * degree + 1
    need = opts.oversample * floor
    if need <= opts.max_chunk:
        B = next_fast_len(need)
        return B, B, 1
    B = next_fast_len(max(floor, opts.max_chunk))
    C = -(-need // B)
    return B * C, B, C


def _chunk_samples(freqs: np.ndarray, coef_sets: Sequence[np.ndarray], M: int, B: int, C: int):
    """Yield ``(j, [samples, ...])`` for the polyphase chunks ``j = c + C*b``."""
    fm = freqs % M
    slots = freqs % B
    b = np.arange(B, dtype=np.int64)
    for c in range(C):
        phase = None if c == 0 else np.exp(2j * np.pi * ((fm * c) % M) / M)
        out = []
        for coefs in coef_sets:
            buf = np.zeros(B, dtype=np.complex128)
            buf[slots] = coefs if phase is None else coefs * phase
            out.append(np.fft.ifft(buf, norm="forward"))
        yield c + C * b, out


def _cell_errors(absf, abs1, abs2, D3, h, p):
    """Per-cell midpoint error bounds for phi = |f|^p from local derivative data."""
    d2 = abs2 + D3 * h / 2              # sup |f''| on the cell
    d1 = abs1 + d2 * h / 2              # sup |f'|
    hi = absf + d1 * h / 2              # sup |f|
    lo = absf - d1 * h / 2              # inf |f| (when positive)
    if p >= 1:
        first = p * np.power(hi, p - 1.0) * d1 * h * h / 4
    else:
        first = h * np.power(d1 * h / 2, p)
    # |phi''| <= (p|p-2| + p)|f|^(p-2)|f'|^2 + p|f|^(p-1)|f''|
    if p >= 2:
        low_pow = np.power(hi, p - 2.0)
        smooth = np.ones(absf.shape, bool)
    else:
        smooth = lo > 0
        low_pow = np.where(smooth, np.power(np.where(smooth, lo, 1.0), p - 2.0), np.inf)
    if p >= 1:
        mid_pow = np.power(hi, p - 1.0)
    else:
        mid_pow = np.where(smooth, np.power(np.where(smooth, lo, 1.0), p - 1.0), np.inf)
    second = ((p * abs(p - 2) + p) * low_pow * d1 * d1 + p * mid_pow * d2) * h**3 / 24
    return np.where(smooth, np.minimum(first, second), first), hi


def _power(a2: np.ndarray, p: float) -> np.ndarray:
    # |f|^p from |f|^2; samples with |f|^2 below TINY contribute 0
    out = np.zeros_like(a2)
    big = a2 > TINY
    out[big] = np.power(a2[big], 0.5 * p)
    return out


def lp_integrals(f: TrigPoly, requests: Sequence[tuple[float, SymmetricSet]],
                 opts: QuadratureOptions | None = None) -> list[NormResult]:
    """Compute several ``integral_E |f|^p`` from one pass over a shared grid."""
    opts = opts or DEFAULT_OPTIONS
    for p, _ in requests:
        if not p > 0:
            raise ValueError(f"exponent must be positive, got {p}")
    M, B, C = grid_plan(f.degree, opts)
    if f.is_zero:
        return [NormResult(0.0, 0.0, M, float(p)) for p, _ in requests]
    h = 1.0 / M
    w = 2 * np.pi * f.freqs.astype(np.float64)
    D3 = float(np.sum(np.abs(w) ** 3 * np.abs(f.coefs)))
    coef_sets = [f.coefs, 1j * w * f.coefs, -(w * w) * f.coefs]

    sets = list({id(E): E for _, E in requests}.values())
    edge_cells = {}
    for E in sets:
        js = sorted({int(round(x * M)) % M for x in E.endpoints()})
        edge_cells[id(E)] = np.array(js, dtype=np.int64)

    n = len(requests)
    sums = [[] for _ in range(n)]
    errs = [[] for _ in range(n)]
    edge_err = [0.0] * n
    for j, (v, v1, v2) in _chunk_samples(f.freqs, coef_sets, M, B, C):
        a2 = v.real * v.real + v.imag * v.imag
        absf = np.sqrt(a2)
        t = grid_points(M, j)
        masks = {id(E): (np.ones(B, bool) if E.is_torus else E.contains(t)) for E in sets}
        phis, cell = {}, {}
        c = int(j[0])
        for i, (p, E) in enumerate(requests):
            if p not in phis:
                phis[p] = _power(a2, p)
                cell[p] = _cell_errors(absf, np.abs(v1), np.abs(v2), D3, h, p)
            mask = masks[id(E)]
            err, sup = cell[p]
            sums[i].append(np.sum(phis[p][mask]))
            errs[i].append(np.sum(err[mask]))
            cells = edge_cells[id(E)]
            cells = cells[cells % C == c]
            if cells.size:
                b = (cells - c) // C
                edge_err[i] += float(np.sum(np.power(sup[b], p))) * h

    out = []
    rounding = 4 * np.finfo(float).eps * max(math.log2(M), 1.0)
    for i, (p, _) in enumerate(requests):
        value = float(np.sum(np.array(sums[i]))) * h
        err = float(np.sum(np.array(errs[i]))) + edge_err[i] + rounding * value
        out.append(NormResult(value, err, M, float(p)))
    return out


def lp_integral(f: TrigPoly, p: float, E: SymmetricSet = TORUS,
                opts: QuadratureOptions | None = None) -> NormResult:
    """``integral_E |f|^p`` with respect to the normalized measure on T."""
    return lp_integrals(f, [(p, E)], opts)[0]


def _ratio_bound(num: NormResult, den: NormResult, power: float = 1.0) -> tuple[float, float]:
    """Value and error bound of ``num / den**power``."""
    value = num.value / den.value**power
    lo_den = den.value - den.error_bound
    if lo_den <= 0:
        return value, math.inf
    hi = (num.value + num.error_bound) / lo_den**power
    lo = max(num.value - num.error_bound, 0.0) / (den.value + den.error_bound) ** power
    return value, max(hi - value, value - lo)


def concentration_ratio(f: TrigPoly, p: float, E: SymmetricSet,
                        opts: QuadratureOptions | None = None) -> ConcentrationRatio:
    """Share of the L^p mass of f carried by E, from one common grid."""
    if f.is_zero:
        raise ValueError("concentration ratio of the zero polynomial is undefined")
    inside, total = lp_integrals(f, [(p, E), (p, TORUS)], opts)
    if total.value <= 0:
        raise ZeroDivisionError("total L^p integral vanished on the grid")
    value, err = _ratio_bound(inside, total)
    return ConcentrationRatio(value, err, inside, total)


def even_exact(f: TrigPoly, k: int, cap: int = 2**26) -> float:
    """Exact ``integral_T |f|^(2k)`` as the squared l^2 norm of the coefficients of f^k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if f.support_size**k > cap:
        raise OverflowError(f"support size {f.support_size}^{k} exceeds cap {cap}")
    g = f
    for _ in range(k - 1):
        g = multiply(g, f)
    c = g.coefs
    return float(np.sum(c.real * c.real + c.imag * c.imag))


def poisson_regularize(f: TrigPoly, r: float) -> TrigPoly:
    """f_r: coefficient at n scaled by r^|n|."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    weights = np.power(float(r), np.abs(f.freqs).astype(np.float64))
    return TrigPoly._from_sorted(f.freqs, f.coefs * weights)


def hq_estimate(f: TrigPoly, q: float, r_grid: Sequence[float],
                opts: QuadratureOptions | None = None) -> float:
    """max over r in r_grid of ``integral_T |f_r|^q``, a finite stand-in for the H^q quasi-norm."""
    if len(r_grid) == 0:
        raise ValueError("r_grid must be nonempty")
    return max(lp_integral(poisson_regularize(f, r), q, TORUS, opts).value for r in r_grid)
