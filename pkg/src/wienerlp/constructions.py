"""Counterexample polynomials: idempotent sharpness examples, triangle-modulated
concentrators, majorant pairs with Riesz-product amplification, and truncated
gap series whose L^p mass escapes every fixed subset of a symmetric set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import polygamma

from .norms import DEFAULT_OPTIONS, QuadratureOptions, lp_integral
from .spectrum import (MAX_FREQ, TAU_PD, TrigPoly, dilate, dirichlet, filter_multiples,
                       make_poly, multiply, scale)
from .torus import TORUS, SymmetricSet, interval_pair


class AssemblyError(RuntimeError):
    """A constructor produced a polynomial that is not positive definite."""


class SignSearchError(RuntimeError):
    """No sign vector met the target within the trial budget."""

    def __init__(self, message: str, best: "SignVector"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class SignVector:
    signs: tuple[int, ...]
    seed: int
    trials_used: int
    ratio: float  # ||D_{n+1}||_p / ||sum eta_k e_k||_q for these signs

    def __post_init__(self):
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")

    def poly(self) -> TrigPoly:
        return TrigPoly._from_sorted(np.arange(len(self.signs)), np.array(self.signs, float))


@dataclass(frozen=True)
class ConcentratorParams:
    n: int
    N: int
    a: float
    p: float
    q: float
    eps: float

    def __post_init__(self):
        if self.n < 1 or self.N < 1:
            raise ValueError("n and N must be >= 1")
        if not 0 < self.q <= self.p:
            raise ValueError("need 0 < q <= p")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


@dataclass(frozen=True)
class Block:
    m: int                  # modulation frequency m_k
    f: TrigPoly             # normalized block before modulation
    E: SymmetricSet         # E_k
    dilation: int           # pre-dilation d_k used to force gaps >= k
    N: int                  # triangle scale of the undilated concentrator
    a: float                # centre of the undilated target interval
    scale: float            # normalization factor applied to the raw concentrator


@dataclass(frozen=True)
class GapSeries:
    blocks: tuple[Block, ...]
    assembled: TrigPoly
    K: int
    alpha: int
    p: float
    q: float
    target: SymmetricSet

    def block_spectra(self) -> list[np.ndarray]:
        return [b.f.freqs + np.int64(b.m) for b in self.blocks]

    def block_gaps(self) -> list[int]:
        """Smallest frequency gap seen at block k (inside it or from block k-1 to it)."""
        gaps = []
        spectra = self.block_spectra()
        for k, s in enumerate(spectra):
            g = int(np.min(np.diff(s))) if s.size > 1 else math.inf
            if k > 0:
                g = min(g, int(s[0] - spectra[k - 1][-1]))
            gaps.append(g)
        return gaps


# -- Shapiro sharpness --------------------------------------------------------

def shapiro_counterexample(n: int, k: int) -> TrigPoly:
    """D_n * mu_k: the frequencies of D_n divisible by k; an idempotent with period 1/k."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise ValueError("need n >= k")
    return filter_multiples(dirichlet(n), k)


# -- triangle --------------------------------------------------------------------

def _triangle_tail(N: int, M: int) -> float:
    """Sum of the triangle's Fourier coefficients over |m| > M (both sides)."""
    w = 2 * N
    r = np.arange(1, w + 1, dtype=np.float64)
    s2 = np.sin(np.pi * ((M + r) % w) / w) ** 2
    # sum_{j>=0} 1/(M + r + w j)^2 = psi_1((M + r)/w) / w^2
    tail = np.sum(s2 * polygamma(1, (M + r) / w)) / (w * w)
    return float(2 * tail * w / np.pi**2)


def triangle_cutoff(N: int, tail_budget: float) -> int:
    """Smallest M whose dropped tail is at most ``tail_budget / (2N)``."""
    if not 0 < tail_budget < 1:
        raise ValueError("tail_budget must lie in (0, 1)")
    target = tail_budget / (2 * N)
    hi = int(math.ceil(8 * N * N / (np.pi**2 * tail_budget))) + 1
    while _triangle_tail(N, hi) > target:
        hi *= 2
    lo = 0
    if _triangle_tail(N, 0) <= target:
        return 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _triangle_tail(N, mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def triangle_coefficients(N: int, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies -M..M and coefficients of the triangle (1 - 2N|t|)_+."""
    m = np.arange(-M, M + 1, dtype=np.int64)
    w = 2 * N
    s = np.sin(np.pi * (m % w) / w)
    c = np.empty(m.size)
    nz = m != 0
    c[nz] = w * (s[nz] / (np.pi * m[nz])) ** 2
    c[~nz] = 1.0 / w
    return m, c


def triangle_poly(N: int, tail_budget: float = 0.05) -> TrigPoly:
    """Truncated Fourier series of the triangle based on (-1/2N, 1/2N); positive definite."""
    if N < 1:
        raise ValueError("N must be >= 1")
    M = triangle_cutoff(N, tail_budget)
    m, c = triangle_coefficients(N, M)
    return TrigPoly._from_sorted(m, c)


# -- three-term assembly -----------------------------------------------------------

def three_term_coefficients(g: TrigPoly, G: TrigPoly, N: int, a: float,
                            tail_budget: float = 0.05) -> TrigPoly:
    """Delta(t-a) g(2Nt) + Delta(t+a) g(2Nt) + 2 Delta(t) G(2Nt).

    The +-a shifts are paired before materializing: the coefficient at h is
    ``sum_k 2 Delta^(m) (G^_k + g^_k cos(2 pi a m))`` with ``m = h - 2Nk``,
    which is >= 0 whenever ``|g^_k| <= G^_k`` with real coefficients.
    """
    if g.is_zero or G.is_zero:
        raise ValueError("both polynomials must be nonzero")
    if np.any(np.abs(g.coefs.imag) > 0) or np.any(np.abs(G.coefs.imag) > 0):
        raise ValueError("three-term assembly needs real coefficients")
    lo = int(min(g.freqs[0], G.freqs[0]))
    hi = int(max(g.freqs[-1], G.freqs[-1]))
    span = hi - lo + 1
    gd = np.zeros(span)
    Gd = np.zeros(span)
    gd[g.freqs - lo] = g.coefs.real
    Gd[G.freqs - lo] = G.coefs.real
    if np.any(np.abs(gd) > Gd + TAU_PD):
        raise ValueError("majorant condition |g^_k| <= G^_k fails")

    Mcut = triangle_cutoff(N, tail_budget)
    w = 2 * N
    if w * max(abs(lo), abs(hi)) + Mcut > MAX_FREQ:
        raise OverflowError("assembled frequencies exceed bound")
    m, d = triangle_coefficients(N, Mcut)
    A = 2 * d * np.cos(2 * np.pi * ((m * a) % 1.0))
    Bc = 2 * d
    # split m = w*s + r; for each residue r the sum over k is a 1-d convolution
    smin = (-Mcut) // w
    smax = Mcut // w
    nS = smax - smin + 1
    out = np.zeros((span + nS - 1, w))
    for r in range(w):
        idx = np.arange(smin, smax + 1) * w + r
        ok = (idx >= -Mcut) & (idx <= Mcut)
        Ar = np.zeros(nS)
        Br = np.zeros(nS)
        Ar[ok] = A[idx[ok] + Mcut]
        Br[ok] = Bc[idx[ok] + Mcut]
        out[:, r] = np.convolve(Gd, Br) + np.convolve(gd, Ar)
    # row u, column r  <->  frequency w*(lo + smin + u) + r
    freqs = (np.arange(out.shape[0], dtype=np.int64)[:, None] + (lo + smin)) * w + np.arange(w)
    freqs = freqs.ravel()
    coefs = out.ravel()
    keep = (freqs >= w * lo - Mcut) & (freqs <= w * hi + Mcut)
    f = TrigPoly._from_sorted(freqs[keep], coefs[keep])
    low = float(f.coefs.real.min()) if f.support_size else 0.0
    if low < -TAU_PD:
        raise AssemblyError(f"assembled polynomial has coefficient {low!r} < 0")
    return f


def three_term_reference(g: TrigPoly, G: TrigPoly, N: int, a: float, h: int,
                         tail_budget: float = 0.05) -> float:
    """Closed-form coefficient of the three-term assembly at frequency h, summed directly."""
    Mcut = triangle_cutoff(N, tail_budget)
    d = triangle_coefficients(N, Mcut)[1]
    w = 2 * N
    total = 0.0
    for k, gk in g.items():
        m = h - w * k
        if abs(m) <= Mcut:
            total += 2 * d[m + Mcut] * gk.real * math.cos(2 * math.pi * ((m * a) % 1.0))
    for k, Gk in G.items():
        m = h - w * k
        if abs(m) <= Mcut:
            total += 2 * d[m + Mcut] * Gk.real
    return total


# -- low p: Khintchine sign search ------------------------------------------------

def sign_search(n: int, p: float, q: float, eps: float, budget: int = 64, seed: int = 0,
                opts: QuadratureOptions | None = None) -> SignVector:
    """Draw uniform +-1 vectors until ``||D_{n+1}||_p <= eps ||sum eta_k e_k||_q``.

    Raises SignSearchError carrying the best vector seen if the budget runs out.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not (p > 0 and q > 0):
        raise ValueError("exponents must be positive")
    rng = np.random.default_rng(seed)
    lhs = lp_integral(dirichlet(n + 1), p, TORUS, opts).norm
    best = None
    for trial in range(1, budget + 1):
        eta = rng.integers(0, 2, size=n + 1) * 2 - 1
        g = TrigPoly._from_sorted(np.arange(n + 1), eta.astype(float))
        ratio = lhs / lp_integral(g, q, TORUS, opts).norm
        cand = SignVector(tuple(int(x) for x in eta), seed, trial, ratio)
        if best is None or ratio < best.ratio:
            best = cand
        if ratio <= eps:
            return cand
    raise SignSearchError(
        f"no sign vector reached ratio {eps} in {budget} trials (best {best.ratio:.6g}); "
        "try a larger n", best)


def lowp_concentrator(params: ConcentratorParams, eta: SignVector,
                      tail_budget: float = 0.05) -> TrigPoly:
    """Three-term concentrator with g = sum eta_k e_k and G = D_{n+1}."""
    if len(eta.signs) != params.n + 1:
        raise ValueError("sign vector length must be n + 1")
    return three_term_coefficients(eta.poly(), dirichlet(params.n + 1), params.N, params.a, tail_budget)


# -- high p: majorant pair and Riesz products ------------------------------------------

def ms_pair(j: int) -> tuple[TrigPoly, TrigPoly]:
    """(g0, G0) = ((1 + e_j)(1 - e_{j+1}), (1 + e_j)(1 + e_{j+1})) for odd j."""
    if j < 1 or j % 2 == 0:
        raise ValueError("j must be an odd positive integer")
    g0 = make_poly([(0, 1), (j, 1), (j + 1, -1), (2 * j + 1, -1)])
    G0 = make_poly([(0, 1), (j, 1), (j + 1, 1), (2 * j + 1, 1)])
    return g0, G0


def riesz_scales(j: int, K: int, growth: int = 3) -> list[int]:
    """Dilations N_1..N_K, each exceeding the degree of the partial product."""
    if growth < 2:
        raise ValueError("growth must be >= 2")
    deg = 2 * j + 1
    scales = []
    for _ in range(K):
        N = growth * deg + 1
        scales.append(N)
        deg += N * (2 * j + 1)
        if deg > MAX_FREQ:
            raise OverflowError("Riesz product degree exceeds frequency bound")
    return scales


def riesz_pair(j: int, K: int, growth: int = 3) -> tuple[TrigPoly, TrigPoly]:
    """g0(t) g0(N_1 t)...g0(N_K t) and the same product of G0; spectra of the factors are disjoint."""
    if K < 0:
        raise ValueError("K must be >= 0")
    g0, G0 = ms_pair(j)
    g, G = g0, G0
    for N in riesz_scales(j, K, growth):
        g = multiply(g, dilate(g0, N))
        G = multiply(G, dilate(G0, N))
    return g, G


def highp_concentrator(N: int, a: float, j: int, K: int, tail_budget: float = 0.05,
                       growth: int = 3) -> TrigPoly:
    """Three-term concentrator with the Riesz pair in place of (signs, Dirichlet)."""
    g, G = riesz_pair(j, K, growth)
    return three_term_coefficients(g, G, N, a, tail_budget)


# -- placement helpers --------------------------------------------------------------

def fit_triangle(E: SymmetricSet, N: int | None = None) -> tuple[int, float]:
    """Pick (N, a) so that I = (a - 1/2N, a + 1/2N) sits in the positive part of E.

    With N omitted the smallest admissible N is used.
    """
    pos = [(max(lo, 0.0), hi) for lo, hi in E.intervals if hi > 0]
    if not pos:
        raise ValueError("set has no positive part")
    lo, hi = max(pos, key=lambda iv: iv[1] - iv[0])
    if N is None:
        N = max(1, math.ceil(1.0 / (hi - lo) - 1e-12))
        while True:
            a = _centre(lo, hi, N)
            if a is not None:
                return N, a
            N += 1
    a = _centre(lo, hi, N)
    if a is None:
        raise ValueError(f"no triangle of base 1/{N} fits inside ({lo}, {hi})")
    return N, a


def _centre(lo: float, hi: float, N: int) -> float | None:
    half = 1.0 / (2 * N)
    if hi - lo < 2 * half:
        return None
    a = (lo + hi) / 2
    # the +-a triangles must clear the central one
    if a - half < half or a + half > 0.5:
        return None
    return a


def target_interval(N: int, a: float) -> SymmetricSet:
    half = 1.0 / (2 * N)
    return interval_pair(a - half, a + half)


def contains_set(E: SymmetricSet, F: SymmetricSet) -> bool:
    """Exact containment check F subset E for interval unions."""
    for lo, hi in F.intervals:
        if not any(elo <= lo and hi <= ehi for elo, ehi in E.intervals):
            return False
    return True


# -- gap series ------------------------------------------------------------------------

def default_alpha(p: float, q: float) -> int:
    """Smallest integer alpha with alpha (1 - q/p) >= q + 1."""
    if not 0 < q < p:
        raise ValueError("need 0 < q < p")
    return int(math.ceil((q + 1) / (1 - q / p) - 1e-12))


def default_j(p: float) -> int:
    """Smallest odd j > p/2."""
    j = int(math.floor(p / 2)) + 1
    return j if j % 2 else j + 1


@dataclass(frozen=True)
class BuilderOptions:
    kind: str = "auto"             # "lowp", "highp" or "auto"
    n: int = 256                   # sign polynomial length (lowp)
    sign_eps: float = 1.0          # sign_search target (lowp)
    sign_budget: int = 64
    j: int | None = None           # majorant parameter (highp)
    riesz_K: int = 0
    growth: int = 3
    tail_budget: float = 0.05
    max_degree: int = 2**24

    def resolve(self, p: float) -> str:
        if self.kind != "auto":
            return self.kind
        if p < 2:
            return "lowp"
        if float(p).is_integer() and int(p) % 2 == 0:
            raise ValueError("p must not be an even integer")
        return "highp"


def _place_block(lo: float, hi: float, k: int, d: int, alpha: int) -> tuple[int, int, float, float]:
    """Choose (N_k, N', a_k, a') for block k inside the slot (lo, hi).

    N_k is a multiple of d, the pair I_k u (-I_k) has measure 2/N_k < 2^(-alpha k),
    and the undilated concentrator at scale N' = N_k/d centred at a' = d a_k (mod 1)
    keeps its three triangles apart.
    """
    need = 2.0 ** (alpha * k - 1)          # 2/N_k < 2^-alpha k  <=>  N_k > 2^(alpha k - 1)
    Nk = max(math.floor(need) + 1, math.ceil(1.0 / (hi - lo)))
    Nk = d * (-(-Nk // d))
    for _ in range(10_000):
        if Nk > MAX_FREQ:
            break
        Np = Nk // d
        half = 1.0 / (2 * Nk)
        steps = 64
        for i in range(steps + 1):
            a = lo + half + (hi - lo - 2 * half) * i / steps
            if a - half < lo or a + half > hi:
                continue
            ap = (d * a) % 1.0
            if ap >= 0.5:
                ap -= 1.0
            ap = abs(ap)
            if ap - 1.0 / (2 * Np) >= 1.0 / (2 * Np) and ap + 1.0 / (2 * Np) <= 0.5:
                return Nk, Np, a, ap
        Nk += d
    raise ValueError(f"cannot fit E_{k} inside ({lo}, {hi})")


def gap_series(target_E: SymmetricSet, K: int, p: float, q: float, alpha: int | None = None,
               builder: BuilderOptions | None = None, seed: int = 0,
               opts: QuadratureOptions | None = None) -> GapSeries:
    """Truncated gap series sum_k e_{m_k} f_k with f_k concentrated on disjoint E_k in E.

    Block k sits in a slot of length L 2^-k carved from the right end of the
    largest positive interval of E.  When f_k's own spectrum has gaps < k it is
    built for the image set d*I_k (d = k+1) and then dilated by d, so one of its
    d bump copies lands exactly on I_k.  Each block is normalized to
    ||f_k||_p = 2^(k/2); modulations keep block spectra disjoint with gaps >= k.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0 < q < p:
        raise ValueError("need 0 < q < p")
    if float(p).is_integer() and int(p) % 2 == 0:
        raise ValueError("p must not be an even integer")
    builder = builder or BuilderOptions()
    kind = builder.resolve(p)
    alpha = default_alpha(p, q) if alpha is None else int(alpha)
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    opts = opts or DEFAULT_OPTIONS
    if 2.0 ** (alpha * K) > 2.0**40:
        raise ValueError(
            f"|E_K| < 2^-{alpha * K} is below what a double-precision torus coordinate can "
            "resolve at desk scale; pass a smaller alpha")

    pos = [(max(lo, 0.0), hi) for lo, hi in target_E.intervals if hi > 0]
    if not pos:
        raise ValueError("target set has no positive part")
    lo, hi = max(pos, key=lambda iv: iv[1] - iv[0])
    L = hi - lo
    seeds = np.random.SeedSequence(seed).spawn(K)

    raw_blocks = []
    right = hi
    for k in range(1, K + 1):
        slot = (right - L * 2.0**-k, right)
        right = slot[0]
        d = 1 if k <= 1 else k + 1
        Nk, Np, ak, ap = _place_block(slot[0], slot[1], k, d, alpha)
        if kind == "lowp":
            eta = sign_search(builder.n, p, q, builder.sign_eps, builder.sign_budget,
                              int(seeds[k - 1].generate_state(1)[0]), opts)
            params = ConcentratorParams(builder.n, Np, ap, p, q, builder.sign_eps)
            base = lowp_concentrator(params, eta, builder.tail_budget)
        elif kind == "highp":
            j = builder.j if builder.j is not None else default_j(p)
            base = highp_concentrator(Np, ap, j, builder.riesz_K, builder.tail_budget, builder.growth)
        else:
            raise ValueError(f"unknown builder {kind!r}")
        fk = dilate(base, d) if d > 1 else base
        if fk.degree > builder.max_degree:
            raise OverflowError(f"block {k} degree {fk.degree} exceeds max_degree")
        norm = lp_integral(fk, p, TORUS, opts).norm
        c = 2.0 ** (k / 2) / norm
        Ek = interval_pair(ak - 1.0 / (2 * Nk), ak + 1.0 / (2 * Nk))
        if not contains_set(target_E, Ek):
            raise ValueError(f"E_{k} is not inside the target set")
        raw_blocks.append((scale(fk, c), Ek, d, Np, ap, c))

    blocks = []
    prev_top = None
    for k, (fk, Ek, d, Np, ap, c) in enumerate(raw_blocks, start=1):
        bottom = int(fk.freqs[0])
        if prev_top is None:
            m = -bottom                     # nonnegative spectrum overall
        else:
            m = prev_top - bottom + k + 1
        prev_top = m + int(fk.freqs[-1])
        blocks.append(Block(m, fk, Ek, d, Np, ap, c))

    freqs = np.concatenate([b.f.freqs + np.int64(b.m) for b in blocks])
    coefs = np.concatenate([b.f.coefs for b in blocks])
    assembled = TrigPoly._from_sorted(freqs, coefs)
    return GapSeries(tuple(blocks), assembled, K, alpha, float(p), float(q), target_E)
