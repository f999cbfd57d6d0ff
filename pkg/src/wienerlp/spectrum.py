"""Sparse trigonometric polynomials on the torus T = R/Z.

A polynomial is stored by its Fourier coefficients: ``f(t) = sum_h a_h e(h t)``
with ``e(x) = exp(2 pi i x)``.  Frequencies are kept sorted and unique, and no
stored coefficient is exactly zero.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

TAU_PD = 1e-12
MAX_FREQ = 2**40

# products with at most this many coefficient pairs go through an outer product
_OUTER_LIMIT = 4_000_000


@dataclass(frozen=True, eq=False)
class TrigPoly:
    freqs: np.ndarray
    coefs: np.ndarray

    def __post_init__(self):
        freqs = np.ascontiguousarray(self.freqs, dtype=np.int64)
        coefs = np.ascontiguousarray(self.coefs, dtype=np.complex128)
        if freqs.shape != coefs.shape or freqs.ndim != 1:
            raise ValueError("freqs and coefs must be 1-d arrays of equal length")
        freqs.flags.writeable = False
        coefs.flags.writeable = False
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coefs", coefs)

    @classmethod
    def _from_sorted(cls, freqs, coefs) -> "TrigPoly":
        # trusted path: freqs sorted and unique; exact zeros are dropped here
        freqs = np.asarray(freqs, dtype=np.int64)
        coefs = np.asarray(coefs, dtype=np.complex128)
        keep = coefs != 0
        if not keep.all():
            freqs, coefs = freqs[keep], coefs[keep]
        if freqs.size and max(-int(freqs[0]), int(freqs[-1])) > MAX_FREQ:
            raise OverflowError(f"frequency exceeds {MAX_FREQ}")
        return cls(freqs, coefs)

    @property
    def degree(self) -> int:
        if self.freqs.size == 0:
            return 0
        return int(max(-self.freqs[0], self.freqs[-1]))

    @property
    def support_size(self) -> int:
        return int(self.freqs.size)

    @property
    def is_zero(self) -> bool:
        return self.freqs.size == 0

    def coef(self, h: int) -> complex:
        i = np.searchsorted(self.freqs, h)
        if i < self.freqs.size and self.freqs[i] == h:
            return complex(self.coefs[i])
        return 0j

    def items(self) -> list[tuple[int, complex]]:
        return [(int(h), complex(c)) for h, c in zip(self.freqs, self.coefs)]

    def abs_sum(self) -> float:
        """Sum of |a_h|; equals f(0) for positive definite f and bounds sup |f|."""
        return float(np.sum(np.abs(self.coefs)))

    def derivative_bound(self) -> float:
        """Upper bound 2 pi sum |h a_h| for sup |f'| (Bernstein-type)."""
        return float(2 * np.pi * np.sum(np.abs(self.freqs.astype(np.float64)) * np.abs(self.coefs)))

    def __call__(self, t):
        """Direct evaluation at arbitrary points (no FFT)."""
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros(t.shape, dtype=np.complex128)
        for h, c in zip(self.freqs, self.coefs):
            out += c * np.exp(2j * np.pi * ((int(h) * t) % 1.0))
        return out

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return np.array_equal(self.freqs, other.freqs) and np.array_equal(self.coefs, other.coefs)

    __hash__ = None

    def __add__(self, other):
        return combine(1, self, 1, other)

    __radd__ = __add__

    def __sub__(self, other):
        return combine(1, self, -1, other)

    def __neg__(self):
        return combine(-1, self, 0, 0)

    def __mul__(self, other):
        if isinstance(other, Number):
            return combine(other, self, 0, 0)
        return multiply(self, other)

    __rmul__ = __mul__

    def __repr__(self):
        if self.support_size <= 8:
            body = ", ".join(f"{h}: {c:.6g}" for h, c in self.items())
            return f"TrigPoly({{{body}}})"
        return f"TrigPoly(support_size={self.support_size}, degree={self.degree})"


@dataclass(frozen=True)
class SpectrumReport:
    is_positive_definite: bool
    is_idempotent: bool
    min_gap: int
    degree: int
    support_size: int


ZERO = TrigPoly(np.zeros(0, np.int64), np.zeros(0, np.complex128))


def make_poly(entries: Iterable[tuple[int, complex]]) -> TrigPoly:
    """Build a polynomial from ``(frequency, coefficient)`` pairs.

    Duplicate frequencies are summed and exact zeros dropped.
    """
    entries = list(entries)
    if not entries:
        return ZERO
    freqs = np.array([int(h) for h, _ in entries], dtype=np.int64)
    coefs = np.array([complex(c) for _, c in entries], dtype=np.complex128)
    return _collect(freqs, coefs)


def _collect(freqs: np.ndarray, coefs: np.ndarray) -> TrigPoly:
    uniq, inv = np.unique(freqs, return_inverse=True)
    if uniq.size == freqs.size:
        order = np.argsort(freqs, kind="stable")
        return TrigPoly._from_sorted(freqs[order], coefs[order])
    re = np.bincount(inv, weights=coefs.real, minlength=uniq.size)
    im = np.bincount(inv, weights=coefs.imag, minlength=uniq.size)
    return TrigPoly._from_sorted(uniq, re + 1j * im)


def as_poly(f) -> TrigPoly:
    if isinstance(f, TrigPoly):
        return f
    if isinstance(f, Number):
        return make_poly([(0, f)])
    raise TypeError(f"cannot interpret {type(f).__name__} as a TrigPoly")


def monomial(h: int, c: complex = 1.0) -> TrigPoly:
    return make_poly([(h, c)])


def dirichlet(n: int) -> TrigPoly:
    """D_n = sum_{v=0}^{n-1} e_v, the all-ones idempotent of length n."""
    if n < 1:
        raise ValueError("dirichlet kernel needs n >= 1")
    return TrigPoly._from_sorted(np.arange(n, dtype=np.int64), np.ones(n))


def modulate(f: TrigPoly, K: int) -> TrigPoly:
    """Multiply by e_K: every frequency shifts by K, the modulus is unchanged."""
    if K == 0:
        return f
    return TrigPoly._from_sorted(f.freqs + np.int64(K), f.coefs)


def dilate(f: TrigPoly, N: int) -> TrigPoly:
    """t -> f(N t); frequency h becomes N h."""
    if N < 1:
        raise ValueError("dilation factor must be >= 1")
    if N == 1:
        return f
    if f.degree * N > MAX_FREQ:
        raise OverflowError("dilated frequencies exceed bound")
    return TrigPoly._from_sorted(f.freqs * np.int64(N), f.coefs)


def translate(f: TrigPoly, a: float) -> TrigPoly:
    """t -> f(t - a) for real a; coefficient a_h picks up e(-a h)."""
    phase = np.exp(-2j * np.pi * ((f.freqs.astype(np.float64) * a) % 1.0))
    return TrigPoly._from_sorted(f.freqs, f.coefs * phase)


def multiply(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    """Pointwise product, computed as exact convolution of the coefficient sequences."""
    f, g = as_poly(f), as_poly(g)
    if f.is_zero or g.is_zero:
        return ZERO
    if f.support_size * g.support_size <= _OUTER_LIMIT:
        freqs = np.add.outer(f.freqs, g.freqs).ravel()
        coefs = np.multiply.outer(f.coefs, g.coefs).ravel()
        return _collect(freqs, coefs)
    # dense spans: direct convolution, no FFT rounding noise on structural zeros
    fd, f0 = _dense(f)
    gd, g0 = _dense(g)
    out = np.convolve(fd, gd)
    freqs = np.arange(out.size, dtype=np.int64) + (f0 + g0)
    return TrigPoly._from_sorted(freqs, out)


def _dense(f: TrigPoly) -> tuple[np.ndarray, int]:
    lo = int(f.freqs[0])
    arr = np.zeros(int(f.freqs[-1]) - lo + 1, dtype=np.complex128)
    arr[f.freqs - lo] = f.coefs
    return arr, lo


def combine(a: complex, f, b: complex, g) -> TrigPoly:
    """Coefficientwise ``a f + b g``; numbers are read as constant polynomials."""
    f, g = as_poly(f), as_poly(g)
    freqs = np.concatenate([f.freqs, g.freqs])
    coefs = np.concatenate([complex(a) * f.coefs, complex(b) * g.coefs])
    if freqs.size == 0:
        return ZERO
    return _collect(freqs, coefs)


def scale(f: TrigPoly, c: complex) -> TrigPoly:
    return TrigPoly._from_sorted(f.freqs, f.coefs * c)


def filter_multiples(f: TrigPoly, k: int) -> TrigPoly:
    """Keep only frequencies divisible by k (convolution with the k-th roots of unity average)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    keep = f.freqs % k == 0
    return TrigPoly._from_sorted(f.freqs[keep], f.coefs[keep])


def evaluate_grid(f: TrigPoly, M: int) -> np.ndarray:
    """Samples ``f(j/M)`` for ``j = 0..M-1`` by inverse FFT synthesis.

    ``M`` must be at least ``2*degree + 1`` so no two frequencies alias.
    """
    if M < 2 * f.degree + 1:
        raise ValueError(f"grid size {M} below anti-aliasing floor {2 * f.degree + 1}")
    c = np.zeros(M, dtype=np.complex128)
    c[f.freqs % M] = f.coefs
    return np.fft.ifft(c, norm="forward")


def classify(f: TrigPoly, tau_pd: float = TAU_PD) -> SpectrumReport:
    c = f.coefs
    pd = bool(np.all(np.abs(c.imag) <= tau_pd) and np.all(c.real >= -tau_pd))
    idem = bool(np.all(np.abs(c - 1.0) <= tau_pd))
    gap = int(np.min(np.diff(f.freqs))) if f.support_size >= 2 else 0
    return SpectrumReport(pd, idem, gap, f.degree, f.support_size)


def min_coefficient(f: TrigPoly) -> float:
    """Smallest real part among the stored coefficients (0 for the zero polynomial)."""
    return float(f.coefs.real.min()) if f.support_size else 0.0


# -- polynomial file format: JSON list of [frequency, real, imag] records ------

def dumps_poly(f: TrigPoly) -> str:
    from .serialize import dumps

    return dumps([[h, c.real, c.imag] for h, c in f.items()])


def loads_poly(text: str) -> TrigPoly:
    records = json.loads(text)
    if not isinstance(records, list):
        raise ValueError("polynomial file must hold a list of [frequency, re, im] records")
    entries = []
    for rec in records:
        if not (isinstance(rec, Sequence) and len(rec) == 3):
            raise ValueError(f"bad record {rec!r}")
        h, re, im = rec
        if isinstance(h, float) and not h.is_integer() or isinstance(h, bool):
            raise ValueError(f"frequency must be an integer, got {h!r}")
        entries.append((int(h), complex(float(re), float(im))))
    return make_poly(entries)


def write_poly(path, f: TrigPoly) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_poly(f))
        fh.write("\n")


def read_poly(path) -> TrigPoly:
    with open(path) as fh:
        return loads_poly(fh.read())
