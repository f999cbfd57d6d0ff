"""Symmetric subsets of the torus as finite unions of open intervals.

Points of T are represented in the fundamental domain [-1/2, 1/2).  A set is a
sorted tuple of disjoint open intervals ``(lo, hi)`` that is symmetric under
``t -> -t``.  An interval touching -1/2 together with its mirror touching 1/2
is a single arc through 1/2 on the torus, so the point -1/2 belongs to the set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

SYM_TOL = 1e-15
HALF = 0.5


@dataclass(frozen=True)
class SymmetricSet:
    intervals: tuple[tuple[float, float], ...]

    @property
    def measure(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.intervals)

    @property
    def wraps(self) -> bool:
        """True if the set contains an arc through t = 1/2."""
        return bool(self.intervals) and self.intervals[0][0] <= -HALF and self.intervals[-1][1] >= HALF

    @property
    def is_torus(self) -> bool:
        return len(self.intervals) == 1 and self.intervals[0] == (-HALF, HALF)

    def endpoints(self) -> list[float]:
        """Boundary points of the set on the torus (the wrap point 1/2 excluded)."""
        pts = []
        for lo, hi in self.intervals:
            if lo > -HALF:
                pts.append(lo)
            if hi < HALF:
                pts.append(hi)
        return pts

    def contains(self, t) -> np.ndarray:
        """Membership of points already reduced to [-1/2, 1/2); endpoints are outside."""
        t = np.asarray(t, dtype=np.float64)
        los = np.array([lo for lo, _ in self.intervals])
        his = np.array([hi for _, hi in self.intervals])
        idx = np.searchsorted(los, t, side="left") - 1
        ok = idx >= 0
        idx = np.where(ok, idx, 0)
        inside = ok & (t > los[idx]) & (t < his[idx])
        if self.wraps:
            inside |= t == -HALF
        return inside

    def __str__(self):
        return ";".join(f"{lo!r},{hi!r}" for lo, hi in self.intervals)


def _merge(intervals: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def _check_symmetric(intervals: list[tuple[float, float]]) -> None:
    for (lo, hi), (mlo, mhi) in zip(intervals, reversed(intervals)):
        if abs(lo + mhi) > SYM_TOL or abs(hi + mlo) > SYM_TOL:
            raise ValueError(f"set is not symmetric about 0: ({lo}, {hi}) has no mirror image")


def make_set(intervals: Iterable[tuple[float, float]]) -> SymmetricSet:
    """Validate, sort and merge open intervals inside [-1/2, 1/2].

    Asymmetric input is an error; the set is never silently symmetrized.
    """
    ivs = []
    for lo, hi in intervals:
        lo, hi = float(lo), float(hi)
        if not (-HALF <= lo and hi <= HALF):
            raise ValueError(f"interval ({lo}, {hi}) leaves the fundamental domain [-1/2, 1/2]")
        if not lo < hi:
            raise ValueError(f"interval ({lo}, {hi}) has empty interior")
        ivs.append((lo, hi))
    merged = _merge(ivs)
    if not merged:
        raise ValueError("set has empty interior")
    _check_symmetric(merged)
    return SymmetricSet(tuple(merged))


TORUS = SymmetricSet(((-HALF, HALF),))


def interval_pair(lo: float, hi: float) -> SymmetricSet:
    """I u (-I) for I = (lo, hi) with 0 <= lo < hi <= 1/2."""
    if lo == 0.0:
        return make_set([(-hi, hi)])
    return make_set([(lo, hi), (-hi, -lo)])


def symmetric_interval(a: float) -> SymmetricSet:
    """The window (-a, a)."""
    return make_set([(-a, a)])


def _domain_minus(removed: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out = []
    cur = -HALF
    for lo, hi in _merge(removed):
        if lo > cur:
            out.append((cur, lo))
        cur = max(cur, hi)
    if cur < HALF:
        out.append((cur, HALF))
    return out


def complement(E: SymmetricSet) -> SymmetricSet:
    """Complement in [-1/2, 1/2], up to the null set of endpoints."""
    if E.measure >= 1.0 or E.is_torus:
        raise ValueError("complement of a full-measure set is empty")
    rest = _domain_minus(list(E.intervals))
    if not rest:
        raise ValueError("complement of a full-measure set is empty")
    return SymmetricSet(tuple(rest))


def parse_set(text: str) -> SymmetricSet:
    """Parse ``"lo,hi;lo,hi"``; the word ``torus`` gives the whole circle."""
    text = text.strip().replace("−", "-")
    if text.lower() in ("torus", "t", "all"):
        return TORUS
    pairs = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ValueError(f"bad interval {chunk!r}; expected 'lo,hi'")
        pairs.append((float(parts[0]), float(parts[1])))
    return make_set(pairs)


def diophantine_set(L: int, l_max: int, radius_exponent: int = 3) -> SymmetricSet:
    """The torus minus radius ``l**-radius_exponent`` arcs around every
    irreducible k/l with k != 0 and ``L < l <= l_max``."""
    if L < 1:
        raise ValueError("L must be a positive integer")
    if l_max <= L:
        raise ValueError("need l_max > L")
    if radius_exponent < 2:
        raise ValueError("radius_exponent must be >= 2")
    removed = []
    for l in range(L + 1, l_max + 1):
        r = float(l) ** -radius_exponent
        for k in range(1, l):
            if math.gcd(k, l) != 1:
                continue
            c = k / l if 2 * k <= l else (k - l) / l
            lo, hi = c - r, c + r
            # arcs through 1/2 are split across the two ends of the domain
            if lo < -HALF:
                removed.append((lo + 1.0, HALF))
                lo = -HALF
            if hi > HALF:
                removed.append((-HALF, hi - 1.0))
                hi = HALF
            removed.append((lo, hi))
    rest = _domain_minus(removed)
    if not rest or math.fsum(hi - lo for lo, hi in rest) <= 0:
        raise ValueError("diophantine set is degenerate: removed arcs cover the torus")
    merged = _merge(rest)
    _check_symmetric(merged)
    return SymmetricSet(tuple(merged))


def grid_points(M: int, j: np.ndarray) -> np.ndarray:
    """t_j = j/M reduced to [-1/2, 1/2) without rounding drift at mirrored points."""
    j = np.asarray(j, dtype=np.int64)
    return np.where(2 * j < M, j, j - M) / M


def indicator_on_grid(E: SymmetricSet, M: int) -> np.ndarray:
    if M < 1:
        raise ValueError("M must be >= 1")
    return E.contains(grid_points(M, np.arange(M)))
