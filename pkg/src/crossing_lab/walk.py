"""Random-walk simulation and extraction of crossing/overshoot chains.

The walk is S_n = S_0 + X_1 + ... + X_n for a kernel-driven increment chain
X.  Crossing cycles alternate a down-cross of the lower threshold with the
next up-cross of the upper one; the overshoot chain is the same recursion at
degenerate thresholds 0/0.  Extraction works on realized paths and drops
incomplete trailing cycles, since the limit theorems this library probes are
stated for completed cycles only.

Threshold comparisons are exact floating-point comparisons: increments are
continuous, ties have probability zero, and an epsilon band would corrupt
the strict/weak distinction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedKernelError
from .kernels import Kernel

__all__ = [
    "WalkPath",
    "Thresholds",
    "CrossingRecord",
    "OvershootRecord",
    "simulate_path",
    "price_path",
    "extract_crossings",
    "extract_crossings_mirrored",
    "extract_overshoots",
]


@dataclass(frozen=True)
class WalkPath:
    """A realized trajectory with its driving seed.

    partial_sums[k] equals s0 + increments[0] + ... + increments[k] exactly
    as accumulated left to right.  support_lower carries the kernel's lower
    support bound so extractors can check their preconditions.
    """

    s0: float
    x0: float
    increments: np.ndarray
    partial_sums: np.ndarray
    regen_flags: np.ndarray
    seed: int
    support_lower: float = -np.inf


@dataclass(frozen=True)
class Thresholds:
    """Lower/upper crossing levels with the boundary convention.

    lower < 0 < upper; the degenerate configuration lower = upper = 0 is
    reserved for overshoot extraction.  boundary "strict" uses < and >,
    "weak" uses <= at the lower and >= at the upper level.
    """

    lower: float
    upper: float
    boundary: str = "strict"

    def __post_init__(self):
        if self.boundary not in ("strict", "weak"):
            raise ValueError(f"boundary must be 'strict' or 'weak', got {self.boundary!r}")
        degenerate = self.lower == 0.0 == self.upper
        if not degenerate and not (self.lower < 0.0 < self.upper):
            raise ValueError("thresholds must satisfy lower < 0 < upper")


@dataclass(frozen=True)
class CrossingRecord:
    """One completed buy/sell cycle.

    Long side: t_idx is the down-cross time, l_idx the following up-cross.
    Mirrored (short) side: l_idx is the up-cross time, t_idx the following
    down-cross, and duration = t_idx - l_idx.  The first record of a path has
    a different law than the stationary chain and is flagged via
    in_state_space = False.
    """

    index: int
    t_idx: int
    l_idx: int
    x_at_t: float
    s_at_t: float
    x_at_l: float
    s_at_l: float
    duration: int
    in_state_space: bool


@dataclass(frozen=True)
class OvershootRecord:
    """Value by which the walk exceeds zero at its n-th up-crossing."""

    index: int
    l_idx: int
    x_at_l: float
    o: float


def simulate_path(kernel: Kernel, s0: float, x0: float, n_steps: int, seed: int) -> WalkPath:
    """Simulate n_steps of the walk; deterministic in (kernel, s0, x0, n_steps, seed)."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n_steps)
    v = rng.random(n_steps)
    inc, regen = kernel.scan(float(x0), u, v)
    sums = np.cumsum(np.concatenate(([float(s0)], inc)))[1:]
    return WalkPath(s0=float(s0), x0=float(x0), increments=inc, partial_sums=sums,
                    regen_flags=np.asarray(regen, dtype=bool), seed=seed,
                    support_lower=kernel.support[0])


def price_path(path: WalkPath, mu: float) -> np.ndarray:
    """Observed price A_t = mu * t + S_t for t = 1..N."""
    t = np.arange(1, len(path.partial_sums) + 1, dtype=float)
    return mu * t + path.partial_sums


def _alternate(s: np.ndarray, first_cond: np.ndarray, second_cond: np.ndarray):
    """Alternating first-passage scan: yields (first_idx, second_idx) pairs, 1-based."""
    firsts = np.flatnonzero(first_cond) + 1
    seconds = np.flatnonzero(second_cond) + 1
    pairs = []
    after = 0
    while True:
        i = np.searchsorted(firsts, after + 1)
        if i == firsts.size:
            break
        t = int(firsts[i])
        j = np.searchsorted(seconds, t + 1)
        if j == seconds.size:
            break
        l = int(seconds[j])
        pairs.append((t, l))
        after = l
    return pairs


def _cond_below(s, level, weak):
    return s <= level if weak else s < level


def _cond_above(s, level, weak):
    return s >= level if weak else s > level


def extract_crossings(path: WalkPath, thr: Thresholds) -> list[CrossingRecord]:
    """Completed down/up cycles of the path; empty if none completes."""
    if not (thr.lower < 0.0 < thr.upper):
        raise ValueError("extract_crossings needs lower < 0 < upper")
    weak = thr.boundary == "weak"
    s = path.partial_sums
    pairs = _alternate(s, _cond_below(s, thr.lower, weak), _cond_above(s, thr.upper, weak))
    inc = path.increments
    return [
        CrossingRecord(index=n, t_idx=t, l_idx=l,
                       x_at_t=float(inc[t - 1]), s_at_t=float(s[t - 1]),
                       x_at_l=float(inc[l - 1]), s_at_l=float(s[l - 1]),
                       duration=l - t, in_state_space=n >= 2)
        for n, (t, l) in enumerate(pairs, start=1)
    ]


def extract_crossings_mirrored(path: WalkPath, thr: Thresholds) -> list[CrossingRecord]:
    """Sell-first cycles: up-cross the upper level, then down-cross the lower.

    Requires increments bounded below; raises UnsupportedKernelError otherwise.
    """
    if not (thr.lower < 0.0 < thr.upper):
        raise ValueError("extract_crossings_mirrored needs lower < 0 < upper")
    if not np.isfinite(path.support_lower):
        raise UnsupportedKernelError("mirrored extraction needs kernel support bounded below")
    weak = thr.boundary == "weak"
    s = path.partial_sums
    pairs = _alternate(s, _cond_above(s, thr.upper, weak), _cond_below(s, thr.lower, weak))
    inc = path.increments
    return [
        CrossingRecord(index=n, t_idx=t, l_idx=l,
                       x_at_t=float(inc[t - 1]), s_at_t=float(s[t - 1]),
                       x_at_l=float(inc[l - 1]), s_at_l=float(s[l - 1]),
                       duration=t - l, in_state_space=n >= 2)
        for n, (l, t) in enumerate(pairs, start=1)
    ]


def extract_overshoots(path: WalkPath, boundary: str = "strict"):
    """Overshoot chain at degenerate thresholds 0/0.

    Returns (o0, records) with o0 = max(S_0, 0) reported separately from the
    per-cycle records, whose overshoots lie in (0, bound].
    """
    weak = boundary == "weak"
    if boundary not in ("strict", "weak"):
        raise ValueError(f"boundary must be 'strict' or 'weak', got {boundary!r}")
    s = path.partial_sums
    pairs = _alternate(s, _cond_below(s, 0.0, weak), _cond_above(s, 0.0, weak))
    inc = path.increments
    records = [
        OvershootRecord(index=n, l_idx=l, x_at_l=float(inc[l - 1]), o=float(s[l - 1]))
        for n, (_, l) in enumerate(pairs, start=1)
    ]
    return max(path.s0, 0.0), records
