"""Per-cycle profits and the long-run average-utility objective.

A long cycle buys at the down-cross and sells at the up-cross, realizing
s_at_l - s_at_t + mu * duration; the mirrored (short) cycle sells first and
realizes s_at_l - s_at_t - mu * duration.  The objective averages
u(profit) - p(duration) over completed cycles; with the log-price variant the
profit enters through exp(profit) and the utility must live on positive
wealth.  First cycles (flagged off the stationary state space) are excluded
from averages because their law differs from the chain the limit theorems
describe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._engine import stream_records
from .errors import DomainMismatchError, InvalidSpecError, PathBudgetExceededError
from .ergodics import batch_means_stderr
from .kernels import Kernel
from .walk import CrossingRecord, Thresholds

__all__ = [
    "UtilitySpec",
    "PenaltySpec",
    "ObjectiveEstimate",
    "cycle_profit",
    "objective_term",
    "objective_trace",
    "long_run_objective",
]

_PROBE_WEALTH = np.linspace(-50.0, 50.0, 1001)
_PROBE_POSITIVE = np.geomspace(1e-8, 50.0, 1001)


@dataclass(frozen=True)
class UtilitySpec:
    """Nondecreasing utility, bounded above on its domain.

    kinds: "exponential" (param = risk aversion > 0, u(w) = -exp(-a*w)),
    "negative_power" (param = exponent < 0, u(w) = -w**exponent on w > 0),
    "capped_linear" (param = cap, u(w) = min(w, cap); cap = inf degrades to
    the identity and is only bounded on the probe range).
    """

    kind: str
    param: float
    domain: str = "wealth"

    def __post_init__(self):
        if self.kind not in ("exponential", "negative_power", "capped_linear"):
            raise InvalidSpecError("utility.kind", f"unknown kind {self.kind!r}")
        if self.domain not in ("wealth", "positive_wealth"):
            raise InvalidSpecError("utility.domain", f"unknown domain {self.domain!r}")
        if self.kind == "exponential" and not self.param > 0:
            raise InvalidSpecError("utility.param", "risk aversion must be positive")
        if self.kind == "negative_power":
            if not self.param < 0:
                raise InvalidSpecError("utility.param", "exponent must be negative")
            if self.domain != "positive_wealth":
                raise InvalidSpecError("utility.domain", "negative power needs positive_wealth")
        probe = self(_PROBE_POSITIVE if self.domain == "positive_wealth" else _PROBE_WEALTH)
        if np.any(np.diff(probe) < -1e-12):
            raise InvalidSpecError("utility.kind", "utility must be nondecreasing")

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if self.kind == "exponential":
            out = -np.exp(-self.param * w)
        elif self.kind == "negative_power":
            out = -np.power(w, self.param)
        else:
            out = np.minimum(w, self.param)
        return float(out) if out.ndim == 0 else out

    @property
    def sup(self) -> float:
        """Least upper bound over the probe grid (exact 0 for the bounded kinds)."""
        if self.kind in ("exponential", "negative_power"):
            return 0.0
        return float(self.param)


@dataclass(frozen=True)
class PenaltySpec:
    """Nonnegative, nondecreasing, bounded waiting-time penalty.

    kinds: "linear_capped" (min(slope * d, cap)) and "zero".
    """

    kind: str
    slope: float = 0.0
    cap: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear_capped", "zero"):
            raise InvalidSpecError("penalty.kind", f"unknown kind {self.kind!r}")
        if self.kind == "linear_capped" and (self.slope < 0 or self.cap < 0):
            raise InvalidSpecError("penalty.slope", "slope and cap must be nonnegative")

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        out = np.minimum(self.slope * d, self.cap) if self.kind == "linear_capped" \
            else np.zeros_like(d)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ObjectiveEstimate:
    """Long-run average objective with a batch-means error bar."""

    mean: float
    stderr: float
    n_cycles: int
    per_cycle_terms: Optional[np.ndarray] = None


def cycle_profit(rec: CrossingRecord, mu: float, side: str = "long") -> float:
    """Realized profit of one completed cycle under drift mu."""
    if side == "long":
        return rec.s_at_l - rec.s_at_t + mu * rec.duration
    if side == "short":
        return rec.s_at_l - rec.s_at_t - mu * rec.duration
    raise ValueError(f"side must be 'long' or 'short', got {side!r}")


def objective_term(rec: CrossingRecord, u: UtilitySpec, p: PenaltySpec, mu: float,
                   variant: str = "level", side: str = "long") -> float:
    """u(profit) - p(duration), or u(exp(profit)) - p(duration) for log prices."""
    profit = cycle_profit(rec, mu, side)
    if variant == "level":
        return float(u(profit) - p(rec.duration))
    if variant == "logprice":
        if u.domain != "positive_wealth":
            raise DomainMismatchError("logprice variant needs a positive-wealth utility")
        return float(u(np.exp(profit)) - p(rec.duration))
    raise ValueError(f"variant must be 'level' or 'logprice', got {variant!r}")


def objective_trace(kernel: Kernel, thr: Thresholds, u: UtilitySpec, p: PenaltySpec,
                    mu: float, variant: str, side: str, n_cycles: int, seed: int, *,
                    s0: float = 0.0, x0: float = 0.0, step_cap: int = 10 ** 8):
    """Counted cycles and their objective terms from one long walk.

    Returns (records, terms); the first (off-state-space) cycle is excluded.
    Raises :class:`PathBudgetExceededError` when the step cap is exhausted
    first: cycle lengths are almost surely finite but not integrable, so a
    budget turns the rare enormous cycle into a reportable failure instead of
    a hang.
    """
    records, _ = stream_records(kernel, thr.lower, thr.upper,
                                weak=thr.boundary == "weak",
                                mirrored=side == "short", s0=s0, x0=x0, seed=seed,
                                max_records=n_cycles + 1, step_cap=step_cap)
    counted = [r for r in records if r.in_state_space]
    if len(counted) < n_cycles:
        raise PathBudgetExceededError(len(counted), n_cycles, step_cap)
    counted = counted[:n_cycles]
    terms = np.array([objective_term(r, u, p, mu, variant, side) for r in counted])
    return counted, terms


def long_run_objective(kernel: Kernel, thr: Thresholds, u: UtilitySpec, p: PenaltySpec,
                       mu: float, variant: str, side: str, n_cycles: int, seed: int, *,
                       s0: float = 0.0, x0: float = 0.0, step_cap: int = 10 ** 8,
                       keep_terms: bool = False) -> ObjectiveEstimate:
    """Average objective term over the first n_cycles stationary cycles."""
    if n_cycles < 100:
        raise ValueError("n_cycles must be >= 100")
    _, terms = objective_trace(kernel, thr, u, p, mu, variant, side, n_cycles, seed,
                               s0=s0, x0=x0, step_cap=step_cap)
    return ObjectiveEstimate(mean=float(terms.mean()),
                             stderr=batch_means_stderr(terms),
                             n_cycles=len(terms),
                             per_cycle_terms=terms if keep_terms else None)
