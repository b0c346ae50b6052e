"""Threshold search: exhaustive grid and a Kiefer-Wolfowitz prototype.

Both optimizers consume an evaluator callable

    evaluator(theta: tuple[float, float], n_cycles: int, seed: int) -> estimate

whose result exposes ``mean`` (``ObjectiveEstimate`` does).  Common random
numbers are used throughout: every grid point sees the same seed, and the
two finite-difference probes of one KW step share theirs, so comparisons
rather than absolute values drive the search.  Stochastic convergence of KW
on the real objective is reported via its trajectory, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidSpecError
from .trading import ObjectiveEstimate

__all__ = ["ThresholdBox", "KwConfig", "GridResult", "KwTrajectory",
           "grid_search", "kiefer_wolfowitz"]


@dataclass(frozen=True)
class ThresholdBox:
    """Search box: lower thresholds in lower_range < 0 < upper_range."""

    lower_range: tuple[float, float]
    upper_range: tuple[float, float]
    grid_counts: tuple[int, int] = (5, 5)

    def __post_init__(self):
        if not (self.lower_range[0] < self.lower_range[1] < 0.0):
            raise InvalidSpecError("lower_range", "must be an interval below 0")
        if not (0.0 < self.upper_range[0] < self.upper_range[1]):
            raise InvalidSpecError("upper_range", "must be an interval above 0")
        if min(self.grid_counts) < 1:
            raise InvalidSpecError("grid_counts", "must be >= 1")

    def require_margin(self, margin: float):
        """Check the configurable exclusion margin around 0 (>= h/10 in runs)."""
        if self.lower_range[1] > -margin or self.upper_range[0] < margin:
            raise InvalidSpecError("thresholds.box", f"ranges must exclude 0 by {margin}")

    def project(self, theta: np.ndarray) -> np.ndarray:
        return np.array([
            np.clip(theta[0], self.lower_range[0], self.lower_range[1]),
            np.clip(theta[1], self.upper_range[0], self.upper_range[1]),
        ])

    def grid(self) -> list[tuple[float, float]]:
        lows = np.linspace(*self.lower_range, self.grid_counts[0])
        highs = np.linspace(*self.upper_range, self.grid_counts[1])
        return [(float(lo), float(hi)) for lo in lows for hi in highs]


@dataclass(frozen=True)
class KwConfig:
    """Gain schedules a_n = a0 / (n + A)**gamma_a, c_n = c0 / n**gamma_c.

    Classical exponents: gamma_a in (0.5, 1], gamma_c in (0, 0.5).
    """

    a0: float = 1.0
    stability: float = 10.0
    gamma_a: float = 1.0
    c0: float = 0.5
    gamma_c: float = 0.25
    iterations: int = 500
    n_cycles: int = 1000
    projection: Optional[ThresholdBox] = None

    def __post_init__(self):
        if not (0.5 < self.gamma_a <= 1.0):
            raise InvalidSpecError("kw.gamma_a", "must lie in (0.5, 1]")
        if not (0.0 < self.gamma_c < 0.5):
            raise InvalidSpecError("kw.gamma_c", "must lie in (0, 0.5)")
        if self.a0 < 0.0:
            # a0 = 0 freezes the iterate, which is occasionally useful in tests
            raise InvalidSpecError("kw.a0", "a0 must be nonnegative")
        if min(self.c0, self.stability) <= 0.0:
            raise InvalidSpecError("kw.c0", "c0 and stability must be positive")


@dataclass
class GridResult:
    best: tuple[float, float]
    best_estimate: ObjectiveEstimate
    table: list[dict] = field(default_factory=list)


@dataclass
class KwTrajectory:
    theta: np.ndarray       # (iterations + 1, 2), starts at theta0
    gradients: np.ndarray   # (iterations, 2)
    values: np.ndarray      # (iterations,) mean of the probe evaluations

    @property
    def final(self) -> tuple[float, float]:
        return float(self.theta[-1, 0]), float(self.theta[-1, 1])


Evaluator = Callable[[tuple[float, float], int, int], ObjectiveEstimate]


def grid_search(evaluator: Evaluator, box: ThresholdBox, n_cycles: int,
                seed: int) -> GridResult:
    """Evaluate every grid point with common random numbers, return the argmax.

    Ties break toward the smaller threshold gap, then lexicographically.
    """
    rows = []
    for lo, hi in box.grid():
        est = evaluator((lo, hi), n_cycles, seed)
        rows.append({"theta_lower": lo, "theta_upper": hi, "mean": est.mean,
                     "stderr": est.stderr, "n_cycles": est.n_cycles, "_est": est})
    best_row = max(rows, key=lambda r: (r["mean"],
                                        -(r["theta_upper"] - r["theta_lower"]),
                                        -r["theta_lower"], -r["theta_upper"]))
    result = GridResult(best=(best_row["theta_lower"], best_row["theta_upper"]),
                        best_estimate=best_row.pop("_est"),
                        table=[{k: v for k, v in r.items() if k != "_est"} for r in rows])
    return result


def kiefer_wolfowitz(evaluator: Evaluator, cfg: KwConfig, theta0: tuple[float, float],
                     seed: int) -> KwTrajectory:
    """Projected stochastic ascent with two-sided finite differences.

    Each iteration draws one fresh seed shared by all +/- probes (common
    random numbers), estimates the gradient coordinatewise with perturbation
    c_n, and projects theta + a_n * grad back into the box.  Divergence, if
    any, is visible in the returned trajectory.
    """
    box = cfg.projection
    theta = np.asarray(theta0, dtype=float)
    if box is not None:
        if not np.allclose(box.project(theta), theta):
            raise InvalidSpecError("kw.theta0", "start point outside the projection box")
    thetas = [theta.copy()]
    grads = np.empty((cfg.iterations, 2))
    values = np.empty(cfg.iterations)
    seeds = np.random.SeedSequence(seed).generate_state(cfg.iterations)
    for n in range(1, cfg.iterations + 1):
        a_n = cfg.a0 / (n + cfg.stability) ** cfg.gamma_a
        c_n = cfg.c0 / n ** cfg.gamma_c
        step_seed = int(seeds[n - 1])
        grad = np.empty(2)
        probe_means = []
        for i in range(2):
            e = np.zeros(2)
            e[i] = c_n
            up = evaluator(tuple(theta + e), cfg.n_cycles, step_seed).mean
            dn = evaluator(tuple(theta - e), cfg.n_cycles, step_seed).mean
            grad[i] = (up - dn) / (2.0 * c_n)
            probe_means += [up, dn]
        theta = theta + a_n * grad
        if box is not None:
            theta = box.project(theta)
        thetas.append(theta.copy())
        grads[n - 1] = grad
        values[n - 1] = float(np.mean(probe_means))
    return KwTrajectory(theta=np.array(thetas), gradients=grads, values=values)
