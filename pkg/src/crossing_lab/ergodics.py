"""Empirical-law machinery, convergence diagnostics, and minorization bounds.

Total variation between continuous laws is computed on a fixed shared bin
grid; that is a biased (lower-bound) proxy for true TV, but it makes decay
claims testable, and every result carries its grid.  Rate fits exclude
points below twice the Monte Carlo noise floor, which is estimated by a
same-law control run.

The explicit lower bounds for the crossing-cycle chain and the overshoot
chain are integrals of products of uniform-sum densities over constrained
boxes; they are evaluated by tensor-product Gauss-Legendre quadrature with
panel splits at every axis-aligned kink and refinement until the relative
change drops below 1e-6.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import irwin_hall
from ._engine import chain_states, run_cycles
from .errors import EmptyInputError, GridMismatchError, InvalidSpecError
from .kernels import Kernel
from .walk import Thresholds, WalkPath

__all__ = [
    "EmpiricalLaw",
    "TvSeries",
    "MinorizationBound",
    "UBox",
    "ZBox",
    "empirical_law",
    "tv_distance",
    "tv_noise_scale",
    "tv_decay_experiment",
    "fit_decay_rate",
    "lln_average",
    "batch_means_stderr",
    "regeneration_blocks",
    "irwin_hall_pdf",
    "kappa_tilde",
    "beta_measure",
    "verify_minorization",
    "u_chain_grid",
    "overshoot_grid",
    "overshoot_pair_grid",
    "increment_grid",
]

CHAINS = ("U", "U_mirrored", "O", "Z", "X")


# -- empirical laws -----------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalLaw:
    """Normalized histogram over a fixed rectangular grid."""

    bin_edges: tuple[np.ndarray, ...]
    masses: np.ndarray
    n_samples: int
    n_clipped: int


def empirical_law(samples, bin_edges) -> EmpiricalLaw:
    """Bin samples on the given per-dimension edges.

    Samples outside the grid are clipped into the boundary bins and counted
    in ``n_clipped``.  Deterministic for a fixed input order.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise EmptyInputError("empirical_law needs at least one sample")
    if arr.ndim == 1:
        arr = arr[:, None]
    edges = tuple(np.asarray(e, dtype=float) for e in bin_edges)
    if len(edges) != arr.shape[1]:
        raise GridMismatchError(f"{arr.shape[1]}-d samples vs {len(edges)} edge arrays")
    clipped = 0
    cols = []
    for d, e in enumerate(edges):
        col = arr[:, d]
        out = (col < e[0]) | (col > e[-1])
        clipped += int(out.sum())
        hi = e[-1] if np.isfinite(e[-1]) else np.finfo(float).max
        cols.append(np.clip(col, e[0], hi))
    hist, _ = np.histogramdd(np.column_stack(cols), bins=edges)
    masses = hist / arr.shape[0]
    return EmpiricalLaw(bin_edges=edges, masses=masses, n_samples=arr.shape[0],
                        n_clipped=clipped)


def _same_grid(a: EmpiricalLaw, b: EmpiricalLaw) -> bool:
    return len(a.bin_edges) == len(b.bin_edges) and all(
        ea.shape == eb.shape and np.array_equal(ea, eb)
        for ea, eb in zip(a.bin_edges, b.bin_edges)
    )


def tv_distance(a: EmpiricalLaw, b: EmpiricalLaw) -> float:
    """Half the L1 distance between two laws on the same grid."""
    if not _same_grid(a, b):
        raise GridMismatchError("empirical laws live on different bin grids")
    return 0.5 * float(np.abs(a.masses - b.masses).sum())


def tv_noise_scale(a: EmpiricalLaw, b: EmpiricalLaw) -> float:
    """Aggregate binomial standard error of the TV estimate between a and b.

    Upper-bounds the expected TV of two samples from a common law; used both
    as the stderr column of TV reports and to set statistical test margins.
    """
    if not _same_grid(a, b):
        raise GridMismatchError("empirical laws live on different bin grids")
    p = 0.5 * (a.masses + b.masses)
    var = p * (1.0 - p) * (1.0 / a.n_samples + 1.0 / b.n_samples)
    return 0.5 * float(np.sqrt(var).sum())


# -- chain grids ---------------------------------------------------------------


def u_chain_grid(thr: Thresholds, kernel: Kernel, bins=6, m_max: int = 8,
                 mirrored: bool = False) -> tuple[np.ndarray, ...]:
    """Shared grid over the invariant box of the crossing-cycle chain.

    Dimensions: (x at first event, s at first event, x at second event,
    s at second event, duration); durations above m_max fall in an overflow
    bin.  ``bins`` is one count or one per continuous dimension; coarse or
    even single-bin dimensions are legitimate, they trade resolution for a
    lower Monte Carlo noise floor.  For kernels unbounded below the first two
    dimensions are truncated at three support bounds and the clipped mass is
    reported by the law.
    """
    M = kernel.bound
    depth = M if kernel.bounded_below else 3.0 * M
    nb = [bins] * 4 if np.isscalar(bins) else list(bins)
    if len(nb) != 4:
        raise ValueError("bins must be a scalar or one count per continuous dimension")
    dur = np.concatenate((np.arange(m_max + 1) + 0.5, [np.inf]))
    if mirrored:
        return (
            np.linspace(0.0, M, nb[0] + 1),
            np.linspace(thr.upper, thr.upper + M, nb[1] + 1),
            np.linspace(-depth, 0.0, nb[2] + 1),
            np.linspace(thr.lower - depth, thr.lower, nb[3] + 1),
            dur,
        )
    return (
        np.linspace(-depth, 0.0, nb[0] + 1),
        np.linspace(thr.lower - depth, thr.lower, nb[1] + 1),
        np.linspace(0.0, M, nb[2] + 1),
        np.linspace(thr.upper, thr.upper + M, nb[3] + 1),
        dur,
    )


def overshoot_grid(kernel: Kernel, bins=64) -> tuple[np.ndarray, ...]:
    """1-d grid over (0, bound]; ``bins`` is a count or explicit edges."""
    if np.isscalar(bins):
        return (np.linspace(0.0, kernel.bound, int(bins) + 1),)
    return (np.asarray(bins, dtype=float),)


def overshoot_pair_grid(kernel: Kernel, bins=(4, 2)) -> tuple[np.ndarray, ...]:
    """2-d grid over the overshoot-pair state space (increment, level)."""
    nb = (bins, bins) if np.isscalar(bins) else tuple(bins)
    return (np.linspace(0.0, kernel.bound, nb[0] + 1),
            np.linspace(0.0, kernel.bound, nb[1] + 1))


def increment_grid(kernel: Kernel, bins: int = 64) -> tuple[np.ndarray, ...]:
    M = kernel.bound
    lo = -M if kernel.bounded_below else -3.0 * M
    return (np.linspace(lo, M, bins + 1),)


# -- TV decay experiment --------------------------------------------------------


@dataclass
class TvSeries:
    """TV between two start laws of a chain along n, with a fitted log-slope."""

    indices: np.ndarray
    tv: np.ndarray
    stderr: np.ndarray
    control_tv: np.ndarray
    noise_floor: float
    fitted_rate: Optional[float]
    fit_window: Optional[tuple[int, int]]
    meta: dict = field(default_factory=dict)


def fit_decay_rate(n_list, tv, floor):
    """Least-squares slope of log TV over the points above twice the floor.

    Returns (rate, (n_first, n_last)), or (None, None) when fewer than two
    points clear the floor (reported rather than silently fitted).
    """
    tv = np.asarray(tv, dtype=float)
    window = [i for i, t in enumerate(tv) if t > 2.0 * floor]
    if len(window) < 2:
        return None, None
    ns = np.array([n_list[i] for i in window], dtype=float)
    rate = float(np.polyfit(ns, np.log(tv[window]), 1)[0])
    return rate, (int(n_list[window[0]]), int(n_list[window[-1]]))


def _cycle_samples(batch, chain: str, n: int) -> np.ndarray:
    """Chain elements at cycle n (1-based) across replicates that reached it."""
    ok = batch.completed(n)
    j = n - 1
    if chain == "O":
        return batch.s_second[ok, j][:, None]
    if chain == "Z":
        return np.column_stack((batch.x_second[ok, j], batch.s_second[ok, j]))
    # storage order already matches the record layout of either side: the
    # first event leads (down-cross for U, up-cross for the mirrored chain)
    return np.column_stack((batch.x_first[ok, j], batch.s_first[ok, j],
                            batch.x_second[ok, j], batch.s_second[ok, j],
                            batch.durations[ok, j].astype(float)))


def tv_decay_experiment(kernel: Kernel, thr: Optional[Thresholds], chain: str,
                        init_pair, n_list: Sequence[int], replicates: int, seed: int,
                        *, bins=None, m_max: int = 8,
                        step_cap: int = 1 << 15, workers: int = 1) -> TvSeries:
    """Empirical TV between the laws of the n-th chain element from two starts.

    init_pair holds two (s0, x0) pairs ((x0, x0) states for chain "X").  A
    same-law control run (first init, independent seed) estimates the noise
    floor; the decay rate is fitted on log TV over the indices whose TV
    exceeds twice that floor and reported as None when fewer than two qualify.
    """
    if chain not in CHAINS:
        raise ValueError(f"chain must be one of {CHAINS}")
    n_list = sorted(int(n) for n in n_list)
    if n_list[0] < 1:
        raise ValueError("n_list entries must be >= 1")
    (init_a, init_b) = init_pair

    if chain == "X":
        grid = increment_grid(kernel, bins if np.isscalar(bins) and bins else 64)
        arms = []
        for arm, (x_init, sub) in enumerate(((init_a, 1), (init_b, 2), (init_a, 3))):
            x0 = x_init[1] if np.ndim(x_init) else float(x_init)
            states = chain_states(kernel, x0, n_list, replicates, seed * 4 + sub)
            arms.append([empirical_law(states[:, i], grid) for i in range(len(n_list))])
        laws_a, laws_b, laws_c = arms
        completed = np.ones(3)
    else:
        mirrored = chain == "U_mirrored"
        if chain == "O":
            lower = upper = 0.0
            grid = overshoot_grid(kernel, bins if bins is not None else 64)
        elif chain == "Z":
            lower = upper = 0.0
            grid = overshoot_pair_grid(kernel, bins if bins is not None else (4, 2))
        else:
            if thr is None:
                raise ValueError("thresholds required for crossing chains")
            lower, upper = thr.lower, thr.upper
            grid = u_chain_grid(thr, kernel, bins or 6, m_max, mirrored=mirrored)
        weak = bool(thr and thr.boundary == "weak")
        n_max = n_list[-1]
        batches = []
        for arm, (init, sub) in enumerate(((init_a, 1), (init_b, 2), (init_a, 3))):
            s0, x0 = float(init[0]), float(init[1])
            batches.append(run_cycles(kernel, lower, upper, weak=weak, mirrored=mirrored,
                                      s0=s0, x0=x0, n_cycles=n_max, replicates=replicates,
                                      seed=seed * 4 + sub, step_cap=step_cap, workers=workers))
        completed = np.array([b.completed(n_max).mean() for b in batches])
        laws_a, laws_b, laws_c = (
            [empirical_law(_cycle_samples(b, chain, n), grid) for n in n_list]
            for b in batches
        )

    tv = np.array([tv_distance(a, b) for a, b in zip(laws_a, laws_b)])
    stderr = np.array([tv_noise_scale(a, b) for a, b in zip(laws_a, laws_b)])
    control = np.array([tv_distance(a, c) for a, c in zip(laws_a, laws_c)])
    floor = float(np.mean(control))
    rate, fit_window = fit_decay_rate(n_list, tv, floor)
    return TvSeries(indices=np.array(n_list), tv=tv, stderr=stderr, control_tv=control,
                    noise_floor=floor, fitted_rate=rate, fit_window=fit_window,
                    meta={"chain": chain, "replicates": replicates,
                          "completed_fraction": completed.tolist(),
                          "grid": [e.tolist() for e in grid],
                          "insufficient_replicates": rate is None})


# -- averages and regeneration ---------------------------------------------------


def lln_average(values) -> np.ndarray:
    """Running means of a sequence (the ergodic-average trace)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptyInputError("lln_average needs a nonempty sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("lln_average requires finite values")
    return np.cumsum(arr) / np.arange(1, arr.size + 1)


def batch_means_stderr(values, n_batches: Optional[int] = None) -> float:
    """Standard error of the mean of an autocorrelated cycle sequence.

    Batch means over contiguous cycle blocks; block count scales like sqrt(n)
    so blocks outgrow the chain's short-range dependence.
    """
    arr = np.asarray(values, dtype=float)
    n = arr.size
    if n < 4:
        return float(np.std(arr, ddof=1) / np.sqrt(n)) if n > 1 else np.inf
    nb = n_batches or int(np.clip(np.sqrt(n), 2, 256))
    bs = n // nb
    means = arr[: nb * bs].reshape(nb, bs).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(nb))


@dataclass(frozen=True)
class BlockStats:
    """Regeneration blocks of a walk: step runs delimited by regenerations."""

    count: int
    lengths: np.ndarray
    mean_length: float
    block_sums: Optional[np.ndarray]


def regeneration_blocks(path: WalkPath, values=None) -> BlockStats:
    """Split a path into blocks starting at each regenerated step.

    Because a regenerated increment is drawn independently of the past, the
    block structure supports regenerative variance estimates for functionals
    of the increment chain.  ``values`` (one per step) are summed per block.
    """
    flags = np.asarray(path.regen_flags, dtype=bool)
    n = flags.size
    starts = np.flatnonzero(flags)
    if starts.size == 0 or starts[0] != 0:
        starts = np.concatenate(([0], starts))
    ends = np.concatenate((starts[1:], [n]))
    lengths = ends - starts
    sums = None
    if values is not None:
        vals = np.asarray(values, dtype=float)
        if vals.size != n:
            raise ValueError("values must align with path steps")
        csum = np.concatenate(([0.0], np.cumsum(vals)))
        sums = csum[ends] - csum[starts]
    return BlockStats(count=int(lengths.size), lengths=lengths,
                      mean_length=float(lengths.mean()), block_sums=sums)


def irwin_hall_pdf(m: int, t):
    """Density of a sum of m independent Unif[0,1] variables (0 outside [0, m])."""
    return irwin_hall.pdf(m, t)


# -- minorization bounds -----------------------------------------------------------


@dataclass(frozen=True)
class UBox:
    """Product box in the crossing-cycle state space times a duration set."""

    x_at_t: tuple[float, float]
    s_at_t: tuple[float, float]
    x_at_l: tuple[float, float]
    s_at_l: tuple[float, float]
    durations: tuple[int, ...]


@dataclass(frozen=True)
class ZBox:
    """Product box in the overshoot-pair state space."""

    x_at_l: tuple[float, float]
    o: tuple[float, float]


@dataclass(frozen=True)
class MinorizationBound:
    gamma_tilde: float
    j_truncation: int
    omega: np.ndarray
    value: float


def _tail_weighted_min_series(alpha: float, lo: float, hi: float,
                              rtol: float = 1e-12, j_start: int = 2,
                              j_cap: int = 512):
    """sum_{j>=j_start} (alpha/2)**j * min f_{j-1} on [lo, hi], truncated.

    Truncates once the geometric tail bound (densities are at most 1) drops
    below rtol of the partial sum.
    """
    ratio = alpha / 2.0
    total = 0.0
    omegas = []
    j = j_start
    while j <= j_cap:
        w = irwin_hall.min_on_interval(j - 1, lo, hi)
        omegas.append(w)
        total += ratio ** j * w
        tail = ratio ** (j + 1) / (1.0 - ratio)
        if total > 0.0 and tail < rtol * total:
            break
        j += 1
    return total, j, np.array(omegas)


def _gl_nodes(a: float, b: float, kinks, panels: int, order: int = 8):
    """Composite Gauss-Legendre nodes/weights on [a, b] split at interior kinks."""
    if b <= a:
        return np.empty(0), np.empty(0)
    pts = [a] + sorted(k for k in kinks if a < k < b) + [b]
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in zip(pts[:-1], pts[1:]):
        edges = np.linspace(lo, hi, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes.append((mid[:, None] + half[:, None] * base_x[None, :]).ravel())
        weights.append((half[:, None] * base_w[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def kappa_tilde(thr: Thresholds, alpha: float, h: float, M: float,
                gamma_tilde: float, box: UBox, *, rel_tol: float = 1e-6) -> MinorizationBound:
    """Explicit lower-bound measure of a box for the crossing-cycle kernel.

    The x-at-first-event coordinate integrates out to a piecewise-linear
    strip length and the s-at-second-event coordinate to a difference of
    uniform-sum CDFs, leaving a 2-d quadrature that is refined until stable.
    """
    lo_gap = (thr.upper - thr.lower) / h
    if not (0.0 < gamma_tilde < min(lo_gap, 1.0)):
        raise InvalidSpecError("gamma_tilde", "must lie in (0, min((upper-lower)/h, 1))")
    jsum, j_trunc, omegas = _tail_weighted_min_series(
        alpha, lo_gap - gamma_tilde, lo_gap + M / h)
    bound = MinorizationBound(gamma_tilde=gamma_tilde, j_truncation=j_trunc,
                              omega=omegas, value=0.0)
    if jsum <= 0.0:
        return bound

    x1_lo, x1_hi = max(box.x_at_t[0], -h), min(box.x_at_t[1], 0.0)
    x2_lo, x2_hi = box.s_at_t[0], min(box.s_at_t[1], thr.lower)
    x3_lo, x3_hi = max(box.x_at_l[0], 0.0), min(box.x_at_l[1], h)
    x4_lo, x4_hi = max(box.s_at_l[0], thr.upper), min(box.s_at_l[1], thr.upper + M)
    if x1_hi <= x1_lo or x2_hi <= x2_lo or x3_hi <= x3_lo or x4_hi <= x4_lo:
        return bound
    # the strip confines x2 to [lower + x1_lo, lower + gamma*h + x1_hi]
    x2_lo = max(x2_lo, thr.lower + x1_lo)
    x2_hi = min(x2_hi, thr.lower + gamma_tilde * h + x1_hi)
    if x2_hi <= x2_lo:
        return bound

    def strip_len(x2):
        lo = np.maximum(x1_lo, x2 - thr.lower - gamma_tilde * h)
        hi = np.minimum(x1_hi, x2 - thr.lower)
        return np.maximum(0.0, hi - lo)

    x2_kinks = [x1_lo + thr.lower, x1_hi + thr.lower,
                x1_lo + thr.lower + gamma_tilde * h, x1_hi + thr.lower + gamma_tilde * h]
    x3_kinks = [x4_hi - thr.upper]

    total = 0.0
    for m in box.durations:
        if m < 2:
            continue
        fm = m - 1
        prev = None
        for panels in (2, 4, 8, 16, 32, 64, 128):
            n2, w2 = _gl_nodes(x2_lo, x2_hi, x2_kinks, panels)
            n3, w3 = _gl_nodes(x3_lo, x3_hi, x3_kinks, panels)
            if n2.size == 0 or n3.size == 0:
                val = 0.0
                break
            up = np.minimum(x4_hi, thr.upper + n3)[None, :]
            lo = x4_lo
            arg_hi = (up - n3[None, :] - n2[:, None]) / h
            arg_lo = (lo - n3[None, :] - n2[:, None]) / h
            g = h * np.maximum(0.0, irwin_hall.cdf(fm, arg_hi) - irwin_hall.cdf(fm, arg_lo))
            g[np.broadcast_to(up <= lo, g.shape)] = 0.0
            val = float((w2 * strip_len(n2)) @ g @ w3)
            if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300):
                break
            prev = val
        total += (alpha / 2.0) ** m / h ** 4 * val * jsum
    return MinorizationBound(gamma_tilde=gamma_tilde, j_truncation=j_trunc,
                             omega=omegas, value=total)


def beta_measure(alpha: float, h: float, M: float, gamma_prime: float,
                 box: ZBox, *, rel_tol: float = 1e-6) -> float:
    """Explicit lower-bound measure of a box for the overshoot-pair kernel."""
    if not (0.0 < gamma_prime < 1.0):
        raise InvalidSpecError("gamma_prime", "must lie in (0, 1)")
    ratio = min(M / h, 1.0)
    lsum, _, _ = _tail_weighted_min_series(alpha, gamma_prime * ratio, M / h + ratio)
    if lsum <= 0.0:
        return 0.0
    d = gamma_prime * min(M, h)
    x_lo, x_hi = max(box.x_at_l[0], 0.0), min(box.x_at_l[1], h)
    o_lo, o_hi = max(box.o[0], 0.0), min(box.o[1], h)
    if x_hi <= x_lo or o_hi <= o_lo:
        return 0.0

    def seg_len(x1):
        return np.maximum(0.0, np.minimum(o_hi, x1 - d) - o_lo)

    kinks = [o_lo + d, o_hi + d]
    prev = None
    val = 0.0
    for panels in (1, 2, 4):
        nx, wx = _gl_nodes(x_lo, x_hi, kinks, panels, order=4)
        val = float(np.dot(wx, seg_len(nx)))
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300):
            break
        prev = val
    return lsum * val


# -- empirical minorization verification ---------------------------------------------


@dataclass
class MinorizationCheck:
    probe: tuple[float, float]
    box: object
    empirical: float
    stderr: float
    bound: float
    inflated_bound: float
    violation: bool
    n_effective: int
    incomplete_fraction: float
    stderr_ok: bool


@dataclass
class MinorizationReport:
    chain: str
    gamma: float
    inflate: float
    replicates: int
    checks: list
    n_violations: int

    def to_rows(self) -> list[dict]:
        return [
            {
                "probe": list(c.probe),
                "box": _box_dict(c.box),
                "empirical": c.empirical,
                "stderr": c.stderr,
                "bound": c.bound,
                "inflated_bound": c.inflated_bound,
                "violation": c.violation,
                "n_effective": c.n_effective,
                "incomplete_fraction": c.incomplete_fraction,
                "stderr_ok": c.stderr_ok,
            }
            for c in self.checks
        ]


def _box_dict(box) -> dict:
    if isinstance(box, ZBox):
        return {"x_at_l": list(box.x_at_l), "o": list(box.o)}
    return {"x_at_t": list(box.x_at_t), "s_at_t": list(box.s_at_t),
            "x_at_l": list(box.x_at_l), "s_at_l": list(box.s_at_l),
            "durations": list(box.durations)}


def verify_minorization(kernel: Kernel, thr: Optional[Thresholds], chain: str,
                        probe_states: Sequence[tuple[float, float]],
                        boxes: Sequence, replicates: int, seed: int, *,
                        gamma: Optional[float] = None, inflate: float = 1.0,
                        step_cap: int = 1 << 14, workers: int = 1) -> MinorizationReport:
    """Check empirically that one-step box probabilities dominate the bound.

    Each probe state is the (increment, level) pair left by the previous
    cycle; one further cycle is simulated per replicate and the hit frequency
    of each box is compared against ``inflate * bound - 3 * stderr``.
    Replicates that miss the step cap count as misses, which can only make
    the check harder, never easier.  Violations are data, not errors.
    """
    if chain not in ("U", "Z"):
        raise ValueError("chain must be 'U' or 'Z'")
    alpha, h, M = kernel.alpha, kernel.regen_width, kernel.bound
    if chain == "U":
        if thr is None:
            raise ValueError("thresholds required for the crossing-cycle chain")
        gamma = gamma if gamma is not None else min((thr.upper - thr.lower) / h, 1.0) / 2.0
        lower, upper = thr.lower, thr.upper
        for x_l, s_l in probe_states:
            if not (0.0 < x_l <= M and upper < s_l < upper + M and s_l - x_l <= upper):
                raise ValueError(f"probe {(x_l, s_l)} outside the chain state space")
        bounds = [kappa_tilde(thr, alpha, h, M, gamma, b).value for b in boxes]
    else:
        gamma = gamma if gamma is not None else 0.5
        lower = upper = 0.0
        for x_l, o in probe_states:
            if not (0.0 < o <= x_l <= M):
                raise ValueError(f"probe {(x_l, o)} outside the overshoot state space")
        bounds = [beta_measure(alpha, h, M, gamma, b) for b in boxes]

    checks = []
    for p_i, (x_p, s_p) in enumerate(probe_states):
        batch = run_cycles(kernel, lower, upper, s0=s_p, x0=x_p, n_cycles=1,
                           replicates=replicates, seed=seed * 101 + p_i,
                           step_cap=step_cap, workers=workers)
        ok = batch.completed(1)
        incomplete = 1.0 - float(ok.mean())
        x_t, s_t = batch.x_first[:, 0], batch.s_first[:, 0]
        x_l, s_l = batch.x_second[:, 0], batch.s_second[:, 0]
        dur = batch.durations[:, 0]
        for b_i, box in enumerate(boxes):
            if chain == "U":
                hit = (ok
                       & (box.x_at_t[0] <= x_t) & (x_t <= box.x_at_t[1])
                       & (box.s_at_t[0] <= s_t) & (s_t <= box.s_at_t[1])
                       & (box.x_at_l[0] <= x_l) & (x_l <= box.x_at_l[1])
                       & (box.s_at_l[0] <= s_l) & (s_l <= box.s_at_l[1])
                       & np.isin(dur, box.durations))
            else:
                hit = (ok
                       & (box.x_at_l[0] <= x_l) & (x_l <= box.x_at_l[1])
                       & (box.o[0] <= s_l) & (s_l <= box.o[1]))
            p_hat = float(hit.mean())
            stderr = float(np.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / replicates))
            bnd = bounds[b_i]
            infl = inflate * bnd
            checks.append(MinorizationCheck(
                probe=(float(x_p), float(s_p)), box=box, empirical=p_hat,
                stderr=stderr, bound=bnd, inflated_bound=infl,
                violation=bool(p_hat < infl - 3.0 * stderr),
                n_effective=int(ok.sum()), incomplete_fraction=incomplete,
                stderr_ok=bool(bnd == 0.0 or stderr < bnd / 5.0)))
    return MinorizationReport(chain=chain, gamma=float(gamma), inflate=float(inflate),
                              replicates=replicates, checks=checks,
                              n_violations=sum(c.violation for c in checks))
