"""Replicated cycle simulation (internal plumbing).

Two drivers cover every experiment in the package:

* ``run_cycles`` advances many independent walks and collects their first K
  completed crossing cycles.  Work is sharded into fixed-size replicate
  blocks, each with its own child seed, so results are byte-identical for a
  given (seed, replicates) regardless of worker count.  Built-in kernels run
  through a compiled per-replicate loop over pre-drawn uniform chunks; other
  objects exposing ``step_batch`` fall back to a numpy lockstep sweep, which
  doubles as the reference implementation in tests.
* ``stream_records`` follows a single long walk in chunks and yields crossing
  records until a target count or a step budget is hit; used for time-average
  objectives where the law of large numbers lives on one trajectory.

Replicates that do not finish within the step cap are reported, not silently
dropped: callers decide whether a partial replicate biases their statistic.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .kernels import Kernel
from .walk import CrossingRecord

BLOCK_SIZE = 1 << 14
CHUNK_STEPS = 256

__all__ = ["CycleBatch", "run_cycles", "count_cycles", "chain_states", "stream_records"]

_FAMILY_IDS = {"iid_uniform": 0, "state_shape": 1, "one_sided_exp": 2}
_TINY = np.finfo(float).tiny


@njit(cache=True, inline="always")
def _step_inline(family, xi, u, v, alpha, w, M, p1, p2):
    if v < alpha:
        return w * (2.0 * u - 1.0)
    if family == 0:
        c = p1
        one = 1.0 - alpha
        tail = 2.0 * c * one
        m1 = (c - w) / tail
        dmid = (1.0 / (2.0 * c) - alpha / (2.0 * w)) / one
        m2 = 2.0 * w * dmid
        if u <= m1:
            return -c + u * tail
        if u <= m1 + m2:
            return -w + (u - m1) / dmid if dmid > 0.0 else -w
        return w + (u - m1 - m2) * tail
    if family == 1:
        z = (xi + M) / (2.0 * M)
        if z < 0.0:
            z = 0.0
        elif z > 1.0:
            z = 1.0
        return (w + (M - w) * z) * (2.0 * u - 1.0)
    wq = p1 + (p2 - p1) / (1.0 + np.exp(-xi))
    lam = 2.0 * (1.0 - wq) / (wq * M)
    if u < 1.0 - wq:
        uf = u if u > _TINY else _TINY
        return np.log(uf / (1.0 - wq)) / lam
    return (u - (1.0 - wq)) / wq * M


@njit(cache=True)
def _advance_chunk(family, alpha, w, M, p1, p2, lower, upper, weak, mirrored,
                   alive, u2, v2, x, s, phase, pend_idx, pend_x, pend_s,
                   live_counts, steps_done, first_idx, second_idx,
                   x_first, s_first, x_second, s_second, n_cycles, step_cap):
    n, chunk = u2.shape
    for k in range(n):
        i = alive[k]
        xi = x[i]
        si = s[i]
        ph = phase[i]
        cnt = live_counts[i]
        st = steps_done[i]
        pi = pend_idx[i]
        px = pend_x[i]
        ps = pend_s[i]
        for t in range(chunk):
            if st >= step_cap or cnt >= n_cycles:
                break
            st += 1
            xi = _step_inline(family, xi, u2[k, t], v2[k, t], alpha, w, M, p1, p2)
            si += xi
            if mirrored:
                ended = ph == 1 and ((si <= lower) if weak else (si < lower))
                started = ph == 0 and ((si >= upper) if weak else (si > upper))
            else:
                ended = ph == 1 and ((si >= upper) if weak else (si > upper))
                started = ph == 0 and ((si <= lower) if weak else (si < lower))
            if ended:
                first_idx[i, cnt] = pi
                second_idx[i, cnt] = st
                x_first[i, cnt] = px
                s_first[i, cnt] = ps
                x_second[i, cnt] = xi
                s_second[i, cnt] = si
                cnt += 1
                ph = 0
            elif started:
                pi = st
                px = xi
                ps = si
                ph = 1
        x[i] = xi
        s[i] = si
        phase[i] = ph
        live_counts[i] = cnt
        steps_done[i] = st
        pend_idx[i] = pi
        pend_x[i] = px
        pend_s[i] = ps


def _kernel_consts(kernel: Kernel):
    family = _FAMILY_IDS[kernel.spec.family]
    p1 = kernel._c if family == 0 else kernel._w_min
    p2 = kernel._w_max
    return family, kernel.alpha, kernel.regen_width, kernel.bound, p1, p2


def _block_cycles_fast(kernel: Kernel, lower: float, upper: float, weak: bool,
                       mirrored: bool, s0: float, x0: float, n_cycles: int,
                       r: int, seed_key: tuple, step_cap: int):
    family, alpha, w, M, p1, p2 = _kernel_consts(kernel)
    rng = np.random.default_rng(np.random.SeedSequence(seed_key))
    first_idx = np.full((r, n_cycles), -1, np.int64)
    second_idx = np.full((r, n_cycles), -1, np.int64)
    x_first = np.full((r, n_cycles), np.nan)
    s_first = np.full((r, n_cycles), np.nan)
    x_second = np.full((r, n_cycles), np.nan)
    s_second = np.full((r, n_cycles), np.nan)
    x = np.full(r, float(x0))
    s = np.full(r, float(s0))
    phase = np.zeros(r, np.int8)
    pend_idx = np.zeros(r, np.int64)
    pend_x = np.zeros(r)
    pend_s = np.zeros(r)
    live_counts = np.zeros(r, np.int64)
    steps_done = np.zeros(r, np.int64)
    alive = np.arange(r)
    while alive.size:
        u2 = rng.random((alive.size, CHUNK_STEPS))
        v2 = rng.random((alive.size, CHUNK_STEPS))
        _advance_chunk(family, alpha, w, M, p1, p2, float(lower), float(upper),
                       weak, mirrored, alive, u2, v2, x, s, phase,
                       pend_idx, pend_x, pend_s, live_counts, steps_done,
                       first_idx, second_idx, x_first, s_first, x_second, s_second,
                       n_cycles, step_cap)
        alive = alive[(live_counts[alive] < n_cycles) & (steps_done[alive] < step_cap)]
    return live_counts, first_idx, second_idx, x_first, s_first, x_second, s_second


@dataclass
class CycleBatch:
    """First/second crossing events for K cycles of R replicates.

    For long mode the first event is the down-cross (T) and the second the
    up-cross (L); mirrored mode swaps the roles.  Rows with counts[i] < K
    hit the step cap early; their trailing slots are NaN.
    """

    counts: np.ndarray       # (R,) completed cycles
    first_idx: np.ndarray    # (R, K) step of the first event
    second_idx: np.ndarray   # (R, K)
    x_first: np.ndarray
    s_first: np.ndarray
    x_second: np.ndarray
    s_second: np.ndarray
    step_cap: int

    @property
    def durations(self) -> np.ndarray:
        return self.second_idx - self.first_idx

    def completed(self, k: int) -> np.ndarray:
        """Mask of replicates with at least k completed cycles."""
        return self.counts >= k


def _block_cycles_lockstep(kernel, lower: float, upper: float, weak: bool,
                           mirrored: bool, s0: float, x0: float, n_cycles: int,
                           r: int, seed_key: tuple, step_cap: int):
    rng = np.random.default_rng(np.random.SeedSequence(seed_key))
    k_slots = n_cycles
    counts = np.zeros(r, np.int64)
    first_idx = np.full((r, k_slots), -1, np.int64)
    second_idx = np.full((r, k_slots), -1, np.int64)
    x_first = np.full((r, k_slots), np.nan)
    s_first = np.full((r, k_slots), np.nan)
    x_second = np.full((r, k_slots), np.nan)
    s_second = np.full((r, k_slots), np.nan)

    pos = np.arange(r)                    # original row of each live replicate
    x = np.full(r, float(x0))
    s = np.full(r, float(s0))
    phase = np.zeros(r, np.int8)
    pend_idx = np.zeros(r, np.int64)
    pend_x = np.zeros(r)
    pend_s = np.zeros(r)
    live_counts = np.zeros(r, np.int64)

    def below(a):
        return a <= lower if weak else a < lower

    def above(a):
        return a >= upper if weak else a > upper

    step = 0
    while pos.size and step < step_cap:
        step += 1
        n = pos.size
        u = rng.random(n)
        v = rng.random(n)
        inc = kernel.step_batch(x, u, v)
        s = s + inc
        x = inc

        if mirrored:
            ended = (phase == 1) & below(s)
            started = (phase == 0) & ~ended & above(s)
        else:
            ended = (phase == 1) & above(s)
            started = (phase == 0) & ~ended & below(s)

        if np.any(ended):
            rows = pos[ended]
            slot = live_counts[ended]
            first_idx[rows, slot] = pend_idx[ended]
            x_first[rows, slot] = pend_x[ended]
            s_first[rows, slot] = pend_s[ended]
            second_idx[rows, slot] = step
            x_second[rows, slot] = x[ended]
            s_second[rows, slot] = s[ended]
            live_counts[ended] += 1
            phase[ended] = 0
        if np.any(started):
            pend_idx[started] = step
            pend_x[started] = x[started]
            pend_s[started] = s[started]
            phase[started] = 1

        done = live_counts >= k_slots
        if np.any(done):
            counts[pos[done]] = live_counts[done]
            keep = ~done
            pos, x, s, phase = pos[keep], x[keep], s[keep], phase[keep]
            pend_idx, pend_x, pend_s = pend_idx[keep], pend_x[keep], pend_s[keep]
            live_counts = live_counts[keep]
    counts[pos] = live_counts
    return counts, first_idx, second_idx, x_first, s_first, x_second, s_second


def run_cycles(kernel, lower: float, upper: float, *, weak: bool = False,
               mirrored: bool = False, s0: float = 0.0, x0: float = 0.0,
               n_cycles: int, replicates: int, seed: int, step_cap: int,
               workers: int = 1, block_size: int = BLOCK_SIZE) -> CycleBatch:
    """Collect the first n_cycles crossing cycles of each replicate."""
    fast = isinstance(kernel, Kernel)
    blocks = [(b, min(block_size, replicates - b * block_size))
              for b in range((replicates + block_size - 1) // block_size)]
    args = [(fast, kernel, lower, upper, weak, mirrored, s0, x0, n_cycles, r,
             (seed, b), step_cap) for b, r in blocks]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_block_cycles_star, args))
    else:
        parts = [_block_cycles_star(a) for a in args]
    out = CycleBatch(
        counts=np.concatenate([p[0] for p in parts]),
        first_idx=np.concatenate([p[1] for p in parts]),
        second_idx=np.concatenate([p[2] for p in parts]),
        x_first=np.concatenate([p[3] for p in parts]),
        s_first=np.concatenate([p[4] for p in parts]),
        x_second=np.concatenate([p[5] for p in parts]),
        s_second=np.concatenate([p[6] for p in parts]),
        step_cap=step_cap,
    )
    return out


def _block_cycles_star(a):
    fast, rest = a[0], a[1:]
    return _block_cycles_fast(*rest) if fast else _block_cycles_lockstep(*rest)


def count_cycles(kernel: Kernel, lower: float, upper: float, *, weak: bool = False,
                 mirrored: bool = False, s0: float = 0.0, x0: float = 0.0,
                 replicates: int, seed: int, checkpoints: list[int],
                 block_size: int = BLOCK_SIZE) -> np.ndarray:
    """Completed-cycle counts of each replicate at the given step checkpoints."""
    checkpoints = sorted(checkpoints)
    out = np.zeros((replicates, len(checkpoints)), np.int64)
    offset = 0
    n_blocks = (replicates + block_size - 1) // block_size
    for b in range(n_blocks):
        r = min(block_size, replicates - b * block_size)
        rng = np.random.default_rng(np.random.SeedSequence((seed, b)))
        x = np.full(r, float(x0))
        s = np.full(r, float(s0))
        phase = np.zeros(r, np.int8)
        counts = np.zeros(r, np.int64)
        ci = 0
        for step in range(1, checkpoints[-1] + 1):
            u = rng.random(r)
            v = rng.random(r)
            inc = kernel.step_batch(x, u, v)
            s = s + inc
            x = inc
            if mirrored:
                ended = (phase == 1) & ((s <= lower) if weak else (s < lower))
                started = (phase == 0) & ~ended & ((s >= upper) if weak else (s > upper))
            else:
                ended = (phase == 1) & ((s >= upper) if weak else (s > upper))
                started = (phase == 0) & ~ended & ((s <= lower) if weak else (s < lower))
            counts[ended] += 1
            phase[ended] = 0
            phase[started] = 1
            if step == checkpoints[ci]:
                out[offset:offset + r, ci] = counts
                ci += 1
        offset += r
    return out


def chain_states(kernel: Kernel, x0: float, snapshots: list[int], replicates: int,
                 seed: int, block_size: int = BLOCK_SIZE) -> np.ndarray:
    """States X_n of the increment chain at the snapshot steps, per replicate."""
    snapshots = sorted(snapshots)
    out = np.empty((replicates, len(snapshots)))
    offset = 0
    n_blocks = (replicates + block_size - 1) // block_size
    for b in range(n_blocks):
        r = min(block_size, replicates - b * block_size)
        rng = np.random.default_rng(np.random.SeedSequence((seed, b)))
        x = np.full(r, float(x0))
        si = 0
        for step in range(1, snapshots[-1] + 1):
            u = rng.random(r)
            v = rng.random(r)
            x = kernel.step_batch(x, u, v)
            if step == snapshots[si]:
                out[offset:offset + r, si] = x
                si += 1
        offset += r
    return out


def stream_records(kernel: Kernel, lower: float, upper: float, *, weak: bool = False,
                   mirrored: bool = False, s0: float = 0.0, x0: float = 0.0,
                   seed: int, max_records: int, step_cap: int,
                   chunk: int = 1 << 16) -> tuple[list[CrossingRecord], int]:
    """Crossing records of one long walk, simulated in chunks.

    Returns (records, steps_used); stops at max_records complete records or
    at the step cap, whichever comes first.
    """
    rng = np.random.default_rng(seed)
    records: list[CrossingRecord] = []
    x = float(x0)
    s_carry = float(s0)
    phase = 0
    pend = (0, 0.0, 0.0)
    offset = 0
    while len(records) < max_records and offset < step_cap:
        n = int(min(chunk, step_cap - offset))
        u = rng.random(n)
        v = rng.random(n)
        inc, _ = kernel.scan(x, u, v)
        sums = np.cumsum(np.concatenate(([s_carry], inc)))[1:]
        if mirrored:
            first_cond = (sums >= upper) if weak else (sums > upper)
            second_cond = (sums <= lower) if weak else (sums < lower)
        else:
            first_cond = (sums <= lower) if weak else (sums < lower)
            second_cond = (sums >= upper) if weak else (sums > upper)
        firsts = np.flatnonzero(first_cond)
        seconds = np.flatnonzero(second_cond)
        cursor = -1  # local index of the last consumed event
        while len(records) < max_records:
            if phase == 0:
                i = np.searchsorted(firsts, cursor + 1)
                if i == firsts.size:
                    break
                t_loc = int(firsts[i])
                pend = (offset + t_loc + 1, float(inc[t_loc]), float(sums[t_loc]))
                phase = 1
                cursor = t_loc
            else:
                j = np.searchsorted(seconds, cursor + 1)
                if j == seconds.size:
                    break
                l_loc = int(seconds[j])
                idx = len(records) + 1
                p_idx, p_x, p_s = pend
                a_idx = offset + l_loc + 1
                if mirrored:
                    rec = CrossingRecord(index=idx, t_idx=a_idx, l_idx=p_idx,
                                         x_at_t=float(inc[l_loc]), s_at_t=float(sums[l_loc]),
                                         x_at_l=p_x, s_at_l=p_s,
                                         duration=a_idx - p_idx, in_state_space=idx >= 2)
                else:
                    rec = CrossingRecord(index=idx, t_idx=p_idx, l_idx=a_idx,
                                         x_at_t=p_x, s_at_t=p_s,
                                         x_at_l=float(inc[l_loc]), s_at_l=float(sums[l_loc]),
                                         duration=a_idx - p_idx, in_state_space=idx >= 2)
                records.append(rec)
                phase = 0
                cursor = l_loc
        x = float(inc[-1])
        s_carry = float(sums[-1])
        offset += n
    return records, offset
