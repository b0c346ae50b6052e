"""Markovian increment kernels with a uniform regeneration component.

Every family decomposes its one-step law from state x as

    P(x, .) = alpha * ell + (1 - alpha) * q(x, .),

where ell is the normalized Lebesgue measure on [-w, w] (w = ``regen_width``)
and q is the family's residual kernel.  Sampling goes through the split
representation: with two independent uniforms (u, v), the step regenerates to
w*(2u - 1) when v < alpha and otherwise applies the residual inverse CDF.
All families have conditionally zero-mean increments by construction and
one-step support contained in (-inf, bound] (``one_sided_exp``) or
[-bound, bound] (the others).

The paper behind this library never exhibits a concrete kernel; the three
families here are our own constructions chosen to cover the i.i.d. case, a
genuinely state-dependent bounded case, and a one-sided unbounded case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from numba import njit

from .errors import DegenerateKernelError, InvalidSpecError

__all__ = [
    "FAMILIES",
    "KernelSpec",
    "SplitDraw",
    "Kernel",
    "build_kernel",
    "split_step",
    "residual_inverse_cdf",
    "check_zero_mean",
    "default_specs",
]

FAMILIES = ("iid_uniform", "state_shape", "one_sided_exp")

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class KernelSpec:
    """Declarative description of an increment kernel.

    alpha: weight of the regenerating uniform component, in (0, 1).
    regen_width: half-width of that component (the minorization interval).
    bound: upper bound of one-step increments; state space is (-inf, bound]
        for ``one_sided_exp`` and [-bound, bound] otherwise.
    shape_params: family-specific extras, see ``build_kernel``.
    """

    family: str
    alpha: float
    regen_width: float
    bound: float
    shape_params: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class SplitDraw:
    """One (u, v) pair driving a split step; regenerated iff v < alpha."""

    u: float
    v: float
    regenerated: bool


def build_kernel(spec: KernelSpec) -> "Kernel":
    """Validate a spec and return the corresponding sampler.

    Raises :class:`InvalidSpecError` naming the offending field.
    """
    if spec.family not in FAMILIES:
        raise InvalidSpecError("family", f"unknown family {spec.family!r}")
    if not (0.0 < spec.alpha < 1.0):
        # alpha = 1 leaves the residual kernel undefined and the chain would
        # be plain i.i.d. uniform; reject it outright.
        raise InvalidSpecError("alpha", "must lie in (0, 1) for split-form families")
    if not spec.regen_width > 0.0:
        raise InvalidSpecError("regen_width", "must be positive")
    if not spec.bound > 0.0:
        raise InvalidSpecError("bound", "must be positive")
    if spec.regen_width > spec.bound:
        raise InvalidSpecError("regen_width", "must not exceed bound")

    params = dict(spec.shape_params)
    if spec.family == "iid_uniform":
        c = float(params.pop("half_width", spec.bound))
        if params:
            raise InvalidSpecError("shape_params", f"unknown keys {sorted(params)}")
        if not (spec.regen_width <= c <= spec.bound):
            raise InvalidSpecError("shape_params.half_width", "needs regen_width <= half_width <= bound")
        if spec.alpha > spec.regen_width / c + 1e-15:
            raise InvalidSpecError("alpha", "minorization fails: alpha must be <= regen_width / half_width")
        return Kernel(spec=spec, _c=c, support=(-c, c))
    if spec.family == "state_shape":
        if params:
            raise InvalidSpecError("shape_params", f"unknown keys {sorted(params)}")
        return Kernel(spec=spec, support=(-spec.bound, spec.bound))
    # one_sided_exp
    w_min = float(params.pop("up_weight_min", 0.35))
    w_max = float(params.pop("up_weight_max", 0.65))
    if params:
        raise InvalidSpecError("shape_params", f"unknown keys {sorted(params)}")
    if not (0.0 < w_min <= w_max < 1.0):
        raise InvalidSpecError("shape_params.up_weight_min", "need 0 < up_weight_min <= up_weight_max < 1")
    return Kernel(spec=spec, _w_min=w_min, _w_max=w_max, support=(-np.inf, spec.bound))


def default_specs() -> dict[str, KernelSpec]:
    """The three built-in kernel presets used throughout tests and demos."""
    return {
        "iid_uniform": KernelSpec("iid_uniform", alpha=0.5, regen_width=0.5, bound=1.0,
                                  shape_params={"half_width": 1.0}),
        "state_shape": KernelSpec("state_shape", alpha=0.3, regen_width=0.2, bound=1.0),
        "one_sided_exp": KernelSpec("one_sided_exp", alpha=0.3, regen_width=0.3, bound=1.0),
    }


@dataclass(frozen=True)
class Kernel:
    """Immutable sampler for one increment family.

    Safe to share across workers: all randomness enters through explicit
    (u, v) arguments or an explicitly passed Generator.
    """

    spec: KernelSpec
    support: tuple[float, float]
    _c: float = 0.0
    _w_min: float = 0.0
    _w_max: float = 0.0

    @property
    def alpha(self) -> float:
        return self.spec.alpha

    @property
    def regen_width(self) -> float:
        return self.spec.regen_width

    @property
    def bound(self) -> float:
        return self.spec.bound

    @property
    def bounded_below(self) -> bool:
        return np.isfinite(self.support[0])

    # -- split representation ------------------------------------------------

    def residual_inverse_cdf(self, x, u):
        """Pseudoinverse of the residual CDF q(x, (-inf, .]); vectorized.

        Monotone nondecreasing in u for fixed x.  Raises
        :class:`DegenerateKernelError` when alpha = 1.
        """
        if self.spec.alpha >= 1.0:
            raise DegenerateKernelError("residual kernel undefined for alpha = 1")
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        fam = self.spec.family
        if fam == "iid_uniform":
            out = _iid_residual_inv(u, self._c, self.regen_width, self.alpha)
        elif fam == "state_shape":
            out = _shape_halfwidth(x, self.regen_width, self.bound) * (2.0 * u - 1.0)
        else:
            out = _one_sided_residual_inv(x, u, self.bound, self._w_min, self._w_max)
        return float(out) if out.ndim == 0 else out

    def split_step(self, x, u, v):
        """One split step: (next_increment, regenerated); vectorized."""
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        regen = v < self.alpha
        inc = np.where(regen, self.regen_width * (2.0 * u - 1.0),
                       self.residual_inverse_cdf(x, u))
        if inc.ndim == 0:
            return float(inc), bool(regen)
        return inc, regen

    def step_batch(self, x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Increment array for a lockstep batch of chains (no regen flags)."""
        inc, _ = self.split_step(x, u, v)
        return inc

    def scan(self, x0: float, u: np.ndarray, v: np.ndarray):
        """Drive the chain through a (u, v) sequence starting at state x0.

        Returns (increments, regen_flags).  Sequential in the state for the
        Markov families, vectorized for ``iid_uniform``.
        """
        fam = self.spec.family
        if fam == "iid_uniform":
            return self.split_step(np.zeros_like(u), u, v)
        if fam == "state_shape":
            return _scan_state_shape(float(x0), u, v, self.alpha, self.regen_width, self.bound)
        return _scan_one_sided(float(x0), u, v, self.alpha, self.regen_width,
                               self.bound, self._w_min, self._w_max)

    # -- direct composition sampling (dual route for tests) -------------------

    def direct_sample(self, x: float, rng: np.random.Generator, n: int) -> np.ndarray:
        """Sample the one-step law from x without the inverse-CDF machinery.

        Draws the mixture alpha*ell + (1-alpha)*q componentwise with the
        Generator's own distribution methods; exists so tests can compare two
        independent sampling routes.
        """
        alpha, w, M = self.alpha, self.regen_width, self.bound
        regen = rng.random(n) < alpha
        out = np.empty(n)
        k = int(regen.sum())
        out[regen] = rng.uniform(-w, w, k)
        m = n - k
        fam = self.spec.family
        if fam == "iid_uniform":
            # residual of Unif[-c,c] minus the uniform core: piecewise-constant
            # density; sample by inverting nothing -- accept/reject on the core.
            res = np.empty(m)
            filled = 0
            while filled < m:
                cand = rng.uniform(-self._c, self._c, (m - filled) * 2 + 16)
                dens_core = alpha / (2.0 * w)
                dens_p = 1.0 / (2.0 * self._c)
                acc_prob = np.where(np.abs(cand) <= w, (dens_p - dens_core) / dens_p, 1.0)
                keep = cand[rng.random(cand.size) < acc_prob]
                take = min(keep.size, m - filled)
                res[filled:filled + take] = keep[:take]
                filled += take
            out[~regen] = res
        elif fam == "state_shape":
            b = _shape_halfwidth(np.asarray(float(x)), w, M)
            out[~regen] = rng.uniform(-float(b), float(b), m)
        else:
            wq = self._w_min + (self._w_max - self._w_min) / (1.0 + np.exp(-float(x)))
            lam = 2.0 * (1.0 - wq) / (wq * M)
            up = rng.random(m) < wq
            vals = np.empty(m)
            vals[up] = rng.uniform(0.0, M, int(up.sum()))
            vals[~up] = -rng.exponential(1.0 / lam, int((~up).sum()))
            out[~regen] = vals
        return out


# -- family math -------------------------------------------------------------


def _shape_halfwidth(x: np.ndarray, w: float, M: float) -> np.ndarray:
    """Residual half-width b(x) = w + (M - w) * clip((x + M) / 2M, 0, 1)."""
    z = np.clip((x + M) / (2.0 * M), 0.0, 1.0)
    return w + (M - w) * z


def _iid_residual_inv(u: np.ndarray, c: float, w: float, alpha: float) -> np.ndarray:
    one = 1.0 - alpha
    tail = 2.0 * c * one  # reciprocal tail density
    m1 = (c - w) / tail
    dmid = (1.0 / (2.0 * c) - alpha / (2.0 * w)) / one
    m2 = 2.0 * w * dmid
    lowered = -c + u * tail
    raised = w + (u - m1 - m2) * tail
    if dmid > 0.0:
        middle = -w + (u - m1) / dmid
    else:
        middle = np.full_like(np.asarray(u, dtype=float), -w)
    return np.select([u <= m1, u <= m1 + m2], [lowered, middle], default=raised)


def _one_sided_residual_inv(x: np.ndarray, u: np.ndarray, M: float,
                            w_min: float, w_max: float) -> np.ndarray:
    wq = w_min + (w_max - w_min) / (1.0 + np.exp(-x))
    lam = 2.0 * (1.0 - wq) / (wq * M)
    uf = np.maximum(u, _TINY)  # keeps u = 0 finite; the law is unchanged
    neg = np.log(uf / (1.0 - wq)) / lam
    pos = (u - (1.0 - wq)) / wq * M
    return np.where(u < 1.0 - wq, neg, pos)


@njit(cache=True)
def _scan_state_shape(x0, u, v, alpha, w, M):
    n = u.size
    inc = np.empty(n)
    regen = np.empty(n, np.bool_)
    x = x0
    for i in range(n):
        if v[i] < alpha:
            x = w * (2.0 * u[i] - 1.0)
            regen[i] = True
        else:
            z = (x + M) / (2.0 * M)
            if z < 0.0:
                z = 0.0
            elif z > 1.0:
                z = 1.0
            x = (w + (M - w) * z) * (2.0 * u[i] - 1.0)
            regen[i] = False
        inc[i] = x
    return inc, regen


@njit(cache=True)
def _scan_one_sided(x0, u, v, alpha, w, M, w_min, w_max, _tiny=_TINY):
    n = u.size
    inc = np.empty(n)
    regen = np.empty(n, np.bool_)
    x = x0
    for i in range(n):
        if v[i] < alpha:
            x = w * (2.0 * u[i] - 1.0)
            regen[i] = True
        else:
            wq = w_min + (w_max - w_min) / (1.0 + np.exp(-x))
            lam = 2.0 * (1.0 - wq) / (wq * M)
            ui = u[i]
            if ui < 1.0 - wq:
                uf = ui if ui > _tiny else _tiny
                x = np.log(uf / (1.0 - wq)) / lam
            else:
                x = (ui - (1.0 - wq)) / wq * M
            regen[i] = False
        inc[i] = x
    return inc, regen


# -- module-level operation wrappers ------------------------------------------


def split_step(kernel: Kernel, x, u, v):
    """Next increment and regeneration flag from state x under draws (u, v)."""
    return kernel.split_step(x, u, v)


def residual_inverse_cdf(kernel: Kernel, x, u):
    """Residual-quantile q^{-1}(x, u) of the kernel's split form."""
    return kernel.residual_inverse_cdf(x, u)


def check_zero_mean(kernel: Kernel, x: float, n_samples: int, seed: int):
    """Monte Carlo estimate (mean, stderr) of the one-step mean from x."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n_samples)
    v = rng.random(n_samples)
    inc, _ = kernel.split_step(np.full(n_samples, float(x)), u, v)
    stderr = float(np.std(inc, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else np.inf
    return float(np.mean(inc)), stderr
