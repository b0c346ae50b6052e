"""Density and CDF of a sum of independent Unif[0,1] variables.

The density f_m is piecewise polynomial on the integer partition of [0, m].
The usual alternating-sum formula cancels catastrophically for m beyond ~20,
so the local polynomial coefficients are computed once per m in exact
rational arithmetic and cached; evaluation is a Horner pass on the local
variable s = t - floor(t) in [0, 1), which is numerically benign.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

__all__ = ["pdf", "cdf", "min_on_interval"]


@lru_cache(maxsize=None)
def _local_coeffs(m: int) -> np.ndarray:
    """Coefficient table c[k, r] with f_m(k + s) = sum_r c[k, r] * s**r.

    Exact rationals internally; the returned float64 table is accurate to
    machine precision because the local coefficients are bounded by 2**r / r!.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    fact = factorial(m - 1)
    table = [[Fraction(0)] * m for _ in range(m)]
    for k in range(m):
        for i in range(k + 1):
            sign = -1 if i % 2 else 1
            binom_mi = comb(m, i)
            a = k - i
            for r in range(m):
                # contribution of (s + a)**(m-1) to s**r
                if a == 0 and m - 1 - r != 0:
                    continue
                term = Fraction(sign * binom_mi * comb(m - 1, r) * a ** (m - 1 - r), fact)
                table[k][r] += term
    return np.array([[float(c) for c in row] for row in table])


@lru_cache(maxsize=None)
def _cdf_coeffs(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Antiderivative table: F_m(k + s) = base[k] + sum_r d[k, r] * s**r."""
    fact = factorial(m - 1)
    table = [[Fraction(0)] * m for _ in range(m)]
    for k in range(m):
        for i in range(k + 1):
            sign = -1 if i % 2 else 1
            binom_mi = comb(m, i)
            a = k - i
            for r in range(m):
                if a == 0 and m - 1 - r != 0:
                    continue
                table[k][r] += Fraction(sign * binom_mi * comb(m - 1, r) * a ** (m - 1 - r), fact)
    anti = [[Fraction(0)] + [c / (r + 1) for r, c in enumerate(row)] for row in table]
    bases = [Fraction(0)]
    for k in range(m):
        bases.append(bases[k] + sum(anti[k][1:]))  # value of the piece at s = 1
    d = np.array([[float(c) for c in row] for row in anti])
    base = np.array([float(b) for b in bases[:-1]])
    return base, d


def _eval_table(coeffs: np.ndarray, m: int, t: np.ndarray) -> np.ndarray:
    inside = (t >= 0.0) & (t <= m)
    k = np.clip(np.floor(t), 0, m - 1).astype(np.intp)
    s = t - k
    out = np.zeros_like(t, dtype=float)
    c = coeffs[k]
    acc = c[..., -1]
    for r in range(c.shape[-1] - 2, -1, -1):
        acc = acc * s + c[..., r]
    out[inside] = acc[inside]
    return out


def pdf(m: int, t):
    """Density f_m of the sum of m independent Unif[0,1] variables.

    Zero outside [0, m]. Accepts scalars or arrays.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    arr = np.asarray(t, dtype=float)
    out = _eval_table(_local_coeffs(m), m, np.atleast_1d(arr))
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def cdf(m: int, t):
    """Distribution function F_m; 0 below 0 and 1 above m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    arr = np.asarray(t, dtype=float)
    tt = np.atleast_1d(arr)
    base, d = _cdf_coeffs(m)
    k = np.clip(np.floor(tt), 0, m - 1).astype(np.intp)
    s = tt - k
    c = d[k]
    acc = c[..., -1]
    for r in range(c.shape[-1] - 2, -1, -1):
        acc = acc * s + c[..., r]
    out = base[k] + acc
    out[tt <= 0.0] = 0.0
    out[tt >= m] = 1.0
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def min_on_interval(m: int, lo: float, hi: float) -> float:
    """Exact minimum of f_m over the closed interval [lo, hi].

    Per integer piece the density is a polynomial, so the candidates are the
    subinterval endpoints plus real roots of the derivative inside it.
    """
    if hi < lo:
        raise ValueError("empty interval")
    if lo < 0.0 or hi > m:
        return 0.0  # interval reaches outside the support
    coeffs = _local_coeffs(m)
    best = np.inf
    k_first = int(np.floor(lo))
    k_last = min(int(np.floor(hi)), m - 1) if hi > lo else k_first
    for k in range(min(k_first, m - 1), k_last + 1):
        a = max(lo, float(k)) - k
        b = min(hi, float(k + 1)) - k
        if b < a:
            continue
        poly = coeffs[k]
        cand = [a, b]
        deriv = poly[1:] * np.arange(1, len(poly))
        if np.any(deriv != 0.0):
            roots = np.roots(deriv[::-1])
            for z in roots:
                if abs(z.imag) < 1e-12 and a < z.real < b:
                    cand.append(z.real)
        acc = np.full(len(cand), poly[-1])
        for r in range(len(poly) - 2, -1, -1):
            acc = acc * np.asarray(cand) + poly[r]
        best = min(best, float(np.min(acc)))
    return max(best, 0.0)
