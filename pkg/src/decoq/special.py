"""Scalar special functions used by the closed-form results.

Everything here works on real scalars and is written out explicitly so the
closed forms do not depend on the branch/normalization conventions of a
third-party library.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "lambert_w0",
    "laguerre",
    "hyp2f1_terminating",
    "gamma_half_ratio",
    "laguerre_table",
]

# e = _E_HI + _E_LO to roughly 32 digits
_E_HI = math.e
_E_LO = 1.4456468917292502e-16
# W0 about the branch point in powers of p = sqrt(2 (1 + e x))
_BRANCH_COEF = (-1.0, 1.0, -1.0 / 3.0, 11.0 / 72.0, -43.0 / 540.0, 769.0 / 17280.0, -221.0 / 8505.0,
                680863.0 / 43545600.0, -1963.0 / 204120.0, 226287557.0 / 37623398400.0)


def _split(a: float):
    c = 134217729.0 * a
    hi = c - (c - a)
    return hi, a - hi


def _one_plus_e_times(x: float) -> float:
    prod = _E_HI * x
    ah, al = _split(_E_HI)
    bh, bl = _split(x)
    err = ((ah * bh - prod) + ah * bl + al * bh) + al * bl
    return (1.0 + prod) + (err + _E_LO * x)


def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function for real ``x >= -1/e``.

    Returns ``y >= -1`` with ``y * exp(y) == x``. Halley iteration is started
    from the branch-point series near ``-1/e``, from ``log1p`` for moderate
    arguments and from the asymptotic expansion for large ones.

    Raises
    ------
    ValueError
        If ``x < -1/e`` (no real solution).
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("lambert_w0 of NaN")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        if x > 0:
            return math.inf
        raise ValueError("lambert_w0 undefined for -inf")
    # 1 + e*x measures the distance from the branch point; evaluated with an
    # error-free product so that arguments within ulps of -1/e keep their digits
    q = _one_plus_e_times(x)
    if q < 0.0:
        if q > -4.0 * 2.2e-16:
            return -1.0
        raise ValueError(f"lambert_w0 requires x >= -1/e, got {x!r}")
    if q < 0.3:
        p = math.sqrt(2.0 * q)
        w = _BRANCH_COEF[-1]
        for c in reversed(_BRANCH_COEF[:-1]):
            w = c + p * w
        if p < 0.03:
            return w
    elif x < 3.0:
        w = math.log1p(x)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1

    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        dw = f / denom
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def laguerre(n: int, x: float) -> float:
    """Laguerre polynomial ``L_n(x)`` by the three-term recurrence."""
    if n < 0:
        raise ValueError("laguerre order must be nonnegative")
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def hyp2f1_terminating(n: int, b: float, c: float, x: float) -> float:
    """Gauss hypergeometric ``2F1(-n, b; c; x)`` as its finite sum.

    The series stops after ``n + 1`` terms because ``(-n)_k`` vanishes for
    ``k > n``.

    Raises
    ------
    ZeroDivisionError
        If ``(c)_k`` hits zero before the sum terminates.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    total = 1.0
    term = 1.0
    for k in range(n):
        ck = c + k
        if ck == 0.0:
            raise ZeroDivisionError(f"2F1 pole: (c)_{k + 1} vanishes for c={c!r}")
        term *= (-n + k) * (b + k) / (ck * (k + 1)) * x
        total += term
    return total


def gamma_half_ratio(n: int) -> float:
    """``Gamma(n + 1/2) / Gamma(n + 1)`` via the product recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    r = math.sqrt(math.pi)
    for k in range(n):
        r *= (k + 0.5) / (k + 1.0)
    return r


def laguerre_table(n_max: int, x):
    """Stack ``[L_0(x), ..., L_{n_max}(x)]`` for array ``x`` (leading axis = order)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 1.0 - x
    for k in range(1, n_max):
        out[k + 1] = ((2 * k + 1 - x) * out[k] - k * out[k - 1]) / (k + 1)
    return out
