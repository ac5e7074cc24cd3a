"""Environment autocorrelation kernels and the Gaussian-channel width sigma(t).

For a stationary kernel K(tau) the channel width is

    sigma(t) = int_0^t int_0^t cos(delta (s1 - s2)) K(|s1 - s2|) ds1 ds2
             = 2 int_0^t (t - tau) cos(delta tau) K(tau) dtau,

and its time derivative is ``2 int_0^t cos(delta tau) K(tau) dtau``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

__all__ = [
    "OU",
    "POWER_LAW",
    "KernelSpec",
    "ChannelParams",
    "SigmaTrajectory",
    "UnsupportedClosedForm",
    "QuadratureError",
    "kernel_eval",
    "has_closed_form",
    "sigma_closed",
    "sigma_quad",
    "sigma_rate",
    "sigma_eval",
    "sigma_and_rate",
    "sigma_trajectory",
    "sigma_asymptotic",
]

OU = "ou"
POWER_LAW = "powerlaw"

DEFAULT_TOL = 1e-10


class UnsupportedClosedForm(ValueError):
    """No closed form exists for this kernel/detuning combination."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature exhausted its subdivision budget."""


@dataclass(frozen=True)
class KernelSpec:
    """Autocorrelation model of the classical field quadratures.

    ``family`` is ``"ou"`` (Ornstein-Uhlenbeck) or ``"powerlaw"``; ``beta``
    is only used by the power law and must exceed 2 there.
    """

    family: str
    lam: float
    gamma: float
    beta: float | None = None

    def __post_init__(self):
        fam = self.family.lower()
        if fam in ("plaw", "power_law", "power-law"):
            fam = POWER_LAW
        object.__setattr__(self, "family", fam)
        if fam not in (OU, POWER_LAW):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"coupling lambda must be >= 0, got {self.lam!r}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"memory gamma must be > 0, got {self.gamma!r}")
        if fam == POWER_LAW:
            if self.beta is None or not self.beta > 2.0:
                raise ValueError(f"power-law exponent beta must be > 2, got {self.beta!r}")

    @classmethod
    def ou(cls, lam: float, gamma: float) -> "KernelSpec":
        return cls(OU, lam, gamma)

    @classmethod
    def power_law(cls, lam: float, gamma: float, beta: float) -> "KernelSpec":
        return cls(POWER_LAW, lam, gamma, beta)


@dataclass(frozen=True)
class ChannelParams:
    kernel: KernelSpec
    delta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.delta):
            raise ValueError("detuning must be finite")

    @property
    def resonant(self) -> bool:
        return self.delta == 0.0


@dataclass(frozen=True)
class SigmaTrajectory:
    times: np.ndarray
    sigma: np.ndarray
    rate: np.ndarray
    params: ChannelParams | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.times.shape != self.sigma.shape or self.times.shape != self.rate.shape:
            raise ValueError("times, sigma and rate must have equal shapes")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("time grid must be strictly increasing")


def kernel_eval(spec: KernelSpec, tau):
    """K(tau) for ``tau >= 0`` (scalar or array)."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("kernel lag must be nonnegative")
    if spec.family == OU:
        out = 0.5 * spec.lam * spec.gamma * np.exp(-spec.gamma * tau)
    else:
        out = 0.5 * (spec.beta - 1.0) * spec.gamma * spec.lam * (1.0 + spec.gamma * tau) ** (-spec.beta)
    return out[()] if out.ndim == 0 else out


def has_closed_form(params: ChannelParams) -> bool:
    return params.kernel.family == OU or params.resonant


# Series of f(w) = (exp(-w) - 1 + w) / w^2 and g(w) = (1 - exp(-w)) / w,
# used where direct evaluation cancels.
_F_COEF = np.array([(-1.0) ** k / math.factorial(k + 2) for k in range(24)])
_G_COEF = np.array([(-1.0) ** k / math.factorial(k + 1) for k in range(24)])
_SERIES_RADIUS = 0.5


def _series(coef, w):
    acc = np.zeros_like(w)
    for c in coef[::-1]:
        acc = acc * w + c
    return acc


def _ou_f(w):
    small = np.abs(w) < _SERIES_RADIUS
    out = np.empty_like(w)
    out[small] = _series(_F_COEF, w[small])
    wl = w[~small]
    out[~small] = (np.exp(-wl) - 1.0 + wl) / (wl * wl)
    return out


def _ou_g(w):
    small = np.abs(w) < _SERIES_RADIUS
    out = np.empty_like(w)
    out[small] = _series(_G_COEF, w[small])
    wl = w[~small]
    out[~small] = (1.0 - np.exp(-wl)) / wl
    return out


def _as_times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(~np.isfinite(t)):
        raise ValueError("times must be finite and nonnegative")
    return t


def _unwrap(t, out):
    return float(out) if t.ndim == 0 else out


def sigma_closed(params: ChannelParams, t):
    """Closed-form sigma(t) (OU at any detuning, power law on resonance only).

    The OU result is evaluated as ``lam*gamma*t^2 * Re f((gamma + i delta) t)``
    with ``f(w) = (e^{-w} - 1 + w)/w^2``, an exact rewrite of the expanded
    expression that stays accurate when ``gamma t`` and ``delta t`` are small.

    Raises
    ------
    UnsupportedClosedForm
        For a power-law kernel with nonzero detuning; use :func:`sigma_quad`.
    """
    t = _as_times(t)
    k = params.kernel
    tt = np.atleast_1d(t)
    if k.family == OU:
        w = (k.gamma + 1j * params.delta) * tt
        out = k.lam * k.gamma * tt * tt * _ou_f(w.astype(complex)).real
    elif params.resonant:
        x = k.gamma * tt
        growth = np.expm1((2.0 - k.beta) * np.log1p(x))
        out = k.lam * tt + k.lam * growth / (k.gamma * (k.beta - 2.0))
    else:
        raise UnsupportedClosedForm("power-law sigma(t) has no closed form off resonance; use sigma_quad")
    out = np.maximum(out, 0.0)
    return _unwrap(t, out.reshape(t.shape))


def _rate_closed(params: ChannelParams, tt):
    k = params.kernel
    if k.family == OU:
        w = ((k.gamma + 1j * params.delta) * tt).astype(complex)
        return k.lam * k.gamma * tt * _ou_g(w).real
    if params.resonant:
        return -k.lam * np.expm1((1.0 - k.beta) * np.log1p(k.gamma * tt))
    raise UnsupportedClosedForm("power-law rate has no closed form off resonance")


def _breakpoints(params: ChannelParams, a: float, b: float):
    """Panel edges in [a, b]: oscillation half-periods and kernel decay scales."""
    pts = [a, b]
    d = abs(params.delta)
    if d > 0:
        half = math.pi / d
        k0 = math.floor(a / half) + 1
        k1 = math.ceil(b / half)
        pts.extend(j * half for j in range(k0, k1))
    scale = 1.0 / params.kernel.gamma
    s = scale
    while s < b:
        if s > a:
            pts.append(s)
        s *= 4.0
    return sorted(set(pts))


def _integrate(fun, params, a, b, tol):
    edges = _breakpoints(params, a, b)
    n = len(edges) - 1
    parts = []
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            try:
                val, _ = integrate.quad(fun, lo, hi, epsabs=tol / n, epsrel=1e-13, limit=200)
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(f"quadrature failed on [{lo}, {hi}]: {exc}") from exc
            parts.append(val)
    return math.fsum(parts)


def sigma_quad(params: ChannelParams, t: float, tol: float = DEFAULT_TOL) -> float:
    """sigma(t) by adaptive Gauss-Kronrod quadrature of the single-lag integral.

    The range is split at every half period ``pi/|delta|`` and at multiples of
    the kernel decay time; each panel gets an equal share of ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    t = float(_as_times(t))
    if t == 0.0:
        return 0.0
    spec = params.kernel
    d = params.delta

    def integrand(tau):
        return 2.0 * (t - tau) * math.cos(d * tau) * kernel_eval(spec, tau)

    return max(_integrate(integrand, params, 0.0, t, tol), 0.0)


def _rate_quad(params: ChannelParams, t: float, tol: float) -> float:
    if t == 0.0:
        return 0.0
    spec = params.kernel
    d = params.delta
    return _integrate(lambda tau: 2.0 * math.cos(d * tau) * kernel_eval(spec, tau), params, 0.0, t, tol)


def sigma_rate(params: ChannelParams, t, tol: float = DEFAULT_TOL):
    """d sigma / dt = 2 int_0^t cos(delta tau) K(tau) dtau."""
    t = _as_times(t)
    tt = np.atleast_1d(t)
    if has_closed_form(params):
        out = _rate_closed(params, tt)
    else:
        out = np.array([_rate_quad(params, float(x), tol) for x in tt])
    return _unwrap(t, out.reshape(t.shape))


def sigma_eval(params: ChannelParams, t, tol: float = DEFAULT_TOL):
    """sigma(t) by the closed form when one exists, otherwise by quadrature."""
    if has_closed_form(params):
        return sigma_closed(params, t)
    t = _as_times(t)
    if t.ndim == 0:
        return sigma_quad(params, float(t), tol)
    return sigma_and_rate(params, t, tol)[0]


def sigma_and_rate(params: ChannelParams, times, tol: float = DEFAULT_TOL):
    """(sigma, rate) on an arbitrary time array.

    Without a closed form, the moments ``int cos(delta tau) K`` and
    ``int tau cos(delta tau) K`` are accumulated interval by interval over the
    sorted times, so the cost is one pass over the grid.
    """
    times = _as_times(times)
    flat = np.atleast_1d(times).ravel()
    if has_closed_form(params):
        sig = np.atleast_1d(sigma_closed(params, flat))
        rate = _rate_closed(params, flat)
        return sig.reshape(times.shape), rate.reshape(times.shape)

    order = np.argsort(flat, kind="stable")
    srt = flat[order]
    spec = params.kernel
    d = params.delta
    m0 = lambda tau: math.cos(d * tau) * kernel_eval(spec, tau)
    m1 = lambda tau: tau * math.cos(d * tau) * kernel_eval(spec, tau)
    acc0 = [0.0]
    acc1 = [0.0]
    sig = np.empty_like(srt)
    rate = np.empty_like(srt)
    prev = 0.0
    for i, t in enumerate(srt):
        if t > prev:
            acc0.append(_integrate(m0, params, prev, t, tol / 4.0))
            acc1.append(_integrate(m1, params, prev, t, tol / 4.0))
            prev = t
        i0 = math.fsum(acc0)
        i1 = math.fsum(acc1)
        rate[i] = 2.0 * i0
        sig[i] = max(2.0 * (t * i0 - i1), 0.0)
    out_s = np.empty_like(sig)
    out_r = np.empty_like(rate)
    out_s[order] = sig
    out_r[order] = rate
    return out_s.reshape(times.shape), out_r.reshape(times.shape)


def sigma_trajectory(params: ChannelParams, t_max: float, n_points: int) -> SigmaTrajectory:
    """Uniform-grid samples of (t, sigma, d sigma/dt) on ``[0, t_max]``."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    times = np.linspace(0.0, t_max, int(n_points))
    sig, rate = sigma_and_rate(params, times)
    return SigmaTrajectory(times, sig, rate, params)


def sigma_asymptotic(params: ChannelParams, t, regime: str):
    """Approximate sigma(t) in limiting regimes.

    OU regimes: ``"large_gamma"`` (lam t + lam/gamma e^{-gamma t} cos delta t),
    ``"small_gamma_large_delta"``, ``"small_gamma_small_delta"`` and
    ``"short_time"`` (lam gamma t^2 / 2). Power-law regimes (resonant):
    ``"large_gamma"`` and ``"small_gamma"``. ``"markov"`` gives lam t for both.
    """
    t = _as_times(t)
    k = params.kernel
    lam, g, d = k.lam, k.gamma, params.delta
    if regime == "markov":
        out = lam * t
    elif k.family == OU:
        if regime == "large_gamma":
            out = lam * t + lam / g * np.exp(-g * t) * np.cos(d * t)
        elif regime == "small_gamma_large_delta":
            if d == 0:
                raise ValueError("regime needs nonzero detuning")
            out = lam * g / d**2 * (1.0 - np.cos(d * t))
        elif regime == "small_gamma_small_delta":
            out = 0.5 * lam * g * t**2 * (1.0 - d**2 * t**2)
        elif regime == "short_time":
            out = 0.5 * lam * g * t**2
        else:
            raise ValueError(f"unknown OU regime {regime!r}")
    else:
        b = k.beta
        if regime == "large_gamma":
            out = lam * t + lam * g * t**2 / ((b - 2.0) * (1.0 + g * t) ** b)
        elif regime == "small_gamma":
            out = 0.5 * lam * g * t**2 * (b - 1.0)
        else:
            raise ValueError(f"unknown power-law regime {regime!r}")
    return float(out) if t.ndim == 0 else out
