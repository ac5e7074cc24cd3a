"""Input-output fidelity of the Gaussian noise channel and the memory threshold gamma*."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .kernels import ChannelParams, KernelSpec, OU, sigma_and_rate, sigma_trajectory
from .special import gamma_half_ratio, hyp2f1_terminating
from .states import CAT, StateSpec

__all__ = [
    "FidelitySeries",
    "BracketError",
    "fidelity_cat",
    "fidelity_fock",
    "fidelity",
    "fidelity_series",
    "min_rate",
    "is_monotone",
    "gamma_star",
]

MONOTONE_TOL = 1e-10


class BracketError(ValueError):
    """The monotonicity predicate does not change across the gamma range."""


@dataclass(frozen=True)
class FidelitySeries:
    times: np.ndarray
    sigma: np.ndarray
    fidelity: np.ndarray
    state: StateSpec
    params: ChannelParams

    def local_minima(self) -> np.ndarray:
        f = self.fidelity
        idx = np.nonzero((f[1:-1] < f[:-2]) & (f[1:-1] <= f[2:]))[0] + 1
        return self.times[idx]

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.fidelity) <= 1e-14))


def fidelity_cat(alpha: complex, sigma: float) -> float:
    """<psi|E(psi)|psi> for the even cat.

    Numerator and denominator of the closed form are divided by
    ``e^{4|alpha|^2}`` so large amplitudes do not overflow.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    a2 = abs(alpha) ** 2
    s = float(sigma)
    e = lambda x: math.exp(x - 4.0 * a2)
    num = e(0.0) + 4.0 * e(2.0 * a2) + 1.0 + e(4.0 * a2 / (1.0 + s)) + e(4.0 * s * a2 / (1.0 + s))
    den = 2.0 * (1.0 + s) * (math.exp(-2.0 * a2) + 1.0) ** 2
    return num / den


def fidelity_fock(n: int, sigma: float) -> float:
    """<n|E(|n><n|)|n> through the terminating 2F1 representation."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if n < 0:
        raise ValueError("n must be nonnegative")
    x = ((1.0 - sigma) / (1.0 + sigma)) ** 2
    return gamma_half_ratio(n) * hyp2f1_terminating(n, 0.5, 0.5 - n, x) / (math.sqrt(math.pi) * (1.0 + sigma))


def fidelity(state: StateSpec, sigma: float) -> float:
    if state.kind == CAT:
        return fidelity_cat(state.alpha, sigma)
    return fidelity_fock(state.n, sigma)


def fidelity_series(state: StateSpec, params: ChannelParams, t_max: float, n_points: int) -> FidelitySeries:
    traj = sigma_trajectory(params, t_max, n_points)
    f = np.array([fidelity(state, s) for s in traj.sigma])
    return FidelitySeries(traj.times, traj.sigma, f, state, params)


def _default_scan(delta: float) -> float:
    return 6.0 * 2.0 * math.pi / abs(delta)


def min_rate(params: ChannelParams, t_max: float, n_grid: int = 20001) -> float:
    """Minimum of d sigma/dt over ``(0, t_max]``: grid search then bounded refinement."""
    times = np.linspace(0.0, t_max, n_grid)[1:]
    _, rate = sigma_and_rate(params, times)
    i = int(np.argmin(rate))
    lo = times[max(i - 1, 0)]
    hi = times[min(i + 1, times.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda t: float(sigma_and_rate(params, np.array([t]))[1][0]),
                                       bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        return float(min(rate[i], res.fun))
    return float(rate[i])


def is_monotone(params: ChannelParams, t_max: float | None = None) -> bool:
    if t_max is None:
        t_max = _default_scan(params.delta) if params.delta else 100.0 / params.kernel.gamma
    return min_rate(params, t_max) >= -MONOTONE_TOL


def gamma_star(lam: float, delta: float, gamma_range=(1e-3, 1.0), t_max: float | None = None,
               family: str = OU, beta: float | None = None, tol: float = 1e-4) -> float:
    """Smallest memory parameter above which sigma(t) is monotone in time.

    Bisection on ``gamma`` for the predicate ``min_t d sigma/dt >= -1e-10`` on
    ``(0, t_max]``; ``t_max`` defaults to six detuning periods.

    Raises
    ------
    BracketError
        If the predicate has the same value at both ends of ``gamma_range``
        (e.g. resonant channels, which are monotone for every gamma).
    """
    if t_max is None:
        if delta == 0:
            raise BracketError("resonant channel: sigma is monotone for every gamma, no threshold")
        t_max = _default_scan(delta)

    def mono(g):
        spec = KernelSpec(family, lam, g, beta)
        return is_monotone(ChannelParams(spec, delta), t_max)

    lo, hi = map(float, gamma_range)
    m_lo, m_hi = mono(lo), mono(hi)
    if m_lo == m_hi:
        raise BracketError(f"monotonicity is {m_lo} at both gamma={lo:g} and gamma={hi:g}")
    while hi - lo > tol / 4.0:
        mid = 0.5 * (lo + hi)
        if mono(mid) == m_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
