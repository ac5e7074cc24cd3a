"""Nonclassicality criteria and their death/birth crossing times.

Each criterion is reduced to an indicator ``q(t)`` that is positive while the
evolved state is witnessed as nonclassical. Crossings of ``q = 0`` are
bracketed on a uniform grid and polished with Brent's method; a crossing where
``q`` turns negative is a sudden death, the reverse a sudden birth.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .kernels import ChannelParams, has_closed_form, sigma_and_rate, sigma_closed, sigma_quad
from .special import lambert_w0
from .states import FOCK, StateSpec, chi_s, evolved_chi, mean_photons, photon_probs

__all__ = [
    "DEPTH",
    "WIGNER",
    "VOGEL",
    "KLYSHKO",
    "DEATH",
    "BIRTH",
    "Crossing",
    "CriterionReport",
    "ScanWindowWarning",
    "scan_step",
    "find_crossings",
    "depth_threshold",
    "depth_times",
    "depth_time_resonant_closed",
    "wigner_times",
    "vogel_witness",
    "vogel_detection",
    "vogel_times",
    "klyshko_from_probs",
    "klyshko_B",
    "klyshko_times",
]

DEPTH = "depth"
WIGNER = "wigner"
VOGEL = "vogel"
KLYSHKO = "klyshko"
DEATH = "death"
BIRTH = "birth"

DEFAULT_T_MAX = 200.0


class ScanWindowWarning(UserWarning):
    """The scan window ends while the state is still witnessed as nonclassical."""


@dataclass(frozen=True)
class Crossing:
    t: float
    kind: str


@dataclass(frozen=True)
class CriterionReport:
    criterion: str
    crossings: tuple[Crossing, ...]
    nonclassical_at_zero: bool
    t_max: float
    threshold: float | None = None
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        ts = [c.t for c in self.crossings]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("crossings must be strictly increasing in time")
        expect = DEATH if self.nonclassical_at_zero else BIRTH
        for c in self.crossings:
            if c.kind != expect:
                raise ValueError("crossing kinds must alternate starting from the t=0 status")
            expect = BIRTH if expect == DEATH else DEATH

    @property
    def deaths(self) -> list[float]:
        return [c.t for c in self.crossings if c.kind == DEATH]

    @property
    def births(self) -> list[float]:
        return [c.t for c in self.crossings if c.kind == BIRTH]

    @property
    def first_death(self) -> float | None:
        d = self.deaths
        return d[0] if d else None

    @property
    def final_status_nonclassical(self) -> bool:
        if not self.crossings:
            return self.nonclassical_at_zero
        return self.crossings[-1].kind == BIRTH


def scan_step(delta: float) -> float:
    """Grid step ``min(0.05, pi / (8 max(|delta|, 1)))``."""
    return min(0.05, math.pi / (8.0 * max(abs(delta), 1.0)))


def _polish(fun, a, b, fa, fb):
    ga, gb = fun(a), fun(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if (ga > 0) == (gb > 0):
        # grid and pointwise evaluations disagree at roundoff level
        return a if abs(fa) < abs(fb) else b
    return optimize.brentq(fun, a, b, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200)


def find_crossings(indicator, t_max: float, step: float):
    """Sign changes of a vectorized indicator on ``(0, t_max]``.

    Returns ``(nonclassical_at_zero, [Crossing, ...])``. The status at zero is
    read from the first grid point ``t = step`` because several witnesses
    sit exactly on their boundary at ``t = 0``.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    n = max(int(math.ceil(t_max / step)), 1)
    grid = np.linspace(0.0, t_max, n + 1)[1:]
    q = np.asarray(indicator(grid), dtype=float)
    pos = q > 0
    scalar = lambda t: float(np.asarray(indicator(np.array([t])), dtype=float)[0])
    out = []
    for i in np.nonzero(pos[1:] != pos[:-1])[0]:
        t = _polish(scalar, grid[i], grid[i + 1], q[i], q[i + 1])
        out.append(Crossing(float(t), DEATH if pos[i] else BIRTH))
    # merge roots that collapsed onto one point
    cleaned = []
    for c in out:
        if cleaned and c.t <= cleaned[-1].t:
            cleaned.pop()
            continue
        cleaned.append(c)
    return bool(pos[0]), cleaned


def _sigma_fun(params: ChannelParams):
    if has_closed_form(params):
        return lambda t: sigma_closed(params, t)

    def fun(t):
        t = np.asarray(t, dtype=float)
        if t.size == 1:
            return np.array([sigma_quad(params, float(t.ravel()[0]))])
        return sigma_and_rate(params, t)[0]

    return fun


def _sigma_report(criterion, params, threshold, t_max, step):
    sig = _sigma_fun(params)
    at0, crossings = find_crossings(lambda t: threshold - sig(t), t_max, step)
    notes = ()
    if (crossings and crossings[-1].kind == BIRTH) or (not crossings and at0):
        msg = f"{criterion}: sigma stays below {threshold:g} at t_max={t_max:g}; final death outside window"
        warnings.warn(msg, ScanWindowWarning, stacklevel=3)
        notes = (msg,)
    return CriterionReport(criterion, tuple(crossings), at0, float(t_max), float(threshold), notes)


def depth_threshold(eta0: float) -> float:
    """Channel width at which a state of initial nonclassical depth ``eta0`` turns classical."""
    if not (0.0 < eta0 <= 1.0):
        raise ValueError(f"initial nonclassical depth must lie in (0, 1], got {eta0!r}")
    return float(eta0)


def depth_times(params: ChannelParams, eta0: float = 1.0, t_max: float = DEFAULT_T_MAX,
                step: float | None = None) -> CriterionReport:
    """All roots of ``sigma(t) = eta0`` in ``(0, t_max]`` (P function turns positive)."""
    thr = depth_threshold(eta0)
    return _sigma_report(DEPTH, params, thr, t_max, step or scan_step(params.delta))


def depth_time_resonant_closed(lam: float, gamma: float) -> float:
    """Resonant OU decoherence time for unit depth via the Lambert W function.

    Solves ``lam t + (lam/gamma)(e^{-gamma t} - 1) = 1``; the principal branch
    gives the positive root.
    """
    if not (lam > 0 and gamma > 0):
        raise ValueError("lambda and gamma must be positive")
    r = gamma / lam
    x = -math.exp(-1.0 - r)
    return (1.0 + r + lambert_w0(x)) / gamma


def wigner_times(params: ChannelParams, eta0: float = 1.0, t_max: float = DEFAULT_T_MAX,
                 step: float | None = None) -> CriterionReport:
    """Roots of ``sigma(t) = eta0 - 1/2``; empty when ``eta0 <= 1/2`` (Wigner never negative)."""
    depth_threshold(eta0)
    if eta0 <= 0.5:
        return CriterionReport(WIGNER, (), False, float(t_max), None,
                               ("initial Wigner function is nonnegative; t_W = 0",))
    return _sigma_report(WIGNER, params, eta0 - 0.5, t_max, step or scan_step(params.delta))


def vogel_witness(state: StateSpec, sigma: float, mu):
    """``|chi_1[rho(t)](mu)|``; values above one witness nonclassicality."""
    return np.abs(evolved_chi(state, 1.0, mu, sigma))


def default_u_max(state: StateSpec) -> float:
    return 2.0 * math.sqrt(mean_photons(state) + 3.0) + 2.0


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def vogel_detection(state: StateSpec, sigma, u_max: float | None = None, n_u: int = 641,
                    refine_iter: int = 48) -> np.ndarray:
    """``max_u |chi_1(u)| - 1`` along the real axis, for each channel width.

    The maximum on a uniform grid in ``(0, u_max]`` is polished by a
    vectorized golden-section search between the neighbours of the grid
    argmax.
    """
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    u_max = default_u_max(state) if u_max is None else float(u_max)
    u = np.linspace(0.0, u_max, n_u + 1)[1:]
    h = u[1] - u[0]
    vals = np.abs(chi_s(state, 1.0 - 2.0 * sig[:, None], u[None, :]))
    best = np.argmax(vals, axis=1)
    gmax = vals[np.arange(sig.size), best]
    lo = np.clip(u[best] - h, u[0], u_max)
    hi = np.clip(u[best] + h, u[0], u_max)

    def f(x):
        return np.abs(chi_s(state, 1.0 - 2.0 * sig, x))

    a, b = lo.copy(), hi.copy()
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(refine_iter):
        left = fc > fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - _GOLDEN * (b - a), d)
        nd = np.where(left, c, a + _GOLDEN * (b - a))
        fnc = np.where(left, f(nc), fd)
        fnd = np.where(left, fc, f(nd))
        c, d, fc, fd = nc, nd, fnc, fnd
    best_val = np.maximum(gmax, np.maximum(fc, fd))
    return best_val - 1.0


def vogel_times(state: StateSpec, params: ChannelParams, t_max: float = DEFAULT_T_MAX,
                u_max: float | None = None, n_u: int = 641, step: float | None = None) -> CriterionReport:
    """Crossings of the real-axis Vogel detection function ``max_u |chi_1| - 1``."""
    u_max = default_u_max(state) if u_max is None else float(u_max)
    if u_max < 2.0 * math.sqrt(mean_photons(state) + 3.0):
        raise ValueError("u_max too small for this state")
    sig = _sigma_fun(params)
    indicator = lambda t: vogel_detection(state, sig(t), u_max, n_u)
    at0, crossings = find_crossings(indicator, t_max, step or scan_step(params.delta))
    return CriterionReport(VOGEL, tuple(crossings), at0, float(t_max))


def klyshko_from_probs(p, n: int) -> float:
    """``B(n) = (n+2) p(n) p(n+2) - (n+1) p(n+1)^2`` for a probability sequence."""
    p = np.asarray(p, dtype=float)
    get = lambda k: p[..., k] if k < p.shape[-1] else 0.0
    return (n + 2) * get(n) * get(n + 2) - (n + 1) * get(n + 1) ** 2


def klyshko_B(state: StateSpec, sigma, n: int):
    """Klyshko quantity of the channel output at width ``sigma``; negative witnesses nonclassicality."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    probs = photon_probs(state, sigma, [n, n + 1, n + 2])
    b = (n + 2) * probs[:, 0] * probs[:, 2] - (n + 1) * probs[:, 1] ** 2
    return float(b[0]) if np.ndim(sigma) == 0 else b


def klyshko_times(state: StateSpec, params: ChannelParams, n: int | None = None,
                  t_max: float = DEFAULT_T_MAX, step: float | None = None) -> CriterionReport:
    """Crossings of ``B(n) = 0``; defaults to ``n = 1`` for cats and ``n = 0`` for Fock states."""
    if n is None:
        n = 0 if state.kind == FOCK else 1
    sig = _sigma_fun(params)
    indicator = lambda t: -klyshko_B(state, np.atleast_1d(sig(t)), n)
    at0, crossings = find_crossings(indicator, t_max, step or scan_step(params.delta))
    return CriterionReport(KLYSHKO, tuple(crossings), at0, float(t_max), None, (f"B({n})",))
