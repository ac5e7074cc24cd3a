"""Cat and Fock states: phase-space functions and photon statistics.

Conventions: ``D(mu) = exp(mu a^dag - mu^* a)``, ``chi_s(mu) = Tr[rho D(mu)] e^{s|mu|^2/2}``
and ``W_s(beta) = pi^{-2} int d^2mu e^{beta mu^* - beta^* mu} chi_s(mu)``.
The Gaussian noise channel of width ``sigma`` maps ``chi_s`` to
``chi_{s - 2 sigma}``, so every evolved quantity is an ordering shift of
the initial state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sps

from .special import laguerre_table

__all__ = [
    "CAT",
    "FOCK",
    "StateSpec",
    "PhotonDistribution",
    "TruncationError",
    "chi_s",
    "wigner_s",
    "cat_fock_element",
    "evolved_chi",
    "evolved_wigner",
    "photon_probs",
    "photon_dist",
    "default_n_max",
    "mean_photons",
]

CAT = "cat"
FOCK = "fock"

TAIL_THRESHOLD = 1e-8
NEGATIVE_CLIP = 1e-12


class TruncationError(ArithmeticError):
    """Photon-number truncation too small for the requested accuracy."""


@dataclass(frozen=True)
class StateSpec:
    """Initial oscillator state: even cat ``N^{-1/2}(|alpha> + |-alpha>)`` or Fock ``|n>``."""

    kind: str
    alpha: complex = 0j
    n: int = 0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in (CAT, FOCK):
            raise ValueError(f"unknown state kind {self.kind!r}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        if kind == FOCK:
            if int(self.n) != self.n or self.n < 0:
                raise ValueError(f"Fock number must be a nonnegative integer, got {self.n!r}")
            object.__setattr__(self, "n", int(self.n))

    @classmethod
    def cat(cls, alpha: complex) -> "StateSpec":
        return cls(CAT, alpha=alpha)

    @classmethod
    def fock(cls, n: int) -> "StateSpec":
        return cls(FOCK, n=n)

    @property
    def norm(self) -> float:
        """Cat normalization ``N = 2 (1 + exp(-2 |alpha|^2))``."""
        return 2.0 * (1.0 + math.exp(-2.0 * abs(self.alpha) ** 2))

    def label(self) -> str:
        if self.kind == FOCK:
            return f"fock(n={self.n})"
        a = self.alpha
        return f"cat(alpha={a.real:g}{a.imag:+g}j)" if a.imag else f"cat(alpha={a.real:g})"


@dataclass(frozen=True)
class PhotonDistribution:
    probs: np.ndarray
    n_max: int
    tail_bound: float

    def __getitem__(self, m: int) -> float:
        if m < 0:
            raise IndexError(m)
        return float(self.probs[m]) if m <= self.n_max else 0.0

    @property
    def total(self) -> float:
        return math.fsum(self.probs)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.n_max + 1), self.probs))


def mean_photons(state: StateSpec) -> float:
    if state.kind == FOCK:
        return float(state.n)
    a2 = abs(state.alpha) ** 2
    return a2 * math.tanh(a2)


def chi_s(state: StateSpec, s: float, mu):
    """s-ordered characteristic function of the initial state."""
    mu = np.asarray(mu, dtype=complex)
    r2 = np.abs(mu) ** 2
    damp = -0.5 * (1.0 - s) * r2
    if state.kind == FOCK:
        lag = laguerre_table(state.n, r2)[state.n]
        out = np.exp(damp) * lag
    else:
        a = state.alpha
        a2 = abs(a) ** 2
        z = mu * np.conj(a)
        # e^{-2|a|^2} cosh(2 Re z) split into exponentials to avoid overflow
        hyper = 0.5 * (np.exp(damp - 2.0 * a2 + 2.0 * z.real) + np.exp(damp - 2.0 * a2 - 2.0 * z.real))
        out = (2.0 / state.norm) * (np.exp(damp) * np.cos(2.0 * z.imag) + hyper)
    out = out.astype(complex)
    return out[()] if out.ndim == 0 else out


def wigner_s(state: StateSpec, s: float, beta):
    """s-ordered quasi-probability ``W_s(beta)`` for ``s < 1``."""
    if not s < 1.0:
        raise ValueError("ordering parameter must satisfy s < 1")
    beta = np.asarray(beta, dtype=complex)
    w = 1.0 - s
    if state.kind == FOCK:
        n = state.n
        x = 4.0 * np.abs(beta) ** 2
        # ((1+s)/(1-s))^n L_n(4|beta|^2/(1-s^2)) written as a polynomial,
        # which stays finite at s = -1
        acc = np.zeros(beta.shape)
        for k in range(n + 1):
            coef = math.comb(n, k) * (-1.0) ** k / math.factorial(k)
            acc = acc + coef * x**k * (1.0 + s) ** (n - k) / w ** (n + k)
        out = (-1.0) ** n * 2.0 / (math.pi * w) * np.exp(-2.0 * np.abs(beta) ** 2 / w) * acc
    else:
        a = state.alpha
        a2 = abs(a) ** 2
        z = beta * np.conj(a)
        pref = 4.0 / (state.norm * math.pi * w)
        diag = 0.5 * (np.exp(-2.0 * np.abs(beta - a) ** 2 / w) + np.exp(-2.0 * np.abs(beta + a) ** 2 / w))
        fringe = np.exp(-2.0 * np.abs(beta) ** 2 / w + 2.0 * s * a2 / w) * np.cos(4.0 * z.imag / w)
        out = pref * (diag + fringe)
    return out[()] if np.ndim(out) == 0 else out


def cat_fock_element(alpha: complex, n: int, m: int) -> complex:
    """Number-basis matrix element ``<n| psi_cat><psi_cat |m>``."""
    if n < 0 or m < 0:
        raise ValueError("photon numbers must be nonnegative")
    if n % 2 or m % 2:
        return 0j
    alpha = complex(alpha)
    a = abs(alpha)
    if a == 0.0:
        return complex(n == 0 and m == 0)
    norm = 2.0 * (1.0 + math.exp(-2.0 * a * a))
    logmag = -a * a + (n + m) * math.log(a) - 0.5 * (math.lgamma(n + 1) + math.lgamma(m + 1))
    phase = np.exp(1j * (n - m) * np.angle(alpha))
    return complex(4.0 / norm * math.exp(logmag) * phase)


def evolved_chi(state: StateSpec, s: float, mu, sigma: float):
    """s-ordered characteristic function after a Gaussian channel of width ``sigma``."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    return chi_s(state, s - 2.0 * sigma, mu)


def evolved_wigner(state: StateSpec, beta, sigma: float):
    """Wigner function of the channel output, i.e. ``W_{-2 sigma}`` of the input."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    return wigner_s(state, -2.0 * sigma, beta)


@lru_cache(maxsize=32)
def _gauss_laguerre(k: int):
    return sps.roots_laguerre(k)


def _cat_nodes(alpha_abs2: float, m_max: int) -> int:
    return int(min(m_max // 2 + 16 * alpha_abs2 + 80, 300))


def photon_probs(state: StateSpec, sigma, ms) -> np.ndarray:
    """p(m) of the channel output for every ``sigma`` (rows) and ``m`` (columns).

    Uses the overlap ``p(m) = pi^{-1} int d^2mu chi_0[rho](mu) e^{-sigma|mu|^2}
    chi_0[|m><m|](-mu)``. In polar form the angular integral is done
    analytically (Bessel J0/I0 for the cat, trivial for Fock) and the radial
    one by Gauss-Laguerre quadrature after ``y = (1 + sigma)|mu|^2``, which is
    exact for Fock inputs.
    """
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    if np.any(sig < 0):
        raise ValueError("sigma must be nonnegative")
    ms = np.atleast_1d(np.asarray(ms, dtype=int))
    m_max = int(ms.max())
    scale = 1.0 + sig
    if state.kind == FOCK:
        k = (state.n + m_max) // 2 + 2
        y, w = _gauss_laguerre(k)
        x = y[None, :] / scale[:, None]
        lag = laguerre_table(max(state.n, m_max), x)
        integrand = lag[state.n][None] * lag[ms]
    else:
        a = abs(state.alpha)
        k = _cat_nodes(a * a, m_max)
        y, w = _gauss_laguerre(k)
        x = y[None, :] / scale[:, None]
        arg = 2.0 * a * np.sqrt(x)
        radial = sps.j0(arg) + np.exp(arg - 2.0 * a * a) * sps.i0e(arg)
        lag = laguerre_table(m_max, x)
        integrand = (2.0 / state.norm) * radial[None] * lag[ms]
    out = np.einsum("msk,k->sm", integrand, w) / scale[:, None]
    if state.kind == CAT and np.any(sig == 0.0):
        # the unchanged input has exact number-basis weights (odd ones vanish)
        out[sig == 0.0] = [cat_fock_element(state.alpha, int(m), int(m)).real for m in ms]
    return out


def default_n_max(state: StateSpec, sigma: float) -> int:
    """Truncation for :func:`photon_dist`.

    ``ceil(4 (<n> + sigma) + 20)``, raised where needed so the geometric tail
    of ratio ``sigma / (1 + sigma)`` drops below ~1e-12.
    """
    mean = mean_photons(state) + sigma
    base = math.ceil(4.0 * mean + 20.0)
    if sigma > 0:
        base = max(base, math.ceil(mean + 2.0 + 28.0 * (1.0 + sigma)))
    return base


def photon_dist(state: StateSpec, sigma: float, n_max: int | None = None,
                tail_threshold: float = TAIL_THRESHOLD) -> PhotonDistribution:
    """Photon-number distribution of the channel output, truncated at ``n_max``.

    Raises
    ------
    TruncationError
        If the probability missing beyond ``n_max`` exceeds ``tail_threshold``
        or a probability is negative beyond roundoff.
    """
    if n_max is None:
        n_max = default_n_max(state, sigma)
    probs = photon_probs(state, sigma, np.arange(n_max + 1))[0]
    if probs.min() < -NEGATIVE_CLIP:
        raise TruncationError(f"negative probability {probs.min():.3e}; increase quadrature order")
    probs = np.clip(probs, 0.0, None)
    tail = abs(1.0 - math.fsum(probs))
    if tail > tail_threshold:
        raise TruncationError(f"missing probability {tail:.3e} beyond n_max={n_max}")
    return PhotonDistribution(probs, int(n_max), tail)
