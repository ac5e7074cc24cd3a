"""Stochastic-trajectory oracle for the Gaussian channel reduction.

Paths of the complex field ``B = B_x + i B_y`` are sampled on a uniform grid,
the displacement ``phi_t = -i int_0^t e^{i delta s} B(s) ds`` is accumulated
with the trapezoidal rule, and the sample statistics of ``phi_t`` are compared
with the analytic channel width.

Paths are generated in fixed-size chunks, each with its own Philox stream
spawned from the master seed, so results do not depend on the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .kernels import OU, KernelSpec, kernel_eval

__all__ = [
    "PathConfig",
    "PathEnsemble",
    "FactorizationError",
    "worker_count",
    "sample_paths",
    "accumulate_phi",
    "simulate_phi",
    "empirical_sigma",
    "empirical_channel_factor",
    "trapezoid_sigma",
]

MAX_DENSE_STEPS = 4096
MAX_JITTER = 1e-10
JACKKNIFE_BLOCKS = 100


class FactorizationError(np.linalg.LinAlgError):
    def __init__(self, msg, required_jitter):
        super().__init__(msg)
        self.required_jitter = required_jitter


def worker_count() -> int:
    """Worker cap from ``DECOQ_THREADS`` (defaults to the CPU count)."""
    env = os.environ.get("DECOQ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class PathConfig:
    dt: float
    n_steps: int
    n_paths: int
    seed: int = 0
    chunk_size: int = 4096

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.n_paths < 2:
            raise ValueError("n_paths must be >= 2")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)


@dataclass(frozen=True)
class PathEnsemble:
    """Sampled field and/or accumulated displacement.

    ``field`` has shape ``(n_paths, n_steps + 1)``; ``phi`` has one column per
    entry of ``times`` (all grid points, or a recorded subset).
    """

    times: np.ndarray
    kernel: KernelSpec
    delta: float
    config: PathConfig
    field: np.ndarray | None = None
    phi: np.ndarray | None = None
    phi_times: np.ndarray | None = None

    @property
    def n_paths(self) -> int:
        return self.config.n_paths


def _chunks(cfg: PathConfig):
    seqs = np.random.SeedSequence(cfg.seed).spawn(math.ceil(cfg.n_paths / cfg.chunk_size))
    for i, ss in enumerate(seqs):
        start = i * cfg.chunk_size
        yield ss, min(cfg.chunk_size, cfg.n_paths - start)


def _cholesky_factor(spec: KernelSpec, dt: float, n_steps: int) -> np.ndarray:
    if n_steps + 1 > MAX_DENSE_STEPS:
        raise ValueError(f"dense covariance sampling supports at most {MAX_DENSE_STEPS} grid points")
    lags = dt * np.arange(n_steps + 1)
    col = kernel_eval(spec, lags)
    idx = np.abs(np.subtract.outer(np.arange(n_steps + 1), np.arange(n_steps + 1)))
    cov = col[idx]
    jitter = 0.0
    while True:
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError:
            jitter = 1e-16 * col[0] if jitter == 0.0 else jitter * 10.0
            if jitter > MAX_JITTER:
                need = max(-float(np.linalg.eigvalsh(cov).min()), 0.0)
                raise FactorizationError(
                    f"covariance not positive definite; needs jitter ~{need:.3e} > {MAX_JITTER:g}", need
                ) from None


def _sample_chunk(spec: KernelSpec, cfg: PathConfig, ss, m: int, chol=None) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(ss))
    n = cfg.n_steps + 1
    if spec.lam == 0.0:
        return np.zeros((m, n), dtype=complex)
    z = rng.standard_normal((2, m, n))
    if spec.family == OU:
        var = 0.5 * spec.lam * spec.gamma
        a = math.exp(-spec.gamma * cfg.dt)
        kick = math.sqrt(var * -math.expm1(-2.0 * spec.gamma * cfg.dt))
        x = np.empty((2, m, n))
        x[:, :, 0] = math.sqrt(var) * z[:, :, 0]
        for k in range(1, n):
            x[:, :, k] = a * x[:, :, k - 1] + kick * z[:, :, k]
    else:
        x = z @ chol.T
    return x[0] + 1j * x[1]


def _run_chunks(fn, cfg: PathConfig, workers: int | None):
    jobs = list(_chunks(cfg))
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(jobs) == 1:
        return [fn(ss, m) for ss, m in jobs]
    with ThreadPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def sample_paths(spec: KernelSpec, cfg: PathConfig, delta: float = 0.0, workers: int | None = None) -> PathEnsemble:
    """Stationary Gaussian field paths.

    OU paths use the exact AR(1) transition (lag-one coefficient
    ``exp(-gamma dt)``, stationary variance ``lam gamma / 2``); power-law paths
    use a dense Cholesky factor of the stationary covariance.
    """
    chol = None
    if spec.family != OU and spec.lam != 0.0:
        chol = _cholesky_factor(spec, cfg.dt, cfg.n_steps)
    parts = _run_chunks(lambda ss, m: _sample_chunk(spec, cfg, ss, m, chol), cfg, workers)
    return PathEnsemble(cfg.times, spec, float(delta), cfg, field=np.concatenate(parts, axis=0))


def _trapezoid_phi(field: np.ndarray, times: np.ndarray, delta: float, dt: float) -> np.ndarray:
    f = np.exp(1j * delta * times)[None, :] * field
    phi = np.zeros_like(f)
    phi[:, 1:] = -1j * dt * np.cumsum(0.5 * (f[:, 1:] + f[:, :-1]), axis=1)
    return phi


def accumulate_phi(ensemble: PathEnsemble) -> PathEnsemble:
    """Trapezoidal accumulation of ``phi`` at every grid point."""
    if ensemble.field is None:
        raise ValueError("ensemble has no field samples")
    phi = _trapezoid_phi(ensemble.field, ensemble.times, ensemble.delta, ensemble.config.dt)
    return replace(ensemble, phi=phi, phi_times=ensemble.times)


def _record_indices(cfg: PathConfig, record_times) -> np.ndarray:
    if record_times is None:
        return np.arange(cfg.n_steps + 1)
    rt = np.atleast_1d(np.asarray(record_times, dtype=float))
    idx = np.rint(rt / cfg.dt).astype(int)
    if np.any(idx < 0) or np.any(idx > cfg.n_steps) or np.any(np.abs(idx * cfg.dt - rt) > 1e-9 * max(1.0, rt.max())):
        raise ValueError("record times must lie on the path grid")
    return idx


def simulate_phi(spec: KernelSpec, cfg: PathConfig, delta: float = 0.0, record_times=None,
                 workers: int | None = None) -> PathEnsemble:
    """Sample and accumulate chunk by chunk, keeping ``phi`` only at ``record_times``.

    Same random streams as ``accumulate_phi(sample_paths(...))`` but without
    holding every field sample in memory.
    """
    idx = _record_indices(cfg, record_times)
    chol = None
    if spec.family != OU and spec.lam != 0.0:
        chol = _cholesky_factor(spec, cfg.dt, cfg.n_steps)
    times = cfg.times

    def job(ss, m):
        field = _sample_chunk(spec, cfg, ss, m, chol)
        return _trapezoid_phi(field, times, delta, cfg.dt)[:, idx]

    phi = np.concatenate(_run_chunks(job, cfg, workers), axis=0)
    return PathEnsemble(times, spec, float(delta), cfg, phi=phi, phi_times=times[idx])


def _column(ensemble: PathEnsemble, t: float) -> np.ndarray:
    if ensemble.phi is None:
        raise ValueError("phi has not been accumulated")
    j = np.nonzero(np.abs(ensemble.phi_times - t) <= 1e-9 * max(1.0, abs(t)))[0]
    if j.size == 0:
        raise ValueError(f"t={t} is not a recorded grid time")
    return ensemble.phi[:, j[0]]


def _block_jackknife(x: np.ndarray, blocks: int = JACKKNIFE_BLOCKS):
    """Variance estimate of ``x`` and its delete-one-block jackknife error."""
    n = x.size
    g = min(blocks, n)
    edges = np.linspace(0, n, g + 1).astype(int)
    s1 = np.add.reduceat(x, edges[:-1])
    s2 = np.add.reduceat(x * x, edges[:-1])
    cnt = np.diff(edges).astype(float)
    tot1, tot2 = math.fsum(s1), math.fsum(s2)
    full = (tot2 - tot1 * tot1 / n) / (n - 1)
    m = n - cnt
    loo1 = tot1 - s1
    loo2 = tot2 - s2
    theta = (loo2 - loo1 * loo1 / m) / (m - 1)
    se = math.sqrt((g - 1) / g * float(np.sum((theta - theta.mean()) ** 2)))
    return full, se


def empirical_sigma(ensemble: PathEnsemble, t: float) -> tuple[float, float]:
    """Sample variance of ``phi_t`` per quadrature (mean of Re and Im) with jackknife error."""
    col = _column(ensemble, t)
    if not np.any(col):
        return 0.0, 0.0
    vr, er = _block_jackknife(col.real)
    vi, ei = _block_jackknife(col.imag)
    # Re and Im parts are independent, so the averaged error adds in quadrature
    return 0.5 * (vr + vi), 0.5 * math.hypot(er, ei)


def empirical_channel_factor(ensemble: PathEnsemble, mu: complex, t: float, return_error: bool = False):
    """Sample mean of ``exp(mu phi^* - mu^* phi)``.

    With per-quadrature field covariance ``K`` each quadrature of ``phi_t``
    has variance ``sigma(t)``, so the Gaussian average is
    ``exp(-2 |mu|^2 sigma(t))``.
    """
    col = _column(ensemble, t)
    mu = complex(mu)
    vals = np.exp(mu * np.conj(col) - np.conj(mu) * col)
    mean = complex(vals.mean())
    if not return_error:
        return mean
    n = vals.size
    err = complex(vals.real.std(ddof=1) / math.sqrt(n), vals.imag.std(ddof=1) / math.sqrt(n))
    return mean, err


def trapezoid_sigma(spec: KernelSpec, delta: float, dt: float, n_steps: int) -> float:
    """Exact expected per-quadrature variance of the trapezoidal ``phi`` after ``n_steps``.

    Equals the discretized double integral, so ``sigma(t) - trapezoid_sigma``
    is the time-step bias of the Monte Carlo estimator.
    """
    w = np.full(n_steps + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    s = dt * np.arange(n_steps + 1)
    lag = np.abs(np.subtract.outer(s, s))
    k = kernel_eval(spec, lag) * np.cos(delta * np.subtract.outer(s, s))
    return float(w @ k @ w)
