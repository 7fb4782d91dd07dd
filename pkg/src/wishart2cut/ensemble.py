"""Monte Carlo sampling of the complex Wishart ensemble and rescaled statistics."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .density import cdf_F_interpolant, edge_constants
from .model import FiniteSize, ModelParams, effective_params
from .spectral_curve import Regime, quartic_roots


class SamplingError(RuntimeError):
    pass


@dataclass
class EnsembleRun:
    fs: FiniteSize
    a: float
    seed: int
    trials: int
    eigenvalues: np.ndarray  # trials x N, each row descending

    def pooled(self) -> np.ndarray:
        return self.eigenvalues.ravel()


def thread_count(requested=None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("WISHART2CUT_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def covariance_diagonal(fs: FiniteSize, a: float) -> np.ndarray:
    return np.concatenate([np.ones(fs.N0), np.full(fs.N1, float(a))])


def draw_gaussian(fs: FiniteSize, seed: int, trial: int) -> np.ndarray:
    """The M x N complex Gaussian matrix of one trial; real and imaginary parts have variance 1/2."""
    rng = np.random.default_rng([seed, trial])
    re = rng.standard_normal((fs.M, fs.N))
    im = rng.standard_normal((fs.M, fs.N))
    return (re + 1j * im) / np.sqrt(2.0)


def wishart_eigenvalues(X: np.ndarray, sigma: np.ndarray, M: int) -> np.ndarray:
    Y = X * np.sqrt(sigma)[None, :]
    B = Y.conj().T @ Y / M
    return np.linalg.eigvalsh(B)[::-1]


def sample_eigenvalues(fs: FiniteSize, a: float, seed: int, trials: int, threads=None) -> EnsembleRun:
    """Eigenvalues of ``B_N`` for ``trials`` independent draws.

    Trial ``t`` uses its own generator seeded with ``(seed, t)``, so results do
    not depend on the thread count or scheduling.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    sigma = covariance_diagonal(fs, a)
    out = np.empty((trials, fs.N))

    def work(t):
        try:
            out[t] = wishart_eigenvalues(draw_gaussian(fs, seed, t), sigma, fs.M)
        except np.linalg.LinAlgError as exc:
            raise SamplingError(f"eigensolver failed in trial {t} (seed {seed})") from exc

    n = thread_count(threads)
    if n == 1 or trials == 1:
        for t in range(trials):
            work(t)
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            list(pool.map(work, range(trials)))
    return EnsembleRun(fs=fs, a=float(a), seed=int(seed), trials=int(trials), eigenvalues=out)


def edge_constants_finite(fs: FiniteSize, a: float, limit: ModelParams | None = None):
    """``(lambda_4^N, rho_4^N)`` from the finite-size parameters ``(a, N1/N, N/M)``."""
    eff = effective_params(fs, a)
    bp = quartic_roots(eff)
    if bp.regime is not Regime.TWO_CUT:
        if limit is not None and quartic_roots(limit).regime is Regime.TWO_CUT:
            raise ValueError("finite-size parameters are not two-cut although the limit is; increase M")
        raise ValueError("edge rescaling needs a two-cut finite-size curve")
    return float(bp.lam[3]), float(edge_constants(eff)[3])


def edge_rescale(run: EnsembleRun, params: ModelParams | None = None, finite: bool = True) -> np.ndarray:
    """``(y_1 - lambda_4)(M rho_4)^{2/3}`` per trial.

    With ``finite=True`` the centring uses the finite-size curve; otherwise the
    limiting ``params``.
    """
    if finite:
        lam4, rho4 = edge_constants_finite(run.fs, run.a, params)
    else:
        lam4 = float(quartic_roots(params).lam[3])
        rho4 = float(edge_constants(params)[3])
    y1 = run.eigenvalues[:, 0]
    return (y1 - lam4) * (run.fs.M * rho4) ** (2.0 / 3.0)


def unfolding_map(params: ModelParams, M: int, x0: float):
    """``y -> M int_{x0}^{y} rho``; ``rho`` has total mass ``c`` so this is ``M c (F(y) - F(x0))``."""
    F = cdf_F_interpolant(params)
    F0 = F(np.array([x0]))[0]
    scale = M * params.c
    return lambda y: scale * (F(np.asarray(y, dtype=float)) - F0)


def bulk_unfold(run: EnsembleRun, params: ModelParams, x0: float, window: float) -> np.ndarray:
    """Pooled nearest-neighbour spacings of unfolded eigenvalues in ``[x0 - window, x0 + window]``."""
    unfold = unfolding_map(params, run.fs.M, x0)
    spacings = []
    for row in run.eigenvalues:
        y = np.sort(row[(row >= x0 - window) & (row <= x0 + window)])
        if y.size >= 2:
            spacings.append(np.diff(unfold(y)))
    if not spacings:
        raise ValueError("no eigenvalue pairs in the unfolding window")
    return np.concatenate(spacings)


def window_counts(run: EnsembleRun, params: ModelParams, x0: float, lengths) -> np.ndarray:
    """Variance over trials of the number of unfolded points in ``[0, L)`` around ``x0``."""
    unfold = unfolding_map(params, run.fs.M, x0)
    u = unfold(run.eigenvalues)
    out = []
    for L in np.atleast_1d(lengths):
        n = np.count_nonzero((u >= -L / 2) & (u < L / 2), axis=1)
        out.append(n.var())
    return np.array(out)


def empirical_cdf(samples):
    """Right-continuous empirical distribution function of the pooled samples."""
    x = np.sort(np.asarray(getattr(samples, "eigenvalues", samples), dtype=float).ravel())
    n = x.size
    return lambda t: np.searchsorted(x, np.asarray(t, dtype=float), side="right") / n


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov sup distance between the samples and a CDF callable."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
