"""Effective sample size and split R-hat for scalar MCMC traces."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InsufficientSamples

MIN_CHAINS = 2
MIN_DRAWS = 100


class Diagnostics(NamedTuple):
    effective_sample_size: float
    split_rhat: float
    degenerate: bool
    non_mixing: bool


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of each row, computed by FFT."""
    m, n = x.shape
    centered = x - x.mean(axis=1, keepdims=True)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(centered, n=size, axis=1)
    return np.fft.irfft(f * np.conj(f), n=size, axis=1)[:, :n] / n


def effective_sample_size(traces) -> float:
    """Multi-chain ESS with Geyer's initial monotone positive sequence.

    Autocorrelations are pooled across chains through the between/within
    variance decomposition, so chains that disagree lower the ESS. Returns
    0.0 for traces with no within-chain variance.
    """
    x = np.atleast_2d(np.asarray(traces, dtype=np.float64))
    m, n = x.shape
    if n < 4:
        raise InsufficientSamples(f"need at least 4 draws per chain, got {n}")
    acov = _autocovariance(x)
    within = acov[:, 0].mean() * n / (n - 1)
    if within <= 0.0:
        return 0.0
    var_plus = within * (n - 1) / n
    if m > 1:
        var_plus += np.var(x.mean(axis=1), ddof=1)
    rho = 1.0 - (within - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0

    tau = -1.0
    prev = np.inf
    for t in range(0, n - 1, 2):
        pair = rho[t] + rho[t + 1]
        if pair <= 0.0:
            break
        pair = min(pair, prev)
        tau += 2.0 * pair
        prev = pair
    # antithetic chains may push tau below 1; cap ESS at m n log10(m n)
    tau = max(tau, 1.0 / np.log10(m * n))
    return float(m * n / tau)


def split_rhat(traces) -> float:
    """Potential scale reduction over half-chains; ``nan`` when undefined, ``inf`` when stuck."""
    x = np.atleast_2d(np.asarray(traces, dtype=np.float64))
    m, n = x.shape
    half = n // 2
    halves = np.concatenate([x[:, :half], x[:, n - half :]], axis=0)
    within = np.var(halves, axis=1, ddof=1).mean()
    between = half * np.var(halves.mean(axis=1), ddof=1)
    if within == 0.0:
        return np.nan if between == 0.0 else np.inf
    var_plus = (half - 1) / half * within + between / half
    return float(np.sqrt(var_plus / within))


def diagnostics(traces) -> Diagnostics:
    """ESS and split R-hat for ``traces`` of shape ``(chains, draws)``.

    Raises:
        InsufficientSamples: with fewer than 2 chains or 100 draws per chain.
    """
    x = np.asarray(traces, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < MIN_CHAINS or x.shape[1] < MIN_DRAWS:
        raise InsufficientSamples(
            f"diagnostics need >= {MIN_CHAINS} chains of >= {MIN_DRAWS} draws, got shape {x.shape}"
        )
    rhat = split_rhat(x)
    ess = effective_sample_size(x)
    return Diagnostics(
        effective_sample_size=ess,
        split_rhat=rhat,
        degenerate=bool(np.isnan(rhat)),
        non_mixing=bool(np.isinf(rhat)),
    )
