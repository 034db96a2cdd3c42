"""Density estimators for the two estimated ingredients of the evidence:
the posterior ordinate (Gaussian KDE) and the data likelihood (empirical
pmf of simulated observations)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import Dataset, DegenerateSample, InvalidConfig, RngStream, UnseenObservation
from .models import ModelSpec

MIN_M_SIMS = 10_000


@dataclass(frozen=True)
class KdeEstimate:
    point: float
    log_density: float
    bandwidth: float
    sample_size: int


@dataclass(frozen=True)
class SimulatedLikelihood:
    log_likelihood: float
    per_value_counts: dict[int, int]
    m_sims: int
    smoothing: float


def silverman_bandwidth(x: np.ndarray) -> float:
    """0.9 * min(sd, IQR/1.34) * N^(-1/5); falls back to sd when IQR is 0."""
    sd = np.std(x, ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread <= 0:
        spread = sd
    return float(0.9 * spread * x.size ** (-0.2))


def kde_log_ordinate(draws, point: float) -> KdeEstimate:
    x = np.asarray(draws, dtype=float).ravel()
    if not math.isfinite(point):
        raise InvalidConfig(f"evaluation point must be finite, got {point}", key="point")
    if x.size < 2 or np.all(x == x[0]):
        raise DegenerateSample("KDE needs at least two distinct draws")
    h = silverman_bandwidth(x)
    z = (x - point) / h
    log_f = logsumexp(-0.5 * z * z) - math.log(x.size * h * math.sqrt(2 * math.pi))
    return KdeEstimate(point=float(point), log_density=float(log_f), bandwidth=h, sample_size=x.size)


def empirical_pmf(sims: np.ndarray, smoothing: float, upper: int) -> np.ndarray:
    """Additively smoothed pmf on {0, ..., upper}.

    p(k) = (count(k) + alpha) / (M + alpha * K) with K = upper + 1.
    """
    counts = np.bincount(sims, minlength=upper + 1)[: upper + 1]
    return _smoothed(counts, sims.size, smoothing)


def _smoothed(counts: np.ndarray, m: int, smoothing: float) -> np.ndarray:
    return (counts + smoothing) / (m + smoothing * counts.size)


def simulated_log_likelihood(
    model: ModelSpec,
    theta_hat: float,
    dataset: Dataset,
    m_sims: int,
    smoothing: float,
    rng: RngStream,
) -> SimulatedLikelihood:
    """Estimate log L(theta_hat; y) from ``m_sims`` simulated observations.

    With ``smoothing=0`` any observed value that never appears among the
    simulations raises UnseenObservation instead of returning -inf.
    """
    theta_hat = model.check_theta(theta_hat)
    if m_sims < MIN_M_SIMS:
        raise InvalidConfig(f"m_sims must be >= {MIN_M_SIMS}, got {m_sims}", key="m_sims")
    if smoothing < 0 or not math.isfinite(smoothing):
        raise InvalidConfig(f"smoothing must be >= 0, got {smoothing}", key="smoothing")
    sims = model.draw(np.full(m_sims, theta_hat), rng)
    y = dataset.array()
    upper = int(max(y.max(), sims.max()))
    counts = np.bincount(sims, minlength=upper + 1)
    observed = {int(k): int(counts[k]) for k in np.unique(y)}
    if smoothing == 0:
        unseen = sorted(k for k, c in observed.items() if c == 0)
        if unseen:
            raise UnseenObservation(
                f"observed values {unseen} never simulated in {m_sims} draws at theta={theta_hat:g}"
            )
    pmf = _smoothed(counts, m_sims, smoothing)
    return SimulatedLikelihood(
        log_likelihood=float(np.log(pmf[y]).sum()),
        per_value_counts=observed,
        m_sims=m_sims,
        smoothing=float(smoothing),
    )
