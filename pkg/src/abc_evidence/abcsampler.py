"""Rejection ABC: single-model posterior sampling and ABC model choice.

Proposals are drawn from the prior in fixed-size batches.  Batch size does
not depend on the tolerance, so for a fixed seed the proposal sequence is
the same at every epsilon and the accepted sets are nested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import AbcConfig, BudgetExceeded, Dataset, DegenerateSample, InvalidConfig, RngStream
from .models import SUM, ModelSpec, Statistic

BATCH_SIZE = 1 << 16


@dataclass(frozen=True)
class PosteriorSample:
    draws: np.ndarray
    attempts: int
    matched_stats: np.ndarray  # simulated statistic of each accepted proposal
    epsilon: float
    observed_stat: int

    @property
    def acceptance_rate(self) -> float:
        return self.draws.size / self.attempts


@dataclass(frozen=True)
class ModelChoiceSample:
    indices: np.ndarray  # 0-based model indices
    counts: np.ndarray
    attempts: int
    model_ids: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return int(self.indices.size)


class _Acceptor:
    """Walks batches of proposals in order, keeping the first ``target``
    acceptances and enforcing the per-acceptance attempt cap."""

    def __init__(self, target: int, cap: int):
        self.target = target
        self.cap = cap
        self.attempts = 0
        self.since_last = 0
        self.kept: list[np.ndarray] = []
        self.n_kept = 0

    def feed(self, accepted: np.ndarray) -> np.ndarray:
        """Return indices (into this batch) of proposals to keep."""
        idx = np.flatnonzero(accepted)
        need = self.target - self.n_kept
        idx = idx[:need]
        # gap in proposals before each kept acceptance, including itself
        prev = np.concatenate(([-1], idx[:-1]))
        gaps = idx - prev
        if idx.size:
            gaps[0] += self.since_last
            if gaps.max() > self.cap:
                raise BudgetExceeded(self._message())
        if idx.size == need:
            self.attempts += int(idx[-1]) + 1
        else:
            self.attempts += accepted.size
            self.since_last = (self.since_last + accepted.size) if idx.size == 0 else accepted.size - 1 - int(idx[-1])
            if self.since_last > self.cap:
                raise BudgetExceeded(self._message())
        self.n_kept += idx.size
        return idx

    @property
    def done(self) -> bool:
        return self.n_kept >= self.target

    def _message(self) -> str:
        return (
            f"more than {self.cap} proposals needed for one acceptance "
            f"({self.n_kept} of {self.target} accepted after {self.attempts + self.since_last} attempts)"
        )


def abc_posterior(
    model: ModelSpec,
    dataset: Dataset,
    cfg: AbcConfig,
    rng: RngStream,
    statistic: Statistic = SUM,
) -> PosteriorSample:
    """Rejection-ABC sample from the posterior given a summary statistic.

    A proposal theta ~ prior is accepted when the statistic of a simulated
    dataset of the same size satisfies ``|s(y*) - s(y)| <= epsilon``.  For
    the integer statistics used here any ``epsilon < 1`` forces an exact
    match, so draws are exact samples from the posterior given s(y).

    Raises BudgetExceeded if any single acceptance needs more than
    ``cfg.max_attempts_per_accept`` proposals.
    """
    s_obs = statistic.observed(dataset)
    acc = _Acceptor(cfg.n_accept, cfg.max_attempts_per_accept)
    draws, stats = [], []
    while not acc.done:
        thetas = model.prior_draws(BATCH_SIZE, rng)
        sims = statistic.simulate(model, thetas, dataset.n, rng)
        idx = acc.feed(np.abs(sims - s_obs) <= cfg.epsilon)
        draws.append(thetas[idx])
        stats.append(sims[idx])
    return PosteriorSample(
        draws=np.concatenate(draws),
        attempts=acc.attempts,
        matched_stats=np.concatenate(stats),
        epsilon=cfg.epsilon,
        observed_stat=s_obs,
    )


def _check_model_prior(model_prior: Sequence[float], m: int) -> np.ndarray:
    prior = np.asarray(model_prior, dtype=float)
    if m < 2:
        raise InvalidConfig("model choice needs at least two models", key="models")
    if prior.shape != (m,):
        raise InvalidConfig(f"model_prior has {prior.size} entries for {m} models", key="model_prior")
    if np.any(~np.isfinite(prior)) or np.any(prior <= 0):
        raise InvalidConfig("model_prior entries must all be > 0", key="model_prior")
    if abs(prior.sum() - 1.0) > 1e-12:
        raise InvalidConfig(f"model_prior sums to {prior.sum()!r}, not 1", key="model_prior")
    return prior


def abc_model_choice(
    models: Sequence[ModelSpec],
    model_prior: Sequence[float],
    dataset: Dataset,
    cfg: AbcConfig,
    rng: RngStream,
    statistic: Statistic = SUM,
) -> ModelChoiceSample:
    """ABC model-choice sampler over ``models``.

    Each proposal draws a model index from ``model_prior``, a parameter from
    that model's prior and a simulated statistic; one shared epsilon is used
    for all models.
    """
    prior = _check_model_prior(model_prior, len(models))
    s_obs = statistic.observed(dataset)
    acc = _Acceptor(cfg.n_accept, cfg.max_attempts_per_accept)
    kept = []
    while not acc.done:
        js = rng.choice(len(models), size=BATCH_SIZE, p=prior)
        sims = np.empty(BATCH_SIZE, dtype=np.int64)
        for j, model in enumerate(models):
            mask = js == j
            thetas = model.prior_draws(int(mask.sum()), rng)
            sims[mask] = statistic.simulate(model, thetas, dataset.n, rng)
        idx = acc.feed(np.abs(sims - s_obs) <= cfg.epsilon)
        kept.append(js[idx])
    indices = np.concatenate(kept)
    return ModelChoiceSample(
        indices=indices,
        counts=np.bincount(indices, minlength=len(models)),
        attempts=acc.attempts,
        model_ids=tuple(m.id for m in models),
    )


def posterior_model_probs(sample: ModelChoiceSample) -> np.ndarray:
    if sample.n == 0:
        raise DegenerateSample("empty model-choice sample")
    probs = sample.counts / sample.n
    probs[-1] = 1.0 - probs[:-1].sum()
    return probs


def mc_log_bayes_factor(sample: ModelChoiceSample, model_prior: Sequence[float], j1: int, j2: int) -> float:
    """Log Bayes factor of model ``j1`` over ``j2`` from ABC model choice
    frequencies, corrected for the model prior."""
    c1, c2 = int(sample.counts[j1]), int(sample.counts[j2])
    if c2 == 0:
        raise DegenerateSample(f"model {j2} was never accepted; Bayes factor is infinite")
    if c1 == 0:
        raise DegenerateSample(f"model {j1} was never accepted; Bayes factor is zero")
    return math.log(c1 / c2) + math.log(model_prior[j2] / model_prior[j1])
