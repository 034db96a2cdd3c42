"""Generative count models with conjugate priors and exact oracles.

Two models ship: Poisson with an Exp(1) prior on the rate, and Geometric
(failures before the first success, pmf p(1-p)^y) with a Uniform(0, 1)
prior on p.  Both admit closed-form posteriors and marginal likelihoods,
which serve as ground truth for the likelihood-free pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

from .core import Dataset, InvalidConfig, RngStream


@dataclass(frozen=True)
class SuffStat:
    value: int
    n: int


def sufficient_stat(dataset: Dataset) -> SuffStat:
    """Total count, sufficient for both built-in models."""
    return SuffStat(value=dataset.total, n=dataset.n)


class ModelSpec:
    """Base class for the built-in models.

    Subclasses provide a prior, a simulator and the conjugate oracles.
    ``lower``/``upper`` bound the open parameter support.
    """

    id: str = ""
    lower: float = 0.0
    upper: float = math.inf

    def check_theta(self, theta: float) -> float:
        theta = float(theta)
        if not (self.lower < theta < self.upper):
            raise InvalidConfig(
                f"{self.id}: parameter {theta!r} outside open support ({self.lower}, {self.upper})",
                key="theta",
            )
        return theta

    def simulate(self, theta: float, n: int, rng: RngStream) -> Dataset:
        theta = self.check_theta(theta)
        if n < 1:
            raise InvalidConfig(f"n must be >= 1, got {n}", key="n")
        return Dataset(self.draw(np.full(n, theta), rng))

    # vectorised primitives used by the samplers -------------------------

    def draw(self, thetas: np.ndarray, rng: RngStream) -> np.ndarray:
        """One observation per entry of ``thetas`` (broadcast shape)."""
        raise NotImplementedError

    def draw_sum(self, thetas: np.ndarray, n: int, rng: RngStream) -> np.ndarray:
        """Sum of ``n`` i.i.d. observations per entry of ``thetas``."""
        raise NotImplementedError

    def prior_draws(self, size: int, rng: RngStream) -> np.ndarray:
        raise NotImplementedError

    # prior and oracles ---------------------------------------------------

    def prior_sample(self, rng: RngStream) -> float:
        return float(self.prior_draws(1, rng)[0])

    def log_prior_density(self, theta: float) -> float:
        raise NotImplementedError

    def exact_log_likelihood(self, theta: float, dataset: Dataset) -> float:
        raise NotImplementedError

    def exact_log_posterior_density(self, dataset: Dataset, theta: float) -> float:
        raise NotImplementedError

    def exact_log_marginal(self, dataset: Dataset) -> float:
        raise NotImplementedError

    def posterior_dist(self, dataset: Dataset):
        """Frozen scipy distribution of the conjugate posterior."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{self.id}>"


class PoissonExp(ModelSpec):
    id = "poisson-exp"

    def draw(self, thetas, rng):
        return rng.poisson(thetas)

    def draw_sum(self, thetas, n, rng):
        return rng.poisson(n * np.asarray(thetas))

    def prior_draws(self, size, rng):
        draws = rng.exponential(1.0, size)
        # exponential() can return exactly 0.0 with vanishing probability
        return np.where(draws > 0.0, draws, np.finfo(float).tiny)

    def log_prior_density(self, theta):
        return -self.check_theta(theta)

    def exact_log_likelihood(self, theta, dataset):
        theta = self.check_theta(theta)
        y = dataset.array()
        return float(dataset.total * math.log(theta) - dataset.n * theta - gammaln(y + 1).sum())

    def exact_log_posterior_density(self, dataset, theta):
        # Gamma(shape s+1, rate n+1)
        theta = self.check_theta(theta)
        shape, rate = dataset.total + 1, dataset.n + 1
        return float(shape * math.log(rate) - gammaln(shape) + (shape - 1) * math.log(theta) - rate * theta)

    def exact_log_marginal(self, dataset):
        s, n = dataset.total, dataset.n
        return float(gammaln(s + 1) - (s + 1) * math.log(n + 1) - gammaln(dataset.array() + 1).sum())

    def posterior_dist(self, dataset):
        from scipy import stats

        return stats.gamma(a=dataset.total + 1, scale=1.0 / (dataset.n + 1))


class GeometricUniform(ModelSpec):
    id = "geometric-uniform"
    upper = 1.0

    def draw(self, thetas, rng):
        # numpy counts trials up to and including the first success
        return rng.geometric(thetas) - 1

    def draw_sum(self, thetas, n, rng):
        return rng.negative_binomial(n, thetas)

    def prior_draws(self, size, rng):
        draws = rng.uniform(0.0, 1.0, size)
        return np.where(draws > 0.0, draws, np.finfo(float).tiny)

    def log_prior_density(self, theta):
        self.check_theta(theta)
        return 0.0

    def exact_log_likelihood(self, theta, dataset):
        p = self.check_theta(theta)
        return float(dataset.n * math.log(p) + dataset.total * math.log1p(-p))

    def exact_log_posterior_density(self, dataset, theta):
        # Beta(n+1, s+1)
        p = self.check_theta(theta)
        n, s = dataset.n, dataset.total
        return float(n * math.log(p) + s * math.log1p(-p) - betaln(n + 1, s + 1))

    def exact_log_marginal(self, dataset):
        return float(betaln(dataset.n + 1, dataset.total + 1))

    def posterior_dist(self, dataset):
        from scipy import stats

        return stats.beta(dataset.n + 1, dataset.total + 1)


POISSON_EXP = PoissonExp()
GEOMETRIC_UNIFORM = GeometricUniform()
MODELS = {m.id: m for m in (POISSON_EXP, GEOMETRIC_UNIFORM)}


def get_model(name: str) -> ModelSpec:
    try:
        return MODELS[name]
    except KeyError:
        raise InvalidConfig(f"unknown model {name!r}; expected one of {sorted(MODELS)}", key="model") from None


# Summary statistics ------------------------------------------------------
#
# A statistic reduces a dataset to one integer and knows how to simulate
# that integer directly for a batch of parameter values.  For sums this
# uses the closed-form distribution of the sum (Poisson / negative
# binomial), which has the same law as summing simulated datasets.


class Statistic:
    name = ""

    def observed(self, dataset: Dataset) -> int:
        raise NotImplementedError

    def simulate(self, model: ModelSpec, thetas: np.ndarray, n: int, rng: RngStream) -> np.ndarray:
        raise NotImplementedError


class TotalCount(Statistic):
    name = "sum"

    def observed(self, dataset):
        return dataset.total

    def simulate(self, model, thetas, n, rng):
        return model.draw_sum(thetas, n, rng)


class HalfSum(Statistic):
    """Total over the first ceil(n/2) observations only."""

    name = "half-sum"

    def observed(self, dataset):
        return sum(dataset.counts[: math.ceil(dataset.n / 2)])

    def simulate(self, model, thetas, n, rng):
        return model.draw_sum(thetas, math.ceil(n / 2), rng)


class MaxCount(Statistic):
    name = "max"

    def observed(self, dataset):
        return max(dataset.counts)

    def simulate(self, model, thetas, n, rng):
        thetas = np.asarray(thetas)
        return model.draw(np.broadcast_to(thetas[:, None], (thetas.size, n)), rng).max(axis=1)


SUM = TotalCount()
STATISTICS = {s.name: s for s in (SUM, HalfSum(), MaxCount())}


def get_statistic(name: str) -> Statistic:
    try:
        return STATISTICS[name]
    except KeyError:
        raise InvalidConfig(
            f"unknown statistic {name!r}; expected one of {sorted(STATISTICS)}", key="statistics"
        ) from None
