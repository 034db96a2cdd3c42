import math

import numpy as np
import pytest
from scipy import integrate

from abc_evidence.core import PAPER_COUNTS, Dataset

# log p(y) for the paper dataset under Poisson/Exp(1); 40-digit mpmath
# quadrature of the integrand exp(-11 l) l^18 / 864 over (0, inf).
PAPER_LOG_MARGINAL = -15.926137743940042


@pytest.fixture
def paper():
    return Dataset(PAPER_COUNTS)


def poisson_loglik_termwise(theta, counts):
    """Product of Poisson pmfs, one observation at a time."""
    total = 0.0
    for y in counts:
        total += math.log(theta**y * math.exp(-theta) / math.factorial(y))
    return total


def quadrature_log_marginal(model_id, counts):
    """log of the integral of likelihood x prior, by adaptive quadrature.

    Written from the model definitions directly, independent of the package.
    The integrand is scaled by its value at the mode to avoid underflow.
    """
    n, s = len(counts), sum(counts)
    log_fact = sum(math.lgamma(y + 1) for y in counts)
    if model_id == "poisson-exp":
        lo, hi = 0.0, math.inf
        mode = s / (n + 1)

        def log_f(t):
            return s * math.log(t) - n * t - log_fact - t if t > 0 else (-log_fact if s == 0 else -math.inf)

    else:
        lo, hi = 0.0, 1.0
        mode = n / (n + s)

        def log_f(p):
            if p <= 0:
                return -math.inf
            if p >= 1:
                return 0.0 if s == 0 else -math.inf
            return n * math.log(p) + s * math.log1p(-p)

    shift = log_f(mode)
    f = lambda t: math.exp(log_f(t) - shift)
    total = 0.0
    for a, b in ((lo, mode), (mode, hi)):
        if b > a:
            val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=200)
            total += val
    return math.log(total) + shift


def random_datasets(seed, count, max_n=20, max_count=10):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        yield Dataset(rng.integers(0, max_count + 1, size=n))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
