"""Likelihood-free marginal likelihoods and ABC model choice for count data."""

from .abcsampler import (
    ModelChoiceSample,
    PosteriorSample,
    abc_model_choice,
    abc_posterior,
    mc_log_bayes_factor,
    posterior_model_probs,
)
from .core import (
    AbcConfig,
    BudgetExceeded,
    Dataset,
    DegenerateSample,
    InvalidConfig,
    ToolError,
    UnseenObservation,
    make_stream,
)
from .density import KdeEstimate, SimulatedLikelihood, kde_log_ordinate, simulated_log_likelihood
from .evidence import EvidenceEstimate, estimate_log_evidence, log_bayes_factor, replicate_evidence
from .models import GEOMETRIC_UNIFORM, POISSON_EXP, ModelSpec, sufficient_stat

__version__ = "0.1.0"
