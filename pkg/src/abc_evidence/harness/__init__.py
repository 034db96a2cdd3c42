from .config import ExperimentConfig, load_config
from .experiments import (
    run,
    run_evidence_experiment,
    run_mc_pathology,
    run_posterior_experiment,
    run_replicate_study,
    run_sufficiency_degradation,
)

__all__ = [
    "ExperimentConfig",
    "load_config",
    "run",
    "run_evidence_experiment",
    "run_mc_pathology",
    "run_posterior_experiment",
    "run_replicate_study",
    "run_sufficiency_degradation",
]
