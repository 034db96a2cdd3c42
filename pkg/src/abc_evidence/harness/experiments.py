"""Experiment drivers.  Each ``run_*`` computes everything first, then
writes its files (and ``run_config.txt``) in one go, so a failed run leaves
no partial output."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..abcsampler import abc_model_choice, abc_posterior, mc_log_bayes_factor
from ..core import DegenerateSample, InvalidConfig, ToolError, derive_seed, make_stream
from ..evidence import estimate_log_evidence, log_bayes_factor, map_ordered
from ..models import SUM, get_model, get_statistic
from .config import ExperimentConfig, prepare_output_dir
from .svg import histogram_svg, scatter_svg
from .tables import csv_text, write_text

log = logging.getLogger(__name__)

REPLICATE_HEADER = ("replicate", "seed", "n", "s", "log_evidence_abc", "log_evidence_exact", "abs_error")
PATHOLOGY_HEADER = ("n", "replicate", "log_bf_abcmc", "log_bf_exact", "log_bf_alg2")
SUFFICIENCY_HEADER = ("statistic", "replicate", "log_evidence_abc", "log_evidence_exact", "abs_error")


@dataclass
class RunResult:
    files: dict[str, Path] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def _commit(cfg: ExperimentConfig, out: Path, texts: dict[str, str], summary: dict) -> RunResult:
    texts = dict(texts)
    texts["run_config.txt"] = cfg.to_text()
    result = RunResult(summary=summary)
    for name, text in texts.items():
        path = out / name
        write_text(path, text)
        result.files[name] = path
    return result


def _reraise_with_seed(exc: ToolError, seed: int):
    return type(exc)(f"replicate with seed {seed} failed: {exc.message}")


# posterior ------------------------------------------------------------------


def run_posterior_experiment(cfg: ExperimentConfig) -> RunResult:
    """ABC posterior draws plus a histogram overlay of the conjugate posterior."""
    out = prepare_output_dir(cfg.out)
    model = cfg.model_spec
    dataset = cfg.dataset(cfg.seed)
    sample = abc_posterior(model, dataset, cfg.abc_config(), make_stream(cfg.seed, "abc"))
    draws = sample.draws
    exact = model.posterior_dist(dataset)
    lo, hi = exact.ppf(1e-4), exact.ppf(1 - 1e-4)
    lo, hi = min(lo, draws.min()), max(hi, draws.max())
    if model.upper < np.inf:
        hi = min(hi, model.upper)
    grid = np.linspace(max(lo, model.lower), hi, 200)
    svg = histogram_svg(
        draws,
        cfg.bins,
        grid,
        exact.pdf(grid),
        title=f"ABC posterior vs exact ({model.id}, n={dataset.n}, s={dataset.total})",
        xlabel="theta",
        ylabel="posterior density",
    )
    summary = {
        "theta_mean": float(draws.mean()),
        "exact_mean": float(exact.mean()),
        "acceptance_rate": sample.acceptance_rate,
        "attempts": sample.attempts,
    }
    return _commit(
        cfg,
        out,
        {
            "posterior_draws.csv": csv_text(("draw_index", "theta"), enumerate(draws.tolist())),
            "posterior_overlay.svg": svg,
        },
        summary,
    )


# evidence / replicate study ---------------------------------------------------


def _evidence_task(args):
    cfg, model_id, rep, seed, stat_name = args
    model = get_model(model_id)
    try:
        dataset = cfg.dataset(seed)
        est = estimate_log_evidence(
            model, dataset, cfg.abc_config(seed), cfg.m_sims, cfg.smoothing, get_statistic(stat_name), cfg.point
        )
    except ToolError as exc:
        raise _reraise_with_seed(exc, seed) from exc
    return rep, seed, dataset, est, model.exact_log_marginal(dataset)


def run_evidence_experiment(cfg: ExperimentConfig) -> RunResult:
    """One (or ``replicates``) evidence estimates with all ingredients."""
    out = prepare_output_dir(cfg.out)
    tasks = [(cfg, cfg.model, r, derive_seed(cfg.seed, r), SUM.name) for r in range(cfg.replicates)]
    results = map_ordered(_evidence_task, tasks, cfg.workers)
    header = (
        "replicate", "seed", "model", "n", "s", "log_evidence", "log_evidence_exact", "theta_hat",
        "log_lik_hat", "log_prior_at_hat", "log_post_ordinate_hat", "bandwidth", "acceptance_rate", "attempts",
    )
    rows = [
        (rep, seed, e.model_id, d.n, d.total, e.log_evidence, exact, e.theta_hat, e.log_lik_hat,
         e.log_prior_at_hat, e.log_post_ordinate_hat, e.bandwidth, e.acceptance_rate, e.attempts)
        for rep, seed, d, e, exact in results
    ]
    values = np.array([r[3].log_evidence for r in results])
    summary = {"mean_log_evidence": float(values.mean()), "exact": results[0][4]}
    if len(values) > 1:
        summary["sd_log_evidence"] = float(values.std(ddof=1))
    return _commit(cfg, out, {"evidence.csv": csv_text(header, rows)}, summary)


def run_replicate_study(cfg: ExperimentConfig) -> RunResult:
    """Estimated versus exact log evidence over replicate datasets."""
    if cfg.replicates < 2:
        raise InvalidConfig("replicate-study needs replicates >= 2", key="replicates")
    out = prepare_output_dir(cfg.out)
    tasks = [(cfg, cfg.model, r, derive_seed(cfg.seed, r), SUM.name) for r in range(cfg.replicates)]
    results = map_ordered(_evidence_task, tasks, cfg.workers)
    rows = [
        (rep, seed, d.n, d.total, e.log_evidence, exact, abs(e.log_evidence - exact))
        for rep, seed, d, e, exact in results
    ]
    est = np.array([r[4] for r in rows])
    exact = np.array([r[5] for r in rows])
    err = np.array([r[6] for r in rows])
    summary = {
        "within_0.1": int((err <= 0.1).sum()),
        "median_abs_error": float(np.median(err)),
        "max_abs_error": float(err.max()),
    }
    if np.ptp(exact) > 0:
        summary["slope"] = float(np.polyfit(exact, est, 1)[0])
    svg = scatter_svg(
        exact,
        est,
        title=f"log marginal likelihood: ABC vs exact ({len(rows)} datasets)",
        xlabel="exact log p(y)",
        ylabel="ABC log p(y)",
    )
    return _commit(cfg, out, {"replicates.csv": csv_text(REPLICATE_HEADER, rows), "evidence_scatter.svg": svg}, summary)


# ABC model choice pathology -------------------------------------------------


def _pathology_task(args):
    cfg, n, rep, seed = args
    models = cfg.model_specs
    prior = cfg.model_prior_vector
    gen_model, theta, _ = cfg.generator
    dataset = gen_model.simulate(theta, n, make_stream(seed, "data-gen"))
    exact = models[0].exact_log_marginal(dataset) - models[1].exact_log_marginal(dataset)
    try:
        mc = abc_model_choice(models, prior, dataset, cfg.abc_config(seed), make_stream(seed, "abc-mc"))
        try:
            bf_mc = mc_log_bayes_factor(mc, prior, 0, 1)
        except DegenerateSample:
            log.warning("n=%d replicate %d: ABC-MC sample degenerate", n, rep)
            bf_mc = None
        e1, e2 = (
            estimate_log_evidence(m, dataset, cfg.abc_config(derive_seed(seed, j + 1)), cfg.m_sims, cfg.smoothing)
            for j, m in enumerate(models[:2])
        )
    except ToolError as exc:
        raise _reraise_with_seed(exc, seed) from exc
    return n, rep, bf_mc, exact, log_bayes_factor(e1, e2)


def _median_abs(values, ref):
    diffs = [abs(v - r) for v, r in zip(values, ref) if v is not None]
    return float(np.median(diffs)) if diffs else float("nan")


def run_mc_pathology(cfg: ExperimentConfig) -> RunResult:
    """ABC model choice, exact and likelihood-free log Bayes factors across n."""
    if len(cfg.model_specs) != 2:
        raise InvalidConfig("mc-pathology needs exactly two models", key="models")
    if cfg.replicates < 2:
        raise InvalidConfig("mc-pathology needs replicates >= 2 for medians", key="replicates")
    if not cfg.generate:
        raise InvalidConfig("mc-pathology needs a generate=model,theta,n dataset source", key="generate")
    out = prepare_output_dir(cfg.out)
    tasks = [
        (cfg, n, r, derive_seed(derive_seed(cfg.seed, n), r)) for n in cfg.n_values for r in range(cfg.replicates)
    ]
    rows = map_ordered(_pathology_task, tasks, cfg.workers)
    summary_rows = []
    for n in cfg.n_values:
        sub = [r for r in rows if r[0] == n]
        exact = [r[3] for r in sub]
        summary_rows.append(
            (n, _median_abs([r[2] for r in sub], exact), _median_abs([r[4] for r in sub], exact),
             sum(r[2] is None for r in sub))
        )
    texts = {
        "mc_pathology.csv": csv_text(PATHOLOGY_HEADER, rows),
        "mc_pathology_summary.csv": csv_text(
            ("n", "median_abs_err_abcmc", "median_abs_err_alg2", "degenerate_abcmc"), summary_rows
        ),
    }
    summary = {n: {"abcmc": a, "alg2": b} for n, a, b, _ in summary_rows}
    return _commit(cfg, out, texts, summary)


# sufficiency degradation ------------------------------------------------------


def run_sufficiency_degradation(cfg: ExperimentConfig) -> RunResult:
    """Evidence error under the sufficient total and two lossy statistics."""
    if cfg.replicates < 2:
        raise InvalidConfig("sufficiency needs replicates >= 2", key="replicates")
    stats = cfg.statistic_specs
    out = prepare_output_dir(cfg.out)
    tasks = [
        (cfg, cfg.model, r, derive_seed(cfg.seed, r), stat.name) for stat in stats for r in range(cfg.replicates)
    ]
    results = map_ordered(_evidence_task, tasks, cfg.workers)
    rows = [
        (task[4], rep, e.log_evidence, exact, abs(e.log_evidence - exact))
        for task, (rep, _, _, e, exact) in zip(tasks, results)
    ]
    medians = [(s.name, float(np.median([r[4] for r in rows if r[0] == s.name]))) for s in stats]
    texts = {
        "sufficiency.csv": csv_text(SUFFICIENCY_HEADER, rows),
        "sufficiency_summary.csv": csv_text(("statistic", "median_abs_error"), medians),
    }
    return _commit(cfg, out, texts, dict(medians))


RUNNERS = {
    "posterior": run_posterior_experiment,
    "evidence": run_evidence_experiment,
    "replicate-study": run_replicate_study,
    "mc-pathology": run_mc_pathology,
    "sufficiency": run_sufficiency_degradation,
}


def run(cfg: ExperimentConfig) -> RunResult:
    return RUNNERS[cfg.experiment](cfg)
