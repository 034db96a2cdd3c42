"""Command-line entry point: ``abc-evidence <experiment> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from ..core import InvalidConfig, ToolError
from .config import EXPERIMENTS, load_config
from .experiments import run

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="abc-evidence",
        description="Likelihood-free marginal likelihood experiments on count data.",
    )
    p.add_argument("experiment", nargs="?", choices=EXPERIMENTS, help="experiment to run (or set in --config)")
    p.add_argument("--config", metavar="PATH", help="flat key=value configuration file")
    p.add_argument("--seed", metavar="U64")
    p.add_argument("--epsilon", metavar="R")
    p.add_argument("--n-accept", metavar="INT")
    p.add_argument("--max-attempts", metavar="INT")
    p.add_argument("--m-sims", metavar="INT")
    p.add_argument("--smoothing", metavar="R")
    p.add_argument("--replicates", metavar="INT")
    p.add_argument("--workers", metavar="INT")
    p.add_argument("--model", help="poisson-exp or geometric-uniform")
    p.add_argument("--models", help="comma-separated pair for mc-pathology")
    p.add_argument("--model-prior", help="comma-separated model prior probabilities")
    p.add_argument("--point", help="evaluation point: mean (default) or median")
    p.add_argument("--n-grid", help="sample sizes for mc-pathology, e.g. 10,50,100")
    p.add_argument("--statistics", help="statistics for sufficiency, e.g. sum,half-sum,max")
    p.add_argument("--bins", metavar="INT")
    p.add_argument("--out", metavar="DIR")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", metavar="PATH", help="dataset file, one count per line")
    src.add_argument("--counts", help='inline counts, e.g. "2,3,1,1"')
    src.add_argument("--generate", metavar="MODEL,THETA,N", help="simulate datasets from a model")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    logging.basicConfig(level=logging.INFO if args.pop("verbose") else logging.WARNING, format="%(message)s")
    config_path = args.pop("config")
    try:
        cfg = load_config(config_path, **args)
        result = run(cfg)
    except InvalidConfig as exc:
        print(f"abc-evidence: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ToolError as exc:
        print(f"abc-evidence: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for name, path in result.files.items():
        print(f"wrote {path}")
    for key, value in result.summary.items():
        print(f"{key}: {value}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
