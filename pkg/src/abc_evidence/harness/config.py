"""Experiment configuration: flat ``key=value`` files merged with CLI flags.

Every key, its default and its parser live in ``FIELDS``.  The resolved
configuration is written back in the same format as ``run_config.txt`` so a
run can be repeated from its own output.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields
from pathlib import Path

from ..core import (
    DEFAULT_EPSILON,
    DEFAULT_M_SIMS,
    DEFAULT_MAX_ATTEMPTS,
    DEFAULT_N_ACCEPT,
    PAPER_COUNTS,
    AbcConfig,
    Dataset,
    InvalidConfig,
    make_stream,
)
from ..evidence import POINTS
from ..models import get_model, get_statistic

EXPERIMENTS = ("posterior", "evidence", "replicate-study", "mc-pathology", "sufficiency")
SOURCE_KEYS = ("counts", "data", "generate")
DEFAULT_REPLICATES = {"posterior": 1, "evidence": 1, "replicate-study": 50, "mc-pathology": 20, "sufficiency": 20}
PAPER_GENERATE = "poisson-exp,2,10"


def _int(key, text, minimum=None, maximum=None):
    try:
        value = int(text)
    except ValueError:
        raise InvalidConfig(f"{key}: expected an integer, got {text!r}", key=key) from None
    if minimum is not None and value < minimum:
        raise InvalidConfig(f"{key}: must be >= {minimum}, got {value}", key=key)
    if maximum is not None and value > maximum:
        raise InvalidConfig(f"{key}: must be <= {maximum}, got {value}", key=key)
    return value


def _real(key, text, minimum=0.0):
    try:
        value = float(text)
    except ValueError:
        raise InvalidConfig(f"{key}: expected a number, got {text!r}", key=key) from None
    if not math.isfinite(value) or value < minimum:
        raise InvalidConfig(f"{key}: must be a finite number >= {minimum}, got {text}", key=key)
    return value


def _int_list(key, text):
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise InvalidConfig(f"{key}: expected comma-separated integers, got {text!r}", key=key) from None
    if not values:
        raise InvalidConfig(f"{key}: empty list", key=key)
    return values


def _choice(key, text, options):
    if text not in options:
        raise InvalidConfig(f"{key}: expected one of {list(options)}, got {text!r}", key=key)
    return text


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: str = "poisson-exp"
    models: str = "poisson-exp,geometric-uniform"
    model_prior: str = ""
    counts: str = ""
    data: str = ""
    generate: str = ""
    seed: int = 1
    epsilon: float = DEFAULT_EPSILON
    n_accept: int = DEFAULT_N_ACCEPT
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    m_sims: int = DEFAULT_M_SIMS
    smoothing: float = 0.0
    replicates: int = 0
    workers: int = 1
    point: str = "mean"
    n_grid: str = "10,50,100"
    statistics: str = "sum,half-sum,max"
    bins: int = 30
    out: str = "results"

    # derived views ------------------------------------------------------

    def abc_config(self, seed: int | None = None) -> AbcConfig:
        return AbcConfig(self.epsilon, self.n_accept, self.max_attempts, self.seed if seed is None else seed)

    @property
    def model_spec(self):
        return get_model(self.model)

    @property
    def model_specs(self):
        return [get_model(m) for m in self.models.split(",")]

    @property
    def model_prior_vector(self) -> list[float]:
        m = len(self.model_specs)
        if not self.model_prior:
            return [1.0 / m] * m
        return [float(v) for v in self.model_prior.split(",")]

    @property
    def statistic_specs(self):
        return [get_statistic(s) for s in self.statistics.split(",")]

    @property
    def n_values(self) -> tuple[int, ...]:
        return _int_list("n_grid", self.n_grid)

    @property
    def source(self) -> str:
        return next(k for k in SOURCE_KEYS if getattr(self, k))

    @property
    def generator(self):
        """(model, theta_true, n) of the ``generate`` source."""
        name, theta, n = self.generate.split(",")
        return get_model(name), float(theta), int(n)

    @property
    def theta_true(self) -> float | None:
        return self.generator[1] if self.generate else None

    @property
    def n(self) -> int:
        return self.generator[2] if self.generate else self.fixed_dataset().n

    def fixed_dataset(self) -> Dataset:
        """The dataset for a ``counts`` or ``data`` source."""
        if self.counts:
            return Dataset(int(c) for c in self.counts.split(","))
        if self.data:
            return read_dataset(self.data)
        raise InvalidConfig("no fixed dataset configured", key="counts")

    def dataset(self, seed: int) -> Dataset:
        """Dataset for one replicate; generated sources draw from ``data-gen``."""
        if self.generate:
            model, theta, n = self.generator
            return model.simulate(theta, n, make_stream(seed, "data-gen"))
        return self.fixed_dataset()

    def to_text(self) -> str:
        lines = ["# resolved abc-evidence configuration"]
        for f in fields(self):
            lines.append(f"{f.name}={getattr(self, f.name)}")
        return "\n".join(lines) + "\n"


def read_dataset(path: str | os.PathLike) -> Dataset:
    """One nonnegative decimal integer per line."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"data: cannot read {path}: {exc.strerror}", key="data") from None
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    try:
        return Dataset(int(ln) for ln in lines)
    except ValueError:
        raise InvalidConfig(f"data: {path} must hold one integer per line", key="data") from None


def write_dataset(path: str | os.PathLike, dataset: Dataset) -> None:
    Path(path).write_text("".join(f"{c}\n" for c in dataset.counts), encoding="utf-8", newline="\n")


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected key=value, got {raw!r}", key=line)
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _validate(raw: dict[str, str]) -> dict:
    known = {f.name for f in fields(ExperimentConfig)}
    for key in raw:
        if key not in known:
            raise InvalidConfig(f"unknown configuration key {key!r}", key=key)
    if "experiment" not in raw or not raw["experiment"]:
        raise InvalidConfig("no experiment given", key="experiment")
    out: dict = {}
    exp = out["experiment"] = _choice("experiment", raw["experiment"], EXPERIMENTS)
    for key, value in raw.items():
        if key == "experiment":
            continue
        if key in ("seed",):
            out[key] = _int(key, value, 0, 2**64 - 1)
        elif key in ("n_accept", "max_attempts", "workers", "replicates"):
            out[key] = _int(key, value, 1)
        elif key == "bins":
            out[key] = _int(key, value, 1)
        elif key == "m_sims":
            out[key] = _int(key, value, 10_000)
        elif key in ("epsilon", "smoothing"):
            out[key] = _real(key, value)
        elif key == "point":
            out[key] = _choice(key, value, POINTS)
        elif key == "model":
            out[key] = get_model(value).id
        elif key == "models":
            for name in value.split(","):
                get_model(name)
            out[key] = value
        elif key == "statistics":
            for name in value.split(","):
                try:
                    get_statistic(name)
                except InvalidConfig as exc:
                    raise InvalidConfig(f"statistics: {exc.message}", key="statistics") from None
            out[key] = value
        elif key == "n_grid":
            _int_list(key, value)
            if min(_int_list(key, value)) < 1:
                raise InvalidConfig("n_grid: sample sizes must be >= 1", key=key)
            out[key] = value
        else:
            out[key] = value

    given = [k for k in SOURCE_KEYS if out.get(k)]
    if len(given) > 1:
        raise InvalidConfig(f"exactly one dataset source allowed, got {given}", key=given[1])
    if not given:
        if exp in ("posterior", "evidence"):
            out["counts"] = ",".join(str(c) for c in PAPER_COUNTS)
        else:
            out["generate"] = PAPER_GENERATE
    if out.get("generate"):
        parts = out["generate"].split(",")
        if len(parts) != 3:
            raise InvalidConfig("generate: expected model,theta,n", key="generate")
        model = get_model(parts[0].strip())
        theta = _real("generate", parts[1])
        n = _int("generate", parts[2], 1)
        model.check_theta(theta)
        out["generate"] = f"{model.id},{parts[1].strip()},{n}"
    if out.get("counts"):
        try:
            counts = [int(c) for c in out["counts"].split(",")]
        except ValueError:
            raise InvalidConfig(f"counts: expected comma-separated integers, got {out['counts']!r}", key="counts") from None
        Dataset(counts)
        out["counts"] = ",".join(str(c) for c in counts)
    out.setdefault("replicates", DEFAULT_REPLICATES[exp])
    if out.get("model_prior"):
        m = len(out.get("models", ExperimentConfig.models).split(","))
        try:
            prior = [float(v) for v in out["model_prior"].split(",")]
        except ValueError:
            raise InvalidConfig("model_prior: expected comma-separated numbers", key="model_prior") from None
        if len(prior) != m:
            raise InvalidConfig(f"model_prior: {len(prior)} entries for {m} models", key="model_prior")
    AbcConfig(
        out.get("epsilon", DEFAULT_EPSILON),
        out.get("n_accept", DEFAULT_N_ACCEPT),
        out.get("max_attempts", DEFAULT_MAX_ATTEMPTS),
        out.get("seed", 0),
    )
    return out


def load_config(path: str | os.PathLike | None = None, **flags) -> ExperimentConfig:
    """Merge a config file (if any) with flags; flags win.  ``None`` flags
    are treated as absent."""
    raw: dict[str, str] = {}
    if path is not None:
        try:
            raw.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
        except OSError as exc:
            raise InvalidConfig(f"config: cannot read {path}: {exc.strerror}", key="config") from None
    given_sources = [k for k in SOURCE_KEYS if flags.get(k) is not None]
    if given_sources:
        # a source flag replaces whatever source the file named
        for k in SOURCE_KEYS:
            raw.pop(k, None)
    for key, value in flags.items():
        if value is not None:
            raw[key.replace("-", "_")] = str(value)
    return ExperimentConfig(**_validate(raw))


def prepare_output_dir(path: str | os.PathLike) -> Path:
    """Create ``path`` if needed and check it is writable, before any work."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InvalidConfig(f"out: cannot create {out}: {exc.strerror}", key="out") from None
    if not out.is_dir() or not os.access(out, os.W_OK | os.X_OK):
        raise InvalidConfig(f"out: {out} is not a writable directory", key="out")
    return out
