"""Shared types, deterministic random streams and the error taxonomy."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable

import numpy as np

# An RngStream is a numpy Generator built by make_stream; never share one
# between workers, derive a new one per (seed, label) instead.
RngStream = np.random.Generator

PAPER_COUNTS = (2, 3, 1, 1, 2, 1, 3, 1, 3, 1)
DEFAULT_EPSILON = 0.001
DEFAULT_N_ACCEPT = 10_000
DEFAULT_MAX_ATTEMPTS = 10_000_000
DEFAULT_M_SIMS = 1_000_000

_U64 = 2**64


class ToolError(Exception):
    """Base class for every failure raised by the toolkit."""

    kind = "ToolError"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class BudgetExceeded(ToolError):
    kind = "BudgetExceeded"


class UnseenObservation(ToolError):
    kind = "UnseenObservation"


class InvalidConfig(ToolError):
    kind = "InvalidConfig"

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class DegenerateSample(ToolError):
    kind = "DegenerateSample"


@dataclass(frozen=True)
class Dataset:
    """Ordered vector of nonnegative integer counts."""

    counts: tuple[int, ...]

    def __init__(self, counts: Iterable[int]):
        values = tuple(int(c) for c in counts)
        if len(values) < 1:
            raise InvalidConfig("dataset must contain at least one count", key="counts")
        if any(c < 0 for c in values):
            raise InvalidConfig("dataset counts must be nonnegative", key="counts")
        object.__setattr__(self, "counts", values)

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    def digest(self) -> str:
        """Content hash used to tie evidence estimates to one dataset."""
        text = ",".join(str(c) for c in self.counts)
        return hashlib.sha256(text.encode("ascii")).hexdigest()


@dataclass(frozen=True)
class AbcConfig:
    epsilon: float = DEFAULT_EPSILON
    n_accept: int = DEFAULT_N_ACCEPT
    max_attempts_per_accept: int = DEFAULT_MAX_ATTEMPTS
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise InvalidConfig(f"epsilon must be >= 0, got {self.epsilon}", key="epsilon")
        if int(self.n_accept) != self.n_accept or self.n_accept < 1:
            raise InvalidConfig(f"n_accept must be a positive integer, got {self.n_accept}", key="n_accept")
        if int(self.max_attempts_per_accept) != self.max_attempts_per_accept or self.max_attempts_per_accept < 1:
            raise InvalidConfig(
                f"max_attempts_per_accept must be a positive integer, got {self.max_attempts_per_accept}",
                key="max_attempts",
            )
        if int(self.seed) != self.seed or not 0 <= self.seed < _U64:
            raise InvalidConfig(f"seed must be an unsigned 64-bit integer, got {self.seed}", key="seed")


def _label_words(label: str) -> tuple[int, ...]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))


def make_stream(seed: int, label: str) -> RngStream:
    """Return a reproducible generator keyed by ``(seed, label)``.

    The label is hashed into the SeedSequence spawn key, so streams for
    different purposes ("abc", "lik", "data-gen") never overlap and do not
    depend on the order in which they are created.
    """
    if not 0 <= int(seed) < _U64:
        raise InvalidConfig(f"seed must be an unsigned 64-bit integer, got {seed}", key="seed")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=_label_words(label))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(base_seed: int, index: int) -> int:
    """Per-replicate 64-bit seed; a pure function of (base_seed, index)."""
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
