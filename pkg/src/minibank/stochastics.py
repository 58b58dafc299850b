"""Seeded randomness: labelled substreams, triangular sampling, stochastic matrices.

Every random draw in a run comes from a substream keyed by (master seed,
consumer label, period).  Consumers therefore never perturb each other:
changing how many draws one consumer makes in some period leaves every
other consumer's draws, and the same consumer's draws in other periods,
bit-identical.  Runs sharing a master seed share their payment and lending
shocks period by period even when scenario switches alter how many
interbank decisions get taken along the way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Label order is part of the determinism contract: append only.
STREAM_LABELS = (
    "assignment",
    "cash_matrix",
    "wire_matrix",
    "repayment_ratio",
    "absorption",
    "interbank_decision",
    "matching",
    "rates",
    "target_ratio",
)

_LABEL_INDEX = {label: i for i, label in enumerate(STREAM_LABELS)}


class RngStreams:
    """Factory of independent, reproducible generators for one run."""

    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0:
            raise ConfigError("seed: must be a non-negative integer")
        self.seed = seed

    def stream(self, label: str, period: int = 0) -> np.random.Generator:
        """Fresh generator for (label, period); identical keys give identical draws."""
        try:
            idx = _LABEL_INDEX[label]
        except KeyError:
            raise ConfigError(f"unknown stream label {label!r}") from None
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(idx, int(period)))
        return np.random.Generator(np.random.PCG64(ss))

    def subseed(self, label: str) -> int:
        """Stable 64-bit key for the label, for keyed (stateless) draws."""
        try:
            idx = _LABEL_INDEX[label]
        except KeyError:
            raise ConfigError(f"unknown stream label {label!r}") from None
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(idx,))
        return int(ss.generate_state(2, dtype=np.uint64)[1])


_MASK64 = (1 << 64) - 1


def _mix64(z: int) -> int:
    """SplitMix64 finaliser: avalanching 64-bit mixer."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def keyed_threshold_draw(subseed: int, *fields: int) -> float:
    """One uniform draw on (0, 1] identified by an integer key.

    The draw depends only on (subseed, fields), never on how many other
    draws were made, so an object keeps its own randomness no matter what
    else a scenario changes around it.  Runs that share a seed then stay
    comparable object by object across scenario variants.
    """
    state = _mix64(subseed)
    for field in fields:
        state = _mix64(state ^ (int(field) & _MASK64))
    return 1.0 - state / 2.0**64


@dataclass(frozen=True)
class TriangularParams:
    """Parameters (lower, peak, upper) of a triangular distribution."""

    lower: float
    peak: float
    upper: float

    def __post_init__(self):
        if not (self.lower <= self.peak <= self.upper):
            raise ConfigError(
                "triangular parameters must satisfy lower <= peak <= upper, "
                f"got ({self.lower}, {self.peak}, {self.upper})"
            )

    @classmethod
    def point(cls, value: float) -> "TriangularParams":
        return cls(value, value, value)

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper

    @property
    def mean(self) -> float:
        return (self.lower + self.peak + self.upper) / 3.0


def sample_triangular(params: TriangularParams, rng: np.random.Generator, size=None):
    """Inverse-CDF triangular sampling, one uniform per draw.

    A degenerate law (lower == upper) is a point mass and consumes no draws,
    so switching a law off does not shift any other consumer's randomness.
    """
    a, c, b = params.lower, params.peak, params.upper
    if a == b:
        return a if size is None else np.full(size, float(a))
    u = rng.random(size)
    span = b - a
    fc = (c - a) / span
    left = a + np.sqrt(u * span * (c - a))
    right = b - np.sqrt((1.0 - u) * span * (b - c))
    out = np.where(u < fc, left, right)
    return float(out) if size is None else out


def random_row_stochastic(n: int, rng: np.random.Generator) -> np.ndarray:
    """n x n nonnegative matrix whose rows each sum to one."""
    if n < 1:
        raise ConfigError("a transition matrix needs at least one row")
    m = rng.random((n, n))
    m /= m.sum(axis=1, keepdims=True)
    return m


def uniform_matrix(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """n x m matrix of i.i.d. uniform draws on [0, 1)."""
    return rng.random((n, m))


def threshold_draws(n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform draws on (0, 1].

    Meant for trigger rules of the form ``draw > threshold``: a threshold of
    zero always fires and a threshold of one never does, exactly.
    """
    return 1.0 - rng.random(n)


@dataclass(frozen=True)
class RateLaws:
    """Per-period distributions of the fee and interest rates of reference."""

    r_a1: TriangularParams
    r_a2: TriangularParams
    r_interbank: TriangularParams  # one system-wide rate serves both sides of interbank stocks
    r_l1: TriangularParams
    r_l2: TriangularParams
    l5_spread: float = 0.03


@dataclass(frozen=True)
class RateSet:
    """One period's rates, applied to end-of-period stocks by the equity accrual."""

    r_a1: np.ndarray
    r_a2: np.ndarray
    r_a3: float
    r_l1: np.ndarray
    r_l2: np.ndarray
    r_l3: float
    r_l5: float


def draw_period_rates(n_banks: int, laws: RateLaws, rng: np.random.Generator) -> RateSet:
    """Draw one period's rates.

    Deposit and retail-loan rates are drawn per bank.  A single interbank
    rate per period serves both the lending and the borrowing side, so the
    two legs of every interbank position accrue at the same rate; the
    guarantee fee sits a fixed punitive spread above it.
    """
    r_a1 = sample_triangular(laws.r_a1, rng, n_banks)
    r_a2 = sample_triangular(laws.r_a2, rng, n_banks)
    r_l1 = sample_triangular(laws.r_l1, rng, n_banks)
    r_l2 = sample_triangular(laws.r_l2, rng, n_banks)
    r_ib = float(sample_triangular(laws.r_interbank, rng))
    return RateSet(
        r_a1=np.asarray(r_a1, dtype=float),
        r_a2=np.asarray(r_a2, dtype=float),
        r_a3=r_ib,
        r_l1=np.asarray(r_l1, dtype=float),
        r_l2=np.asarray(r_l2, dtype=float),
        r_l3=r_ib,
        r_l5=r_ib + laws.l5_spread,
    )
