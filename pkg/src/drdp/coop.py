"""Cooperative-state analytics.

A region is in a cooperative state during a peak slot when at least half of
the homes (majority threshold, rounded up) stay below the fair per-home
share. This module has the closed-form probability and truncated
expectation for independent homes, an exhaustive enumeration oracle that
also covers heterogeneous probabilities, and an empirical reader that
extracts the same quantities from simulation output.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ENUMERATION_LIMIT",
    "CoopModel",
    "CoopObservation",
    "coop_probability",
    "coop_expectation",
    "enumerate_oracle",
    "measure_coop_state",
]

# 2**n outcome vectors are walked explicitly; keep that tractable.
ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class CoopModel:
    """Independent homes, each below the fair share with its own probability.

    ``p_lu`` may be given as one float (shared by all homes) or as one value
    per home.
    """

    n: int
    p_lu: tuple[float, ...]

    def __init__(self, n: int, p_lu: float | Sequence[float]) -> None:
        if n < 1:
            raise ValueError(f"n must be at least 1, got {n}")
        if isinstance(p_lu, numbers.Real):
            probs = (float(p_lu),) * n
        else:
            probs = tuple(float(p) for p in p_lu)
        if len(probs) != n:
            raise ValueError(f"{len(probs)} probabilities for {n} homes")
        for p in probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p_lu", probs)

    @property
    def p_hu(self) -> tuple[float, ...]:
        """Per-home probability of being at or above the fair share."""
        return tuple(1.0 - p for p in self.p_lu)

    @property
    def threshold(self) -> int:
        """Minimum number of below-share homes for a cooperative state."""
        return math.ceil(self.n / 2)

    @property
    def is_shared(self) -> bool:
        return all(p == self.p_lu[0] for p in self.p_lu)

    @property
    def shared_p(self) -> float:
        if not self.is_shared:
            raise ValueError(
                "homes have unequal probabilities; the closed form does not "
                "apply — use enumerate_oracle"
            )
        return self.p_lu[0]


@dataclass(frozen=True)
class CoopObservation:
    """Cooperative-state reading for one peak slot of a simulation."""

    slot: int
    q: int
    cooperative: bool


def coop_probability(model: CoopModel) -> float:
    """Probability that at least the majority threshold of homes cooperate.

    Binomial tail sum; requires a shared per-home probability.
    """
    p = model.shared_p
    n = model.n
    return float(
        sum(
            math.comb(n, q) * p**q * (1.0 - p) ** (n - q)
            for q in range(model.threshold, n + 1)
        )
    )


def coop_expectation(model: CoopModel) -> float:
    """Expected below-share count, restricted to cooperative outcomes.

    This is the binomial expectation truncated at the majority threshold,
    not ``n * p``; outcomes with fewer cooperating homes contribute zero.
    """
    p = model.shared_p
    n = model.n
    return float(
        sum(
            q * math.comb(n, q) * p**q * (1.0 - p) ** (n - q)
            for q in range(model.threshold, n + 1)
        )
    )


def enumerate_oracle(model: CoopModel, threshold: int | None = None) -> tuple[float, float]:
    """Walk all 2**n outcome vectors and accumulate the exact tail mass.

    Returns ``(probability, expectation)`` of the cooperative event and the
    truncated below-share count. Deliberately shares no code with the
    closed forms above, and also handles per-home probabilities.
    """
    if model.n > ENUMERATION_LIMIT:
        raise ValueError(
            f"n={model.n} exceeds the enumeration limit of {ENUMERATION_LIMIT}"
        )
    q_min = model.threshold if threshold is None else threshold
    if not 0 <= q_min <= model.n:
        raise ValueError(f"threshold {q_min} outside 0..{model.n}")
    p = np.asarray(model.p_lu)
    bit_positions = np.arange(model.n)
    probability = 0.0
    expectation = 0.0
    chunk = 1 << 16
    for start in range(0, 1 << model.n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << model.n), dtype=np.int64)
        bits = (masks[:, None] >> bit_positions[None, :]) & 1
        weights = np.prod(np.where(bits == 1, p[None, :], 1.0 - p[None, :]), axis=1)
        counts = bits.sum(axis=1)
        in_tail = counts >= q_min
        probability += float(weights[in_tail].sum())
        expectation += float((counts[in_tail] * weights[in_tail]).sum())
    return probability, expectation


def measure_coop_state(results: Iterable) -> list[CoopObservation]:
    """Read the cooperative state out of billed slots.

    Accepts a ``ScenarioResult`` or any iterable of per-slot billing
    results; off-peak slots are skipped because the fair share is undefined
    there. A home counts as cooperating when its billing basis is strictly
    below the slot average.
    """
    slots = getattr(results, "slots", results)
    observations = []
    for result in slots:
        if not result.peak_in_place:
            continue
        n = len(result.bills)
        q = sum(1 for bill in result.bills if bill.b_r < result.average)
        observations.append(
            CoopObservation(slot=result.slot, q=q, cooperative=q >= math.ceil(n / 2))
        )
    return observations
