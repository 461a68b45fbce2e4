"""Stratified sampling of sources per topic.

Preserves a reference population's trust-level distribution via
largest-remainder apportionment, with remainder ties broken toward the
lower trust index so low-trust strata are never the ones shorted. Sampling
within a stratum is uniform without replacement under a seeded PRNG.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .registry import TRUST_LEVELS, Source, Topic, TrustLevel


class EmptyStratumError(ValueError):
    """No sources available for the requested topic."""


class InfeasiblePlanError(ValueError):
    """A stratum holds fewer sources than its allocation requires."""

    def __init__(self, level: TrustLevel, need: int, have: int):
        self.level = level
        super().__init__(
            f"stratum {level.name!r} needs {need} sources but has {have}"
        )


@dataclass(frozen=True)
class LevelDistribution:
    topic: Topic
    proportions: dict[TrustLevel, float]


@dataclass(frozen=True)
class SamplePlan:
    topic: Topic
    total: int
    allocation: dict[TrustLevel, int]
    seed: int = 0


def compute_distribution(sources: list[Source], topic: Topic) -> LevelDistribution:
    """Fraction of the topic's sources at each trust level."""
    pool = [s for s in sources if s.topic == topic]
    if not pool:
        raise EmptyStratumError(f"no sources for topic {topic.id!r}")
    n = len(pool)
    counts = {lv: 0 for lv in TRUST_LEVELS}
    for s in pool:
        counts[s.trust_level] += 1
    return LevelDistribution(topic, {lv: counts[lv] / n for lv in TRUST_LEVELS})


def allocate(dist: LevelDistribution, total: int) -> dict[TrustLevel, int]:
    """Largest-remainder apportionment of `total` seats to trust levels.

    Remainder ties go to the lower trust index first.
    """
    if total < 1:
        raise ValueError(f"total must be >= 1, got {total}")
    quotas = {lv: dist.proportions.get(lv, 0.0) * total for lv in TRUST_LEVELS}
    alloc = {lv: int(quotas[lv]) for lv in TRUST_LEVELS}
    leftover = total - sum(alloc.values())
    # Sort by descending remainder, then ascending trust index.
    order = sorted(TRUST_LEVELS, key=lambda lv: (-(quotas[lv] - alloc[lv]), lv.index))
    for lv in order[:leftover]:
        alloc[lv] += 1
    return alloc


def make_plan(dist: LevelDistribution, total: int, seed: int) -> SamplePlan:
    return SamplePlan(dist.topic, total, allocate(dist, total), seed)


def stratified_sample(sources: list[Source], plan: SamplePlan) -> list[Source]:
    """Draw plan.allocation[level] sources uniformly at random per level.

    Deterministic given plan.seed regardless of input order; output is
    sorted by (level index, domain).
    """
    pool = [s for s in sources if s.topic == plan.topic]
    strata: dict[TrustLevel, list[Source]] = {lv: [] for lv in TRUST_LEVELS}
    for s in pool:
        strata[s.trust_level].append(s)
    rng = random.Random(plan.seed)
    chosen: list[Source] = []
    for lv in TRUST_LEVELS:
        need = plan.allocation.get(lv, 0)
        stratum = sorted(strata[lv], key=lambda s: s.domain)
        if need > len(stratum):
            raise InfeasiblePlanError(lv, need, len(stratum))
        chosen.extend(rng.sample(stratum, need))
    chosen.sort(key=lambda s: (s.trust_level.index, s.domain))
    return chosen
