"""Population-level observables.

All metrics are pure functions of the agent list: opinion polarization (gap
between the two groups' mean self-to-latte beliefs), affective polarization
(mean per-agent gap between feelings toward ingroup and outgroup neighbors,
classified by the neighbors' true affiliations), mean internal dissonance,
and fixed-range histogram snapshots of the belief distributions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .population import LATTE, Agent

log = logging.getLogger(__name__)


def opinion_polarization(agents: Sequence[Agent], concept=LATTE) -> float:
    """Absolute gap between the groups' mean self-to-concept beliefs; in [0, 2]."""
    sums = {"A": 0.0, "B": 0.0}
    counts = {"A": 0, "B": 0}
    for agent in agents:
        c = agent.concept_for(concept)
        if c is None:
            raise ValueError(f"agent {agent.id} has no concept for entity {concept!r}")
        sums[agent.group] += agent.beliefs.weights[0, c]
        counts[agent.group] += 1
    if counts["A"] == 0 or counts["B"] == 0:
        raise ValueError("opinion polarization needs both groups non-empty")
    return abs(sums["A"] / counts["A"] - sums["B"] / counts["B"])


def affective_polarization_with_counts(agents: Sequence[Agent]) -> tuple[float, int, int]:
    """Affective polarization plus (agents used, agents skipped).

    Per agent: mean belief toward ingroup-neighbor concepts minus mean toward
    outgroup-neighbor concepts. Agents without at least one neighbor on each
    side have no defined gap and are skipped, shrinking the denominator.
    """
    total = 0.0
    used = 0
    skipped = 0
    for agent in agents:
        ing = agent.ingroup_neighbor_concepts
        out = agent.outgroup_neighbor_concepts
        if len(ing) == 0 or len(out) == 0:
            skipped += 1
            continue
        w = agent.beliefs.weights
        total += w[0, ing].mean() - w[0, out].mean()
        used += 1
    if used == 0:
        raise ValueError("no agent has both an ingroup and an outgroup neighbor")
    if skipped:
        log.debug("affective polarization skipped %d agent(s) lacking in/outgroup neighbors", skipped)
    return total / used, used, skipped


def affective_polarization(agents: Sequence[Agent]) -> float:
    """Mean per-agent ingroup-vs-outgroup feeling gap; in [-2, 2]."""
    value, _, _ = affective_polarization_with_counts(agents)
    return value


def mean_dissonance(agents: Sequence[Agent]) -> float:
    """Population mean of per-agent internal dissonance; in [-1, 1]."""
    if not agents:
        raise ValueError("empty population")
    return float(np.mean([agent.beliefs.dissonance() for agent in agents]))


@dataclass
class HistogramSet:
    """Fixed-range [-1, 1] histograms of the belief distributions."""

    bin_edges: np.ndarray
    latte_group_a: np.ndarray      # self-to-latte beliefs of group A members
    latte_group_b: np.ndarray      # same for group B
    group_a_latte: np.ndarray      # the groupA-to-latte association, pooled over everyone
    ingroup: np.ndarray            # beliefs toward ingroup neighbors, pooled pairs
    outgroup: np.ndarray           # beliefs toward outgroup neighbors, pooled pairs


def snapshot_histograms(agents: Sequence[Agent], bin_count: int) -> HistogramSet:
    """Histogram the four figure-grade belief distributions at one instant."""
    if bin_count < 2:
        raise ValueError(f"bin_count must be >= 2, got {bin_count}")
    edges = np.linspace(-1.0, 1.0, bin_count + 1)
    latte_a = []
    latte_b = []
    ga_latte = []
    ingroup = []
    outgroup = []
    for agent in agents:
        w = agent.beliefs.weights
        latte = agent.latte_concept
        (latte_a if agent.group == "A" else latte_b).append(w[0, latte])
        ga_latte.append(w[agent.group_a_concept, latte])
        ingroup.extend(w[0, agent.ingroup_neighbor_concepts])
        outgroup.extend(w[0, agent.outgroup_neighbor_concepts])

    def hist(values):
        counts, _ = np.histogram(np.asarray(values, dtype=np.float64), bins=edges)
        return counts

    return HistogramSet(
        bin_edges=edges,
        latte_group_a=hist(latte_a),
        latte_group_b=hist(latte_b),
        group_a_latte=hist(ga_latte),
        ingroup=hist(ingroup),
        outgroup=hist(outgroup),
    )


@dataclass
class MetricsSeries:
    """Time-indexed population metrics sampled along one run."""

    steps: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    p_o: np.ndarray = field(default_factory=lambda: np.empty(0, np.float64))
    p_a: np.ndarray = field(default_factory=lambda: np.empty(0, np.float64))
    mean_dissonance: np.ndarray = field(default_factory=lambda: np.empty(0, np.float64))
    snapshots: list = field(default_factory=list)  # (step, HistogramSet) pairs

    def __len__(self) -> int:
        return len(self.steps)

    def validate(self) -> None:
        if not (len(self.steps) == len(self.p_o) == len(self.p_a) == len(self.mean_dissonance)):
            raise ValueError("metric series lengths disagree")
        if np.any(np.diff(self.steps) <= 0):
            raise ValueError("sample steps must be strictly increasing")
