"""Signed weighted belief network of a single agent.

Concepts are dense integer ids 0..n_concepts-1. The network is complete:
every unordered pair of concepts carries a weight in [-1, 1], stored as a
dense symmetric matrix with a structurally unused zero diagonal. A boolean
mask marks edges that are pinned for the lifetime of the network (an agent's
own group affiliations); updates to those edges are silent no-ops.

Triad energy follows structural balance: the energy of a concept triple is
minus the product of its three edge weights, so coherent triads (an even
number of negative edges) sit at negative energy. Dissonance is the mean
energy over all C(n, 3) triads and its gradient with respect to one edge has
a closed form used by the coherence update.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterator

import numpy as np

from . import _kernels as _k


def triad_count(n_concepts: int) -> int:
    """Number of unordered concept triples, C(n, 3)."""
    return n_concepts * (n_concepts - 1) * (n_concepts - 2) // 6


def iter_triads(n_concepts: int) -> Iterator[tuple[int, int, int]]:
    """Yield every unordered concept triple exactly once."""
    return combinations(range(n_concepts), 3)


class BeliefNetwork:
    """Dense symmetric belief matrix with clipped updates and fixed edges."""

    __slots__ = ("weights", "fixed", "n_concepts")

    def __init__(self, n_concepts: int):
        if n_concepts < 2:
            raise ValueError(f"need at least 2 concepts, got {n_concepts}")
        self.n_concepts = n_concepts
        self.weights = np.zeros((n_concepts, n_concepts), dtype=np.float64)
        self.fixed = np.zeros((n_concepts, n_concepts), dtype=np.bool_)

    @classmethod
    def from_weights(cls, weights, fixed=None) -> "BeliefNetwork":
        """Wrap an explicit weight matrix (copied), validating the invariants."""
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise ValueError(f"weights must be square, got shape {weights.shape}")
        if not np.allclose(weights, weights.T):
            raise ValueError("weights must be symmetric")
        if np.any(np.abs(weights) > 1.0):
            raise ValueError("weights must lie in [-1, 1]")
        net = cls(weights.shape[0])
        net.weights[:] = weights
        np.fill_diagonal(net.weights, 0.0)
        if fixed is not None:
            fixed = np.asarray(fixed, dtype=np.bool_)
            if fixed.shape != weights.shape:
                raise ValueError("fixed mask shape must match weights")
            net.fixed[:] = fixed | fixed.T
            np.fill_diagonal(net.fixed, False)
        return net

    @classmethod
    def _from_views(cls, weights: np.ndarray, fixed: np.ndarray) -> "BeliefNetwork":
        # Internal: wrap shared storage without copying (population stacks).
        net = object.__new__(cls)
        net.n_concepts = weights.shape[0]
        net.weights = weights
        net.fixed = fixed
        return net

    def copy(self) -> "BeliefNetwork":
        dup = BeliefNetwork(self.n_concepts)
        dup.weights[:] = self.weights
        dup.fixed[:] = self.fixed
        return dup

    def _check_concept(self, c: int) -> None:
        if not 0 <= c < self.n_concepts:
            raise ValueError(f"concept id {c} out of range [0, {self.n_concepts})")

    def _check_edge(self, x: int, y: int) -> None:
        self._check_concept(x)
        self._check_concept(y)
        if x == y:
            raise ValueError(f"edge endpoints must be distinct, got ({x}, {y})")

    def get_belief(self, x: int, y: int) -> float:
        self._check_edge(x, y)
        return float(self.weights[x, y])

    def set_belief(self, x: int, y: int, value: float) -> None:
        """Directly assign an edge weight (symmetric). Refuses fixed edges."""
        self._check_edge(x, y)
        if not -1.0 <= value <= 1.0:
            raise ValueError(f"belief weight {value} outside [-1, 1]")
        if self.fixed[x, y]:
            raise ValueError(f"edge ({x}, {y}) is fixed")
        self.weights[x, y] = value
        self.weights[y, x] = value

    def mark_fixed(self, x: int, y: int, value: float) -> None:
        """Pin an edge to a value; later updates through set_belief_clipped no-op."""
        self._check_edge(x, y)
        if not -1.0 <= value <= 1.0:
            raise ValueError(f"belief weight {value} outside [-1, 1]")
        self.weights[x, y] = value
        self.weights[y, x] = value
        self.fixed[x, y] = True
        self.fixed[y, x] = True

    def is_fixed(self, x: int, y: int) -> bool:
        self._check_edge(x, y)
        return bool(self.fixed[x, y])

    def triad_energy(self, x: int, y: int, z: int) -> float:
        """Energy of one triad: minus the product of its three edges."""
        if len({x, y, z}) != 3:
            raise ValueError(f"triad concepts must be distinct, got ({x}, {y}, {z})")
        for c in (x, y, z):
            self._check_concept(c)
        w = self.weights
        return float(-w[x, y] * w[x, z] * w[y, z])

    def dissonance(self) -> float:
        """Mean triad energy over all C(n, 3) triads; in [-1, 1].

        For a symmetric zero-diagonal matrix the sum of edge products over
        unordered triads is tr(W^3) / 6, which keeps this O(n^3) without
        enumerating triples.
        """
        n = self.n_concepts
        if n < 3:
            raise ValueError(f"dissonance needs at least 3 concepts, got {n}")
        w = self.weights
        triple_sum = float(np.sum((w @ w) * w)) / 6.0
        return -triple_sum / triad_count(n)

    def dissonance_gradient(self, x: int, y: int) -> float:
        """Analytic partial derivative of dissonance with respect to edge (x, y)."""
        self._check_edge(x, y)
        if self.n_concepts < 3:
            raise ValueError("gradient undefined with fewer than 3 concepts")
        return float(_k.grad_edge(self.weights, self.n_concepts, x, y))

    def set_belief_clipped(self, x: int, y: int, delta: float) -> float:
        """Add delta to edge (x, y), clipping into [-1, 1].

        Fixed edges are left unchanged and their current weight is returned,
        so callers can treat the update as applied-with-zero-effect.
        """
        self._check_edge(x, y)
        value, _ = _k.apply_clipped(self.weights, self.fixed, x, y, delta)
        return float(value)
