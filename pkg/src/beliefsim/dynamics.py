"""One simulation step: social transmission plus a coherence-driven update.

A step selects a random receiver and one of its neighbors as sender. One of
the sender's translatable beliefs is transmitted: the receiver's matching
belief moves by a Gaussian step whose mean is alpha * (sender - receiver)
(convergent mode) or alpha * sender (reinforcing mode). The interaction then
triggers an endogenous update: starting from one endpoint of the freshly
updated edge, a two-step weighted random walk picks an adjacent edge, and
that edge moves down the dissonance gradient of the intermediate network,
again with Gaussian noise.

These functions are the single-step, object-level face of the compiled loop
in beliefsim._kernels; both consume the identical random draw sequence, so a
trajectory advanced one step at a time is bit-identical to the fast path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as _k
from .population import Agent, Population, SocialGraph, transmittable_beliefs
from .rng import RandomStream

INFLUENCE_MODES = ("convergent", "reinforcing")


@dataclass(frozen=True)
class DynamicsParams:
    """Free parameters of the update rule."""

    alpha: float = 1.0   # social influence strength, in [0, 1]
    beta: float = 1.0    # coherence drive strength, >= 0
    sigma: float = 0.1   # Gaussian noise scale for both update kinds
    influence_mode: str = "convergent"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.influence_mode not in INFLUENCE_MODES:
            raise ValueError(
                f"influence_mode must be one of {INFLUENCE_MODES}, got {self.influence_mode!r}"
            )


@dataclass
class StepTrace:
    """Everything needed to replay one step's state change without randomness."""

    receiver: int
    sender: int
    social_edge: Optional[tuple] = None      # receiver coordinates
    social_delta: float = 0.0                # raw delta before clipping
    social_fixed: bool = False               # landed on a fixed edge (no-op)
    coherence_edge: Optional[tuple] = None   # (source, destination)
    coherence_delta: float = 0.0
    coherence_fixed: bool = False
    walk_fallback: bool = False              # uniform fallback distribution used
    no_transmittable: bool = False           # defensive; cannot occur with complete networks


def select_interaction(graph: SocialGraph, rng: RandomStream) -> tuple[int, int]:
    """Pick (receiver, sender): receiver uniform, sender uniform among its neighbors."""
    receiver = rng.randint(graph.n_agents)
    nbrs = graph.neighbors[receiver]
    if not nbrs:
        raise RuntimeError(f"agent {receiver} has no neighbors; graph invariant violated")
    sender = nbrs[rng.randint(len(nbrs))]
    return receiver, sender


def social_update(receiver: Agent, sender: Agent, params: DynamicsParams,
                  rng: RandomStream) -> StepTrace:
    """Transmit one randomly chosen sender belief to the receiver.

    The belief is drawn uniformly over the sender edges whose endpoints both
    translate into the receiver's network. Returns a trace fragment with the
    receiver-coordinate edge and the raw applied delta.
    """
    trace = StepTrace(receiver=receiver.id, sender=sender.id)
    rows = transmittable_beliefs(sender, receiver)
    if not rows:
        trace.no_transmittable = True
        return trace
    sx, sy, rx, ry = rows[rng.randint(len(rows))]
    b_sender = sender.beliefs.weights[sx, sy]
    if params.influence_mode == "reinforcing":
        mean = params.alpha * b_sender
    else:
        mean = params.alpha * (b_sender - receiver.beliefs.weights[rx, ry])
    delta = rng.normal(mean, params.sigma)
    _, was_fixed = _k.apply_clipped(receiver.beliefs.weights, receiver.beliefs.fixed,
                                    rx, ry, delta)
    trace.social_edge = (rx, ry)
    trace.social_delta = delta
    trace.social_fixed = was_fixed
    return trace


def two_step_walk_distribution(net, source: int, excluded) -> tuple[np.ndarray, bool]:
    """Exact destination distribution of a non-backtracking two-step walk.

    Each step moves with probability proportional to the absolute weight of
    the traversed edge; the second step may not return straight to the
    source. Concepts in `excluded` get probability zero and the rest is
    renormalized. Returns (probabilities summing to 1, used_fallback) where
    the fallback is uniform over eligible concepts when no walk mass
    survives.
    """
    n = net.n_concepts
    if not 0 <= source < n:
        raise ValueError(f"source concept {source} out of range [0, {n})")
    excluded = set(excluded)
    for c in excluded:
        if not 0 <= c < n:
            raise ValueError(f"excluded concept {c} out of range [0, {n})")
    eligible = [d for d in range(n) if d != source and d not in excluded]
    if not eligible:
        raise ValueError("no eligible walk destinations: every concept is excluded")
    mask = np.zeros(n, dtype=np.uint8)
    for c in excluded:
        mask[c] = 1
    probs = np.zeros(n, dtype=np.float64)
    total, fallback = _k.walk_dest_probs(net.weights, n, source, mask, probs)
    return probs / total, bool(fallback)


def coherence_update(receiver: Agent, focal_edge: tuple, params: DynamicsParams,
                     rng: RandomStream) -> StepTrace:
    """Pick an edge adjacent to the focal edge and move it down the gradient.

    The walk source is one of the two focal endpoints (fair draw); the
    destination comes from the two-step walk distribution with both focal
    endpoints excluded, so the target edge shares exactly the source with
    the focal edge. The gradient is evaluated on the receiver's current
    (post-social) network.
    """
    x, y = focal_edge
    net = receiver.beliefs
    net._check_edge(x, y)
    trace = StepTrace(receiver=receiver.id, sender=-1)
    if rng.randint(2) == 0:
        src, other = x, y
    else:
        src, other = y, x
    n = net.n_concepts
    if n < 3:
        raise ValueError("coherence update needs at least 3 concepts")
    mask = np.zeros(n, dtype=np.uint8)
    mask[src] = 1
    mask[other] = 1
    probs = np.zeros(n, dtype=np.float64)
    total, fallback = _k.walk_dest_probs(net.weights, n, src, mask, probs)
    dest = int(_k.sample_categorical(rng.state, probs, n, total))
    if dest < 0:
        raise ValueError("degenerate walk distribution: no eligible destination")
    grad = _k.grad_edge(net.weights, n, src, dest)
    delta = rng.normal(-params.beta * grad, params.sigma)
    _, was_fixed = _k.apply_clipped(net.weights, net.fixed, src, dest, delta)
    trace.coherence_edge = (src, dest)
    trace.coherence_delta = delta
    trace.coherence_fixed = was_fixed
    trace.walk_fallback = fallback
    return trace


def simulation_step(pop: Population, params: DynamicsParams,
                    rng: RandomStream) -> StepTrace:
    """Advance the population by one step; only the receiver's network mutates."""
    receiver_id, sender_id = select_interaction(pop.graph, rng)
    receiver = pop.agents[receiver_id]
    sender = pop.agents[sender_id]
    trace = social_update(receiver, sender, params, rng)
    if trace.no_transmittable:
        return trace
    coh = coherence_update(receiver, trace.social_edge, params, rng)
    trace.coherence_edge = coh.coherence_edge
    trace.coherence_delta = coh.coherence_delta
    trace.coherence_fixed = coh.coherence_fixed
    trace.walk_fallback = coh.walk_fallback
    return trace


def apply_trace(pop: Population, trace: StepTrace) -> None:
    """Re-apply a recorded step to an identical prior state (replay oracle)."""
    receiver = pop.agents[trace.receiver]
    if trace.social_edge is not None:
        x, y = trace.social_edge
        receiver.beliefs.set_belief_clipped(x, y, trace.social_delta)
    if trace.coherence_edge is not None:
        x, y = trace.coherence_edge
        receiver.beliefs.set_belief_clipped(x, y, trace.coherence_delta)
