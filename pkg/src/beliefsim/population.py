"""Social graph, agents, and population construction.

Each agent's belief network covers: itself, one concept per social neighbor,
a neutral shared item ("latte"), and the two group identities. Concepts are
tagged with global entities so a belief can be translated between two agents'
local coordinate systems; a sender's self-concept becomes the receiver's
concept *of the sender*, shared entities map by label, and mutual neighbors
map by agent id. Entities with no counterpart in the receiver's network
(a stranger) do not translate, and beliefs touching them cannot be
transmitted to that receiver.

The whole population's weight matrices live in one packed stack so the
compiled step kernel can mutate them directly; each agent's BeliefNetwork is
a zero-copy view into that stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .belief_net import BeliefNetwork
from .errors import ConfigError
from .rng import RandomStream

# Global entity tags. An agent's own "self" concept is simply ("agent", own_id).
LATTE = ("latte",)
GROUP_A = ("group", "A")
GROUP_B = ("group", "B")

# Local ids counted back from the end of each agent's concept list.
_SHARED_TAIL = 3  # latte, group A, group B


def agent_entity(agent_id: int) -> tuple:
    """Entity tag for the person-concept of one agent."""
    return ("agent", int(agent_id))


@dataclass(frozen=True)
class SocialGraph:
    """Undirected simple graph over agents, with per-agent sorted neighbor lists."""

    n_agents: int
    edges: tuple
    neighbors: tuple

    @classmethod
    def from_edges(cls, n_agents: int, edges) -> "SocialGraph":
        seen = set()
        adjacency = [[] for _ in range(n_agents)]
        for u, v in edges:
            if not (0 <= u < n_agents and 0 <= v < n_agents):
                raise ValueError(f"edge ({u}, {v}) out of range for {n_agents} agents")
            if u == v:
                raise ValueError(f"self-loop at agent {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            adjacency[u].append(v)
            adjacency[v].append(u)
        return cls(
            n_agents=n_agents,
            edges=tuple(sorted(seen)),
            neighbors=tuple(tuple(sorted(a)) for a in adjacency),
        )

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, agent_id: int) -> int:
        return len(self.neighbors[agent_id])

    def min_degree(self) -> int:
        return min(len(a) for a in self.neighbors)


def _pair_from_index(p: int, n: int) -> tuple[int, int]:
    # Decode a flat index in [0, C(n,2)) to the p-th pair (u, v) with u < v,
    # enumerating (0,1), (0,2), ..., (0,n-1), (1,2), ...
    u = 0
    row = n - 1
    while p >= row:
        p -= row
        u += 1
        row -= 1
    return u, u + 1 + p


def generate_social_graph(n_agents: int, n_edges: int, rng: RandomStream) -> SocialGraph:
    """Uniform random simple graph with exactly n_edges edges and min degree >= 1.

    Samples edge sets uniformly and rejects whole graphs that leave any agent
    isolated (an isolated agent could never interact, which the dynamics
    implicitly rule out), so the result is uniform over qualifying graphs.
    """
    if n_agents < 2:
        raise ConfigError(f"need at least 2 agents, got {n_agents}")
    max_edges = n_agents * (n_agents - 1) // 2
    if n_edges > max_edges:
        raise ConfigError(f"{n_edges} edges exceed the {max_edges} possible for {n_agents} agents")
    if 2 * n_edges < n_agents:
        raise ConfigError(
            f"{n_edges} edges cannot give all {n_agents} agents degree >= 1"
        )
    while True:
        chosen: set[int] = set()
        while len(chosen) < n_edges:
            chosen.add(rng.randint(max_edges))
        degree = [0] * n_agents
        edges = []
        for p in sorted(chosen):
            u, v = _pair_from_index(p, n_agents)
            degree[u] += 1
            degree[v] += 1
            edges.append((u, v))
        if min(degree) >= 1:
            return SocialGraph.from_edges(n_agents, edges)


@dataclass
class Agent:
    """One agent: group affiliation, belief network, and concept bookkeeping."""

    id: int
    group: str  # "A" or "B"
    beliefs: BeliefNetwork
    entities: list
    concept_index: dict
    neighbor_agent_ids: tuple

    # Filled by Population: local concept ids of neighbors split by the
    # neighbors' true groups, used by the affective polarization metric.
    ingroup_neighbor_concepts: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    outgroup_neighbor_concepts: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))

    @property
    def self_concept(self) -> int:
        return 0

    @property
    def n_concepts(self) -> int:
        return self.beliefs.n_concepts

    @property
    def latte_concept(self) -> int:
        return self.n_concepts - 3

    @property
    def group_a_concept(self) -> int:
        return self.n_concepts - 2

    @property
    def group_b_concept(self) -> int:
        return self.n_concepts - 1

    def own_group_concept(self) -> int:
        return self.group_a_concept if self.group == "A" else self.group_b_concept

    def other_group_concept(self) -> int:
        return self.group_b_concept if self.group == "A" else self.group_a_concept

    def concept_for(self, entity) -> Optional[int]:
        """Local concept id of a global entity, or None if not represented."""
        return self.concept_index.get(entity)


def translate_concept(sender: Agent, receiver: Agent, concept: int) -> Optional[int]:
    """Map a sender-local concept id into the receiver's concept space.

    The sender's self-concept lands on the receiver's concept of the sender;
    shared entities (latte, the groups) map by label; a mutual acquaintance
    maps by agent id. Returns None when the receiver has no concept for the
    entity (an unknown third party).
    """
    if not 0 <= concept < sender.n_concepts:
        raise ValueError(f"concept id {concept} out of range for sender {sender.id}")
    return receiver.concept_for(sender.entities[concept])


def transmittable_beliefs(sender: Agent, receiver: Agent) -> list:
    """All sender belief edges whose endpoints both translate to the receiver.

    Rows are (sender_x, sender_y, receiver_x, receiver_y) with each pair in
    ascending order, enumerated in lexicographic sender order. The row order
    is the canonical one used for uniform belief selection, so it must stay
    deterministic.
    """
    translated = [receiver.concept_for(e) for e in sender.entities]
    rows = []
    n = sender.n_concepts
    for a in range(n):
        ta = translated[a]
        if ta is None:
            continue
        for b in range(a + 1, n):
            tb = translated[b]
            if tb is None:
                continue
            rows.append((a, b, min(ta, tb), max(ta, tb)))
    return rows


class Population:
    """All agents plus the packed arrays the compiled kernels operate on."""

    def __init__(self, graph: SocialGraph, rng: RandomStream, init_sigma: float = 1e-5):
        self.graph = graph
        n = graph.n_agents

        # Balanced random group assignment: floor(n/2) in A, the rest in B.
        ids = list(range(n))
        rng.shuffle(ids)
        groups = [""] * n
        half = n // 2
        for k, agent_id in enumerate(ids):
            groups[agent_id] = "A" if k < half else "B"
        self.groups = tuple(groups)

        sizes = [1 + graph.degree(i) + _SHARED_TAIL for i in range(n)]
        n_max = max(sizes)
        self.n_concepts = np.asarray(sizes, dtype=np.int64)
        self.weights = np.zeros((n, n_max, n_max), dtype=np.float64)
        self.fixed = np.zeros((n, n_max, n_max), dtype=np.bool_)

        self.agents: list[Agent] = []
        for i in range(n):
            nbrs = graph.neighbors[i]
            entities = [agent_entity(i)]
            entities.extend(agent_entity(k) for k in nbrs)
            entities.extend((LATTE, GROUP_A, GROUP_B))
            index = {ent: c for c, ent in enumerate(entities)}
            n_i = sizes[i]
            w = self.weights[i, :n_i, :n_i]
            f = self.fixed[i, :n_i, :n_i]
            net = BeliefNetwork._from_views(w, f)
            # Weak random initial beliefs everywhere, drawn in a fixed order.
            for x in range(n_i):
                for y in range(x + 1, n_i):
                    v = rng.normal(0.0, init_sigma)
                    v = min(1.0, max(-1.0, v))
                    w[x, y] = v
                    w[y, x] = v
            agent = Agent(
                id=i,
                group=groups[i],
                beliefs=net,
                entities=entities,
                concept_index=index,
                neighbor_agent_ids=nbrs,
            )
            own = agent.own_group_concept()
            other = agent.other_group_concept()
            net.mark_fixed(0, own, 1.0)
            net.mark_fixed(0, other, -1.0)
            agent.ingroup_neighbor_concepts = np.asarray(
                [index[agent_entity(k)] for k in nbrs if groups[k] == groups[i]],
                dtype=np.int64,
            )
            agent.outgroup_neighbor_concepts = np.asarray(
                [index[agent_entity(k)] for k in nbrs if groups[k] != groups[i]],
                dtype=np.int64,
            )
            self.agents.append(agent)

        self._build_adjacency_and_tables()

    def _build_adjacency_and_tables(self) -> None:
        graph = self.graph
        n = graph.n_agents
        indptr = np.zeros(n + 1, dtype=np.int64)
        for i in range(n):
            indptr[i + 1] = indptr[i] + graph.degree(i)
        ids = np.empty(indptr[-1], dtype=np.int64)
        for i in range(n):
            ids[indptr[i]:indptr[i + 1]] = graph.neighbors[i]
        self.nbr_indptr = indptr
        self.nbr_ids = ids

        # Transmission tables per directed (receiver, sender) slot, CSR-packed.
        tab_indptr = np.zeros(indptr[-1] + 1, dtype=np.int64)
        all_rows = []
        slot = 0
        for i in range(n):
            for j in graph.neighbors[i]:
                rows = transmittable_beliefs(self.agents[j], self.agents[i])
                all_rows.extend(rows)
                tab_indptr[slot + 1] = tab_indptr[slot] + len(rows)
                slot += 1
        table = np.asarray(all_rows, dtype=np.int64).reshape(-1, 4)
        self.tab_indptr = tab_indptr
        self.tab_sx = np.ascontiguousarray(table[:, 0])
        self.tab_sy = np.ascontiguousarray(table[:, 1])
        self.tab_rx = np.ascontiguousarray(table[:, 2])
        self.tab_ry = np.ascontiguousarray(table[:, 3])

    @property
    def n_agents(self) -> int:
        return self.graph.n_agents

    def table_for(self, receiver_id: int, sender_id: int) -> tuple[int, int]:
        """CSR (start, stop) of the transmission table for a directed pair."""
        nbrs = self.graph.neighbors[receiver_id]
        slot = self.nbr_indptr[receiver_id] + nbrs.index(sender_id)
        return int(self.tab_indptr[slot]), int(self.tab_indptr[slot + 1])

    def copy_state(self) -> np.ndarray:
        """Snapshot of the full packed weight stack."""
        return self.weights.copy()


def init_agents(graph: SocialGraph, rng: RandomStream, init_sigma: float = 1e-5) -> list:
    """Build the agent population for a graph; see Population for the layout."""
    return Population(graph, rng, init_sigma=init_sigma).agents
