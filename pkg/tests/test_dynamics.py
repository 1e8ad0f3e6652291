"""Unit tests for the step dynamics: selection, social update, walks, coherence."""

import numpy as np
import pytest
from scipy import stats

from beliefsim import (Agent, BeliefNetwork, DynamicsParams, Population, RandomStream,
                       SocialGraph, apply_trace, coherence_update, generate_social_graph,
                       select_interaction, simulation_step, social_update,
                       two_step_walk_distribution)
from beliefsim.validation import sample_walk_destination_counts


def build_population(seed, n_agents=10, n_edges=20, init_sigma=1e-5):
    rng = RandomStream(seed)
    graph = generate_social_graph(n_agents, n_edges, rng)
    return Population(graph, rng, init_sigma=init_sigma), rng


def bare_agent(net, agent_id=0):
    """Agent wrapper for dynamics tests that only touch the belief network."""
    return Agent(id=agent_id, group="A", beliefs=net, entities=[],
                 concept_index={}, neighbor_agent_ids=())


def stream_where(predicate, limit=1000):
    """Find a seed whose fresh stream satisfies a predicate on its first draws."""
    for seed in range(limit):
        if predicate(RandomStream(seed)):
            return RandomStream(seed)
    raise AssertionError("no qualifying seed found")


class TestSelectInteraction:
    def test_two_agents_forced_choice(self):
        graph = SocialGraph.from_edges(2, [(0, 1)])
        rng = RandomStream(1)
        for _ in range(20):
            receiver, sender = select_interaction(graph, rng)
            assert {receiver, sender} == {0, 1}

    def test_receiver_uniformity_chi_square(self):
        rng = RandomStream(2)
        graph = generate_social_graph(100, 200, rng)
        draws = 1_000_000
        counts = np.zeros(100, dtype=np.int64)
        for _ in range(draws):
            receiver, _ = select_interaction(graph, rng)
            counts[receiver] += 1
        expected = draws / 100
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < stats.chi2.ppf(1 - 1e-3, 99)
        # every agent within 3 binomial sigmas of the uniform rate
        sigma = np.sqrt(draws * 0.01 * 0.99)
        assert np.all(np.abs(counts - expected) < 3 * sigma + 1)

    def test_star_graph_sender_uniform_over_leaves(self):
        graph = SocialGraph.from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        rng = RandomStream(3)
        counts = {1: 0, 2: 0, 3: 0, 4: 0}
        draws = 0
        for _ in range(100_000):
            receiver, sender = select_interaction(graph, rng)
            if receiver == 0:
                counts[sender] += 1
                draws += 1
        expected = draws / 4
        chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
        assert chi2 < stats.chi2.ppf(1 - 1e-3, 3)


class TestSocialUpdate:
    def test_full_convergence_at_alpha_one(self):
        from beliefsim import transmittable_beliefs
        pop, _ = build_population(5, n_agents=2, n_edges=1)
        receiver, sender = pop.agents[0], pop.agents[1]
        for x in range(sender.n_concepts):
            for y in range(x + 1, sender.n_concepts):
                if not sender.beliefs.fixed[x, y]:
                    sender.beliefs.set_belief(x, y, 0.8)
                if not receiver.beliefs.fixed[x, y]:
                    receiver.beliefs.set_belief(x, y, 0.2)
        rows = transmittable_beliefs(sender, receiver)

        def lands_on_free_edges(stream):
            sx, sy, rx, ry = rows[stream.randint(len(rows))]
            return not sender.beliefs.fixed[sx, sy] and not receiver.beliefs.fixed[rx, ry]

        rng = stream_where(lands_on_free_edges)
        params = DynamicsParams(alpha=1.0, sigma=0.0)
        trace = social_update(receiver, sender, params, rng)
        rx, ry = trace.social_edge
        assert not trace.social_fixed
        # receiver lands exactly on the sender's value: 0.2 + (0.8 - 0.2)
        assert receiver.beliefs.weights[rx, ry] == pytest.approx(0.8)

    def test_zero_alpha_zero_sigma_is_identity(self):
        pop, _ = build_population(6, n_agents=2, n_edges=1)
        receiver, sender = pop.agents[0], pop.agents[1]
        before = receiver.beliefs.weights.copy()
        trace = social_update(receiver, sender, DynamicsParams(alpha=0.0, sigma=0.0),
                              RandomStream(7))
        assert np.array_equal(receiver.beliefs.weights, before)
        assert trace.social_delta == 0.0

    def test_reinforcing_mode_clips_at_extreme(self):
        from beliefsim import transmittable_beliefs
        pop, _ = build_population(8, n_agents=2, n_edges=1)
        receiver, sender = pop.agents[0], pop.agents[1]
        for x in range(sender.n_concepts):
            for y in range(x + 1, sender.n_concepts):
                if not sender.beliefs.fixed[x, y]:
                    sender.beliefs.set_belief(x, y, 0.9)
                if not receiver.beliefs.fixed[x, y]:
                    receiver.beliefs.set_belief(x, y, 0.9)
        rows = transmittable_beliefs(sender, receiver)

        def lands_on_free_edges(stream):
            sx, sy, rx, ry = rows[stream.randint(len(rows))]
            return not sender.beliefs.fixed[sx, sy] and not receiver.beliefs.fixed[rx, ry]

        rng = stream_where(lands_on_free_edges)
        params = DynamicsParams(alpha=1.0, sigma=0.0, influence_mode="reinforcing")
        trace = social_update(receiver, sender, params, rng)
        rx, ry = trace.social_edge
        # like-minded reinforcement: 0.9 + 0.9 clips to 1.0
        assert receiver.beliefs.weights[rx, ry] == 1.0

    def test_only_chosen_edge_changes(self):
        pop, _ = build_population(9, n_agents=6, n_edges=8)
        graph_edge = pop.graph.edges[0]
        receiver, sender = pop.agents[graph_edge[0]], pop.agents[graph_edge[1]]
        before = receiver.beliefs.weights.copy()
        trace = social_update(receiver, sender, DynamicsParams(), RandomStream(10))
        diff = receiver.beliefs.weights != before
        assert diff.sum() in (0, 2)  # symmetric pair, or a fixed-edge no-op
        if trace.social_fixed:
            assert diff.sum() == 0


class TestTwoStepWalkDistribution:
    def test_uniform_weights_give_uniform_distribution(self):
        net = BeliefNetwork(4)
        for x in range(4):
            for y in range(x + 1, 4):
                net.set_belief(x, y, 0.5)
        probs, fallback = two_step_walk_distribution(net, 0, {0, 1})
        assert not fallback
        assert probs[0] == 0.0 and probs[1] == 0.0
        assert probs[2] == pytest.approx(0.5)
        assert probs[3] == pytest.approx(0.5)

    def test_dominant_path_concentrates_mass(self):
        net = BeliefNetwork(4)
        for x in range(4):
            for y in range(x + 1, 4):
                net.set_belief(x, y, 1e-6)
        net.set_belief(0, 2, 1.0)
        net.set_belief(2, 3, 1.0)
        probs, _ = two_step_walk_distribution(net, 0, {0, 1})
        assert probs[3] > 0.99

    def test_exact_enumeration_small_case(self):
        # hand-enumerated two-step paths with unequal weights
        net = BeliefNetwork(4)
        w = {(0, 1): 0.4, (0, 2): 0.6, (0, 3): 0.2, (1, 2): 0.5, (1, 3): 0.3, (2, 3): 0.1}
        for (x, y), v in w.items():
            net.set_belief(x, y, v)

        def weight(a, b):
            return w[(min(a, b), max(a, b))]

        exact = np.zeros(4)
        total1 = sum(weight(0, m) for m in (1, 2, 3))
        for m in (1, 2, 3):
            denom = sum(weight(m, d) for d in range(4) if d not in (m, 0))
            for d in range(4):
                if d in (m, 0):
                    continue
                exact[d] += (weight(0, m) / total1) * (weight(m, d) / denom)
        exact[3] = 0.0  # excluded destination
        exact /= exact.sum()
        probs, _ = two_step_walk_distribution(net, 0, {0, 3})
        np.testing.assert_allclose(probs, exact, atol=1e-12)

    def test_matches_monte_carlo_sampler(self):
        rng = RandomStream(40)
        net = BeliefNetwork(6)
        for x in range(6):
            for y in range(x + 1, 6):
                net.set_belief(x, y, 2 * rng.uniform() - 1)
        probs, _ = two_step_walk_distribution(net, 2, {2, 4})
        n_samples = 1_000_000
        counts = sample_walk_destination_counts(net, 2, {2, 4}, n_samples, seed=41)
        for d in range(6):
            expected = n_samples * probs[d]
            sigma = np.sqrt(n_samples * probs[d] * (1 - probs[d]))
            assert abs(counts[d] - expected) <= 3 * sigma + 1

    def test_zero_weights_trigger_uniform_fallback(self):
        net = BeliefNetwork(5)  # all weights zero
        probs, fallback = two_step_walk_distribution(net, 0, {0, 1})
        assert fallback
        np.testing.assert_allclose(probs, [0, 0, 1 / 3, 1 / 3, 1 / 3])

    def test_all_destinations_excluded_rejected(self):
        net = BeliefNetwork(3)
        with pytest.raises(ValueError):
            two_step_walk_distribution(net, 0, {0, 1, 2})

    def test_distribution_sums_to_one_and_respects_exclusions(self):
        rng = RandomStream(42)
        for trial in range(20):
            n = 4 + rng.randint(5)
            net = BeliefNetwork(n)
            for x in range(n):
                for y in range(x + 1, n):
                    net.set_belief(x, y, 2 * rng.uniform() - 1)
            source = rng.randint(n)
            other = (source + 1 + rng.randint(n - 1)) % n
            probs, _ = two_step_walk_distribution(net, source, {source, other})
            assert probs.sum() == pytest.approx(1.0)
            assert probs[source] == 0.0 and probs[other] == 0.0
            assert np.all(probs >= 0.0)


class TestCoherenceUpdate:
    def test_stable_triad_pushes_belief_up(self):
        # Single triad, focal edge (0, 1). Forcing the walk source to endpoint
        # 0 makes the target edge (0, 2), whose two context edges (0,1) and
        # (1,2) are both +1: the drift is exactly +1 and the belief rises.
        net = BeliefNetwork(3)
        net.set_belief(0, 1, 1.0)
        net.set_belief(1, 2, 1.0)
        net.set_belief(0, 2, 0.0)
        rng = stream_where(lambda s: s.randint(2) == 0)  # source = first endpoint
        params = DynamicsParams(alpha=1.0, beta=1.0, sigma=0.0)
        trace = coherence_update(bare_agent(net), (0, 1), params, rng)
        assert trace.coherence_edge == (0, 2)
        assert trace.coherence_delta == pytest.approx(1.0)
        assert net.weights[0, 2] == pytest.approx(1.0)

    def test_zero_beta_zero_sigma_is_identity(self):
        net = BeliefNetwork(5)
        rng = RandomStream(50)
        for x in range(5):
            for y in range(x + 1, 5):
                net.set_belief(x, y, 2 * rng.uniform() - 1)
        before = net.weights.copy()
        trace = coherence_update(bare_agent(net), (0, 1),
                                 DynamicsParams(beta=0.0, sigma=0.0), RandomStream(51))
        assert np.array_equal(net.weights, before)
        assert trace.coherence_delta == 0.0

    def test_walk_scenario_targets_group_edge(self):
        # Bob's network: Self(0), Alice(1), Latte(2), GroupA(3), GroupB(4).
        # Strong edges Alice-Latte and Alice-GroupB; the walk from Latte goes
        # Latte -> Alice -> GroupB, so the updated edge is (Latte, GroupB).
        net = BeliefNetwork(5)
        for x in range(5):
            for y in range(x + 1, 5):
                net.set_belief(x, y, 1e-6)
        net.set_belief(1, 2, 0.9)
        net.set_belief(1, 4, 0.9)
        probs, _ = two_step_walk_distribution(net, 2, {2, 1})
        assert int(np.argmax(probs)) == 4
        assert probs[4] > 0.9
        rng = stream_where(lambda s: s.randint(2) == 0)  # source = latte endpoint
        trace = coherence_update(bare_agent(net), (2, 1), DynamicsParams(sigma=0.0), rng)
        assert trace.coherence_edge == (2, 4)

    def test_fixed_target_is_noop(self):
        net = BeliefNetwork(3)
        net.set_belief(0, 1, 1.0)
        net.set_belief(1, 2, 1.0)
        net.mark_fixed(0, 2, -1.0)
        rng = stream_where(lambda s: s.randint(2) == 0)
        trace = coherence_update(bare_agent(net), (0, 1),
                                 DynamicsParams(sigma=0.0), rng)
        assert trace.coherence_edge == (0, 2)
        assert trace.coherence_fixed
        assert net.weights[0, 2] == -1.0

    def test_never_increases_dissonance_without_noise(self):
        # The dissonance is linear in any single edge, so a gradient step with
        # sigma = 0 can only lower it, whatever beta.
        rng = RandomStream(52)
        for trial in range(30):
            n = 4 + rng.randint(4)
            net = BeliefNetwork(n)
            for x in range(n):
                for y in range(x + 1, n):
                    net.set_belief(x, y, 0.9 * (2 * rng.uniform() - 1))
            before = net.dissonance()
            focal = (rng.randint(n), 0)
            if focal[0] == focal[1]:
                focal = (1, 0)
            coherence_update(bare_agent(net), focal,
                             DynamicsParams(beta=0.05, sigma=0.0), rng)
            assert net.dissonance() <= before + 1e-12

    def test_zero_beta_deltas_are_pure_noise(self):
        # With beta = 0 the coherence deltas must be N(0, sigma) draws.
        pop, rng = build_population(53, n_agents=8, n_edges=16)
        params = DynamicsParams(alpha=0.5, beta=0.0, sigma=0.1)
        deltas = []
        for _ in range(2000):
            trace = simulation_step(pop, params, rng)
            deltas.append(trace.coherence_delta)
        deltas = np.asarray(deltas)
        _, p_value = stats.kstest(deltas, "norm", args=(0.0, 0.1))
        assert p_value > 1e-3


class TestSimulationStep:
    def test_frozen_dynamics_leave_state_bitwise_unchanged(self):
        pop, rng = build_population(60)
        before = pop.copy_state()
        params = DynamicsParams(alpha=0.0, beta=0.0, sigma=0.0)
        for _ in range(200):
            simulation_step(pop, params, rng)
        assert np.array_equal(pop.weights, before)

    def test_only_receiver_mutates(self):
        pop, rng = build_population(61)
        before = pop.copy_state()
        trace = simulation_step(pop, DynamicsParams(), rng)
        for agent in pop.agents:
            if agent.id != trace.receiver:
                assert np.array_equal(pop.weights[agent.id], before[agent.id])

    def test_at_most_two_edges_change(self):
        pop, rng = build_population(62)
        for _ in range(50):
            before = pop.copy_state()
            trace = simulation_step(pop, DynamicsParams(), rng)
            diff = pop.weights[trace.receiver] != before[trace.receiver]
            assert diff.sum() <= 4  # two undirected edges, stored symmetrically

    def test_trace_replay_reproduces_post_state(self):
        pop_a, rng_a = build_population(63)
        pop_b, _ = build_population(63)
        traces = [simulation_step(pop_a, DynamicsParams(), rng_a) for _ in range(300)]
        for trace in traces:
            apply_trace(pop_b, trace)
        assert np.array_equal(pop_a.weights, pop_b.weights)

    def test_determinism_same_seed_same_trajectory(self):
        pop_a, rng_a = build_population(64)
        pop_b, rng_b = build_population(64)
        for _ in range(200):
            simulation_step(pop_a, DynamicsParams(), rng_a)
            simulation_step(pop_b, DynamicsParams(), rng_b)
        assert np.array_equal(pop_a.weights, pop_b.weights)

    def test_matches_compiled_batch_loop(self):
        from beliefsim import _kernels as _k
        pop_a, rng_a = build_population(65, n_agents=20, n_edges=40)
        pop_b, rng_b = build_population(65, n_agents=20, n_edges=40)
        n_steps = 5000
        probs = np.zeros(int(pop_a.n_concepts.max()), dtype=np.float64)
        mask = np.zeros(int(pop_a.n_concepts.max()), dtype=np.uint8)
        _k.run_steps(pop_a.weights, pop_a.fixed, pop_a.n_concepts,
                     pop_a.nbr_indptr, pop_a.nbr_ids,
                     pop_a.tab_indptr, pop_a.tab_sx, pop_a.tab_sy,
                     pop_a.tab_rx, pop_a.tab_ry,
                     1.0, 1.0, 0.1, False, n_steps, rng_a.state, probs, mask)
        params = DynamicsParams()
        for _ in range(n_steps):
            simulation_step(pop_b, params, rng_b)
        assert np.array_equal(pop_a.weights, pop_b.weights)
        assert np.array_equal(rng_a.state, rng_b.state)


class TestDynamicsParams:
    def test_defaults(self):
        params = DynamicsParams()
        assert params.alpha == 1.0
        assert params.beta == 1.0
        assert params.sigma == 0.1
        assert params.influence_mode == "convergent"

    @pytest.mark.parametrize("kwargs", [
        {"alpha": -0.1}, {"alpha": 1.5}, {"beta": -1.0},
        {"sigma": -0.5}, {"influence_mode": "other"},
    ])
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ValueError):
            DynamicsParams(**kwargs)
