"""Unit tests for the belief network: triad energy, dissonance, gradient, clipping."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beliefsim import BeliefNetwork, RandomStream, iter_triads, triad_count


def make_net(n, assignments=None):
    net = BeliefNetwork(n)
    for (x, y), v in (assignments or {}).items():
        net.set_belief(x, y, v)
    return net


def random_net(n, seed, scale=0.8):
    rng = RandomStream(seed)
    net = BeliefNetwork(n)
    for x in range(n):
        for y in range(x + 1, n):
            net.set_belief(x, y, scale * (2 * rng.uniform() - 1))
    return net


def brute_force_dissonance(net):
    # Independent oracle: enumerate every triad explicitly.
    w = net.weights
    energies = [-w[x, y] * w[x, z] * w[y, z] for x, y, z in iter_triads(net.n_concepts)]
    return sum(energies) / len(energies)


def central_difference(net, x, y, step=1e-5):
    # Independent oracle: displace the edge both ways and difference dissonance.
    base = net.weights[x, y]
    net.weights[x, y] = net.weights[y, x] = base + step
    high = net.dissonance()
    net.weights[x, y] = net.weights[y, x] = base - step
    low = net.dissonance()
    net.weights[x, y] = net.weights[y, x] = base
    return (high - low) / (2 * step)


class TestTriadEnergy:
    def test_balanced_all_positive(self):
        net = make_net(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})
        assert net.triad_energy(0, 1, 2) == -1.0

    def test_one_negative_unbalanced(self):
        net = make_net(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): -1.0})
        assert net.triad_energy(0, 1, 2) == 1.0

    def test_fractional_weights(self):
        net = make_net(3, {(0, 1): 0.5, (0, 2): -0.5, (1, 2): 1.0})
        assert net.triad_energy(0, 1, 2) == pytest.approx(0.25)

    def test_duplicate_ids_rejected(self):
        net = make_net(3)
        with pytest.raises(ValueError):
            net.triad_energy(0, 0, 1)

    def test_out_of_range_rejected(self):
        net = make_net(3)
        with pytest.raises(ValueError):
            net.triad_energy(0, 1, 3)

    @given(st.integers(0, 2), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
    def test_sign_flip_negates_energy(self, which, a, b, c):
        edges = [(0, 1), (0, 2), (1, 2)]
        net = make_net(3, dict(zip(edges, (a, b, c))))
        before = net.triad_energy(0, 1, 2)
        x, y = edges[which]
        net.set_belief(x, y, -net.weights[x, y])
        assert net.triad_energy(0, 1, 2) == pytest.approx(-before)


class TestDissonance:
    def test_single_balanced_triad(self):
        net = make_net(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})
        assert net.dissonance() == pytest.approx(-1.0)

    def test_single_unbalanced_triad(self):
        net = make_net(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): -1.0})
        assert net.dissonance() == pytest.approx(1.0)

    def test_four_concepts_matches_brute_force(self):
        values = {(0, 1): 0.3, (0, 2): -0.7, (0, 3): 0.9,
                  (1, 2): 0.2, (1, 3): -0.4, (2, 3): 0.6}
        net = make_net(4, values)
        assert triad_count(4) == 4
        assert net.dissonance() == pytest.approx(brute_force_dissonance(net), abs=1e-12)

    @pytest.mark.parametrize("n", [5, 6, 8])
    def test_random_networks_match_brute_force(self, n):
        net = random_net(n, seed=100 + n)
        assert net.dissonance() == pytest.approx(brute_force_dissonance(net), abs=1e-12)

    def test_too_few_concepts(self):
        with pytest.raises(ValueError):
            make_net(2).dissonance()

    def test_permutation_invariance(self):
        net = random_net(6, seed=17)
        rng = RandomStream(18)
        perm = list(range(6))
        rng.shuffle(perm)
        permuted = BeliefNetwork(6)
        for x in range(6):
            for y in range(x + 1, 6):
                permuted.set_belief(perm[x], perm[y], net.weights[x, y])
        assert permuted.dissonance() == pytest.approx(net.dissonance(), abs=1e-12)

    def test_bounds(self):
        net = random_net(7, seed=3, scale=1.0)
        assert -1.0 <= net.dissonance() <= 1.0


class TestDissonanceGradient:
    def test_single_triad_value(self):
        net = make_net(3, {(0, 2): 0.5, (1, 2): 0.4, (0, 1): 0.1})
        assert net.dissonance_gradient(0, 1) == pytest.approx(-0.2)

    def test_zero_row_gives_zero(self):
        net = make_net(5, {(0, 1): 0.7})  # node 2..4 edges all zero
        assert net.dissonance_gradient(2, 3) == 0.0
        assert net.dissonance_gradient(0, 2) == 0.0  # b(2, z) = 0 for all z != 0

    def test_same_endpoints_rejected(self):
        with pytest.raises(ValueError):
            make_net(4).dissonance_gradient(1, 1)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_central_finite_difference(self, seed):
        net = random_net(6, seed=200 + seed)
        rng = RandomStream(300 + seed)
        for _ in range(5):
            x = rng.randint(6)
            y = (x + 1 + rng.randint(5)) % 6
            fd = central_difference(net, x, y)
            assert net.dissonance_gradient(x, y) == pytest.approx(fd, abs=1e-8)


class TestSetBeliefClipped:
    def test_upper_clip(self):
        net = make_net(3, {(0, 1): 0.95})
        assert net.set_belief_clipped(0, 1, 0.2) == 1.0
        assert net.weights[1, 0] == 1.0

    def test_zero_delta_identity(self):
        net = make_net(3, {(0, 1): -0.5})
        assert net.set_belief_clipped(0, 1, 0.0) == -0.5

    def test_lower_clip(self):
        net = make_net(3, {(0, 1): -0.95})
        assert net.set_belief_clipped(0, 1, -0.3) == -1.0

    def test_fixed_edge_is_noop(self):
        net = make_net(3)
        net.mark_fixed(0, 1, 1.0)
        assert net.set_belief_clipped(0, 1, -0.7) == 1.0
        assert net.weights[0, 1] == 1.0
        assert net.weights[1, 0] == 1.0

    def test_same_endpoints_rejected(self):
        with pytest.raises(ValueError):
            make_net(3).set_belief_clipped(2, 2, 0.1)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4),
                              st.floats(-3, 3)), max_size=40))
    def test_invariants_after_update_sequences(self, updates):
        net = random_net(5, seed=9)
        net.mark_fixed(0, 3, 1.0)
        net.mark_fixed(0, 4, -1.0)
        for x, y, delta in updates:
            if x == y:
                continue
            net.set_belief_clipped(x, y, delta)
        assert np.all(net.weights <= 1.0) and np.all(net.weights >= -1.0)
        assert np.array_equal(net.weights, net.weights.T)
        assert net.weights[0, 3] == 1.0 and net.weights[3, 0] == 1.0
        assert net.weights[0, 4] == -1.0 and net.weights[4, 0] == -1.0


class TestConstruction:
    def test_from_weights_validates_symmetry(self):
        bad = np.zeros((3, 3))
        bad[0, 1] = 0.5
        with pytest.raises(ValueError):
            BeliefNetwork.from_weights(bad)

    def test_from_weights_validates_range(self):
        bad = np.zeros((3, 3))
        bad[0, 1] = bad[1, 0] = 1.5
        with pytest.raises(ValueError):
            BeliefNetwork.from_weights(bad)

    def test_set_belief_rejects_fixed(self):
        net = make_net(3)
        net.mark_fixed(0, 1, 1.0)
        with pytest.raises(ValueError):
            net.set_belief(0, 1, 0.5)

    def test_triad_count_matches_enumeration(self):
        for n in (3, 4, 7, 12):
            assert triad_count(n) == len(list(iter_triads(n)))
            assert triad_count(n) == len(list(itertools.combinations(range(n), 3)))
