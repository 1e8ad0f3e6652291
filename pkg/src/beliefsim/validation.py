"""Independent correctness oracles.

Each oracle re-derives a quantity through a route the production code does
not use: gradients by central finite differences of the dissonance value,
walk distributions by literally sampling two-step walks one at a time, and
determinism by running whole configurations twice and comparing bits.
The `validate` CLI subcommand and the test suite both drive these.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from . import _kernels as _k
from .belief_net import BeliefNetwork
from .dynamics import two_step_walk_distribution
from .experiment import SimConfig, SweepConfig, run_simulation, run_sweep
from .rng import RandomStream, seed_state


def fd_gradient(net: BeliefNetwork, x: int, y: int, step: float = 1e-5) -> float:
    """Central finite difference of dissonance with respect to edge (x, y).

    Brute-force oracle for the analytic gradient; temporarily displaces the
    edge symmetrically in both directions and restores it afterwards.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    net._check_edge(x, y)
    original = net.weights[x, y]
    if not (-1.0 + step) < original < (1.0 - step):
        raise ValueError("edge weight too close to the boundary for a central difference")

    def _with(value: float) -> float:
        net.weights[x, y] = value
        net.weights[y, x] = value
        return net.dissonance()

    try:
        high = _with(original + step)
        low = _with(original - step)
    finally:
        net.weights[x, y] = original
        net.weights[y, x] = original
    return (high - low) / (2.0 * step)


def sample_walk_destination_counts(net: BeliefNetwork, source: int, excluded,
                                   n_samples: int, seed: int) -> np.ndarray:
    """Histogram of literally sampled two-step walk destinations.

    Walks are simulated step by step (independent of the exact-distribution
    code) and rejected whole when they end on an excluded destination.
    Raises if the configuration is degenerate (walks cannot complete).
    """
    n = net.n_concepts
    mask = np.zeros(n, dtype=np.uint8)
    for c in excluded:
        mask[c] = 1
    counts = np.zeros(n, dtype=np.int64)
    state = seed_state(seed)
    ok = _k.walk_dest_counts(state, net.weights, n, source, mask,
                             n_samples, 10_000, counts)
    if not ok:
        raise ValueError("degenerate walk configuration: sampling cannot complete")
    return counts


def chi_square_gof(counts: np.ndarray, probs: np.ndarray,
                   significance: float = 1e-3) -> tuple[bool, float, int]:
    """Chi-square goodness of fit of observed counts against probabilities.

    Bins with expected count below 5 are pooled into one. Returns
    (passed, statistic, degrees_of_freedom); with zero degrees of freedom
    the comparison is vacuous and passes.
    """
    n_samples = int(counts.sum())
    expected = probs * n_samples
    big = expected >= 5.0
    obs = list(counts[big].astype(np.float64))
    exp = list(expected[big])
    small_exp = float(expected[~big].sum())
    if small_exp > 0.0:
        obs.append(float(counts[~big].sum()))
        exp.append(small_exp)
    dof = len(obs) - 1
    if dof < 1:
        return True, 0.0, 0
    statistic = float(sum((o - e) ** 2 / e for o, e in zip(obs, exp)))
    threshold = float(stats.chi2.ppf(1.0 - significance, dof))
    return statistic <= threshold, statistic, dof


@dataclass
class WalkCheckResult:
    passed: bool
    statistic: float
    dof: int
    skipped: bool = False


def walk_frequency_check(net: BeliefNetwork, source: int, excluded,
                         n_samples: int = 1_000_000, seed: int = 0,
                         significance: float = 1e-3) -> WalkCheckResult:
    """Compare the exact walk distribution against literal sampled walks."""
    if n_samples < 10_000:
        raise ValueError(f"n_samples must be >= 10000, got {n_samples}")
    probs, _ = two_step_walk_distribution(net, source, excluded)
    try:
        counts = sample_walk_destination_counts(net, source, excluded, n_samples, seed)
    except ValueError:
        return WalkCheckResult(passed=True, statistic=0.0, dof=0, skipped=True)
    passed, statistic, dof = chi_square_gof(counts, probs, significance)
    return WalkCheckResult(passed=passed, statistic=statistic, dof=dof)


def replay_check(config: SimConfig) -> bool:
    """Two executions of the same config must match bit for bit."""
    series_a, pop_a = run_simulation(config, collect_snapshots=False)
    series_b, pop_b = run_simulation(config, collect_snapshots=False)
    return (np.array_equal(pop_a.weights, pop_b.weights)
            and np.array_equal(series_a.p_o, series_b.p_o)
            and np.array_equal(series_a.p_a, series_b.p_a)
            and np.array_equal(series_a.mean_dissonance, series_b.mean_dissonance))


def sweep_replay_check(sweep: SweepConfig, worker_counts=(1, 2, 8)) -> bool:
    """The sweep grid must not depend on the number of workers."""
    baseline = run_sweep(sweep, max_workers=worker_counts[0])
    for workers in worker_counts[1:]:
        other = run_sweep(sweep, max_workers=workers)
        if not (np.array_equal(baseline.mean_p_o, other.mean_p_o)
                and np.array_equal(baseline.mean_p_a, other.mean_p_a)):
            return False
    return True


def _random_network(n_concepts: int, rng: RandomStream, scale: float = 0.8) -> BeliefNetwork:
    net = BeliefNetwork(n_concepts)
    for x in range(n_concepts):
        for y in range(x + 1, n_concepts):
            net.set_belief(x, y, scale * (2.0 * rng.uniform() - 1.0))
    return net


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str


def run_validation_suite(quick: bool = False) -> list[CheckOutcome]:
    """Run the standard oracle battery; returns one outcome per check."""
    outcomes = []

    # Analytic gradient vs finite differences on random networks.
    rng = RandomStream(711)
    worst = 0.0
    n_nets = 20 if quick else 100
    for _ in range(n_nets):
        net = _random_network(6, rng)
        x = rng.randint(6)
        y = (x + 1 + rng.randint(5)) % 6
        diff = abs(net.dissonance_gradient(x, y) - fd_gradient(net, x, y))
        worst = max(worst, diff)
    outcomes.append(CheckOutcome(
        name=f"gradient vs finite difference ({n_nets} random networks)",
        passed=worst < 1e-8,
        detail=f"max abs deviation {worst:.3e}",
    ))

    # Exact walk distribution vs literal sampled walks.
    rng = RandomStream(712)
    n_nets = 3 if quick else 8
    n_samples = 100_000 if quick else 1_000_000
    all_ok = True
    worst_stat = 0.0
    for k in range(n_nets):
        net = _random_network(5 + rng.randint(4), rng)
        source = rng.randint(net.n_concepts)
        other = (source + 1 + rng.randint(net.n_concepts - 1)) % net.n_concepts
        result = walk_frequency_check(net, source, {source, other},
                                      n_samples=n_samples, seed=900 + k)
        all_ok = all_ok and result.passed
        worst_stat = max(worst_stat, result.statistic)
    outcomes.append(CheckOutcome(
        name=f"walk distribution vs {n_samples} sampled walks ({n_nets} networks)",
        passed=all_ok,
        detail=f"max chi-square {worst_stat:.2f}",
    ))

    # Determinism of single runs.
    small = SimConfig(n_agents=10, n_edges=15, steps=5_000 if quick else 10_000,
                      sample_interval=1_000, seed=55)
    same = replay_check(small)
    _, pop_a = run_simulation(small, collect_snapshots=False)
    _, pop_b = run_simulation(replace(small, seed=56), collect_snapshots=False)
    differs = not np.array_equal(pop_a.weights, pop_b.weights)
    outcomes.append(CheckOutcome(
        name="single-run replay (same seed identical, different seed differs)",
        passed=same and differs,
        detail=f"identical={same}, different-seed differs={differs}",
    ))

    # Determinism of sweeps across worker counts.
    sweep = SweepConfig(
        alpha_values=[0.0, 1.0],
        beta_values=[0.0, 1.0],
        runs_per_cell=2,
        base_seed=77,
        template=SimConfig(n_agents=10, n_edges=15, steps=2_000 if quick else 5_000,
                           sample_interval=1_000),
    )
    sweep_ok = sweep_replay_check(sweep, worker_counts=(1, 2, 8))
    outcomes.append(CheckOutcome(
        name="sweep replay at 1, 2, 8 workers",
        passed=sweep_ok,
        detail="grids bit-identical" if sweep_ok else "grids differ",
    ))

    return outcomes
