"""Full runs and parameter sweeps.

run_simulation drives the compiled step kernel between metric samples;
run_sweep fans independent runs out over a thread pool (the kernel releases
the GIL). Every sweep cell run derives its own seed from the base seed and
its grid position, so results do not depend on execution order or worker
count, and any single cell can be reproduced in isolation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from . import _kernels as _k
from .dynamics import INFLUENCE_MODES, DynamicsParams
from .errors import ConfigError
from .metrics import (MetricsSeries, affective_polarization, mean_dissonance,
                      opinion_polarization, snapshot_histograms)
from .population import Population, generate_social_graph
from .rng import RandomStream, derive_seed

DEFAULT_STEPS = 2_500_000
DEFAULT_SAMPLE_INTERVAL = 10_000


@dataclass
class SimConfig:
    """All free parameters of one simulation run."""

    n_agents: int = 100
    n_edges: int = 200
    steps: int = DEFAULT_STEPS
    alpha: float = 1.0
    beta: float = 1.0
    sigma: float = 0.1
    influence_mode: str = "convergent"
    init_sigma: float = 1e-5
    sample_interval: int = DEFAULT_SAMPLE_INTERVAL
    bin_count: int = 40
    seed: int = 0

    def validate(self) -> None:
        if self.n_agents < 2:
            raise ConfigError(f"n_agents must be >= 2, got {self.n_agents}")
        if self.n_edges < 1:
            raise ConfigError(f"n_edges must be >= 1, got {self.n_edges}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.beta < 0.0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        if self.sigma < 0.0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.influence_mode not in INFLUENCE_MODES:
            raise ConfigError(
                f"influence_mode must be one of {INFLUENCE_MODES}, got {self.influence_mode!r}")
        if self.init_sigma < 0.0:
            raise ConfigError(f"init_sigma must be >= 0, got {self.init_sigma}")
        if self.sample_interval < 1:
            raise ConfigError(f"sample_interval must be >= 1, got {self.sample_interval}")
        if self.bin_count < 2:
            raise ConfigError(f"bin_count must be >= 2, got {self.bin_count}")

    def dynamics_params(self) -> DynamicsParams:
        return DynamicsParams(alpha=self.alpha, beta=self.beta, sigma=self.sigma,
                              influence_mode=self.influence_mode)


def _sample_points(steps: int, interval: int) -> list[int]:
    points = list(range(0, steps, interval))
    points.append(steps)  # the final step is always sampled
    return points


def run_simulation(config: SimConfig, collect_snapshots: bool = True
                   ) -> tuple[MetricsSeries, Population]:
    """Execute one full run; returns the sampled metrics and the final population.

    Metrics are recorded at step 0, every sample_interval steps, and at the
    final step. Sampling is read-only and consumes no random draws, so the
    trajectory depends only on (config, seed).
    """
    config.validate()
    rng = RandomStream(config.seed)
    graph = generate_social_graph(config.n_agents, config.n_edges, rng)
    pop = Population(graph, rng, init_sigma=config.init_sigma)
    params = config.dynamics_params()

    points = _sample_points(config.steps, config.sample_interval)
    steps_out = []
    p_o_out = []
    p_a_out = []
    diss_out = []
    snapshots = []

    probs_buf = np.zeros(int(pop.n_concepts.max()), dtype=np.float64)
    mask_buf = np.zeros(int(pop.n_concepts.max()), dtype=np.uint8)
    reinforcing = params.influence_mode == "reinforcing"

    def record(step: int) -> None:
        steps_out.append(step)
        p_o_out.append(opinion_polarization(pop.agents))
        p_a_out.append(affective_polarization(pop.agents))
        diss_out.append(mean_dissonance(pop.agents))

    record(0)
    if collect_snapshots:
        snapshots.append((0, snapshot_histograms(pop.agents, config.bin_count)))
    done = 0
    for point in points[1:]:
        _k.run_steps(pop.weights, pop.fixed, pop.n_concepts,
                     pop.nbr_indptr, pop.nbr_ids,
                     pop.tab_indptr, pop.tab_sx, pop.tab_sy, pop.tab_rx, pop.tab_ry,
                     params.alpha, params.beta, params.sigma, reinforcing,
                     point - done, rng.state, probs_buf, mask_buf)
        done = point
        record(point)
    if collect_snapshots:
        snapshots.append((config.steps, snapshot_histograms(pop.agents, config.bin_count)))

    series = MetricsSeries(
        steps=np.asarray(steps_out, dtype=np.int64),
        p_o=np.asarray(p_o_out, dtype=np.float64),
        p_a=np.asarray(p_a_out, dtype=np.float64),
        mean_dissonance=np.asarray(diss_out, dtype=np.float64),
        snapshots=snapshots,
    )
    series.validate()
    return series, pop


def _default_alpha_grid() -> list[float]:
    return [round(0.1 * k, 1) for k in range(11)]


def _default_beta_grid() -> list[float]:
    return [float(k) for k in range(11)]


@dataclass
class SweepConfig:
    """Grid sweep over (alpha, beta), several independent runs per cell.

    The default grid covers alpha 0..1 in steps of 0.1 and beta 0..10 in
    steps of 1; the beta axis extends past 1 because the coherence drive
    acts non-monotonically and the downturn only shows at larger values.
    """

    alpha_values: list = field(default_factory=_default_alpha_grid)
    beta_values: list = field(default_factory=_default_beta_grid)
    runs_per_cell: int = 10
    base_seed: int = 0
    template: SimConfig = field(default_factory=SimConfig)

    def validate(self) -> None:
        if not self.alpha_values:
            raise ConfigError("alpha_values must be non-empty")
        if not self.beta_values:
            raise ConfigError("beta_values must be non-empty")
        for a in self.alpha_values:
            if not 0.0 <= a <= 1.0:
                raise ConfigError(f"alpha grid value {a} outside [0, 1]")
        for b in self.beta_values:
            if b < 0.0:
                raise ConfigError(f"beta grid value {b} must be >= 0")
        if self.runs_per_cell < 1:
            raise ConfigError(f"runs_per_cell must be >= 1, got {self.runs_per_cell}")
        probe = replace(self.template, alpha=0.0, beta=0.0)
        probe.validate()


@dataclass
class SweepResult:
    """Cell-averaged final polarization over the sweep grid."""

    alpha_values: list
    beta_values: list
    runs_per_cell: int
    mean_p_o: np.ndarray  # shape (len(alpha_values), len(beta_values))
    mean_p_a: np.ndarray


def cell_seed(base_seed: int, alpha_index: int, beta_index: int, run_index: int) -> int:
    """Deterministic positional seed for one run of one sweep cell."""
    return derive_seed(base_seed, alpha_index, beta_index, run_index)


def run_cell(sweep: SweepConfig, alpha_index: int, beta_index: int,
             run_index: int) -> tuple[float, float]:
    """Run one cell repetition; returns (final P_O, final P_A)."""
    config = replace(
        sweep.template,
        alpha=float(sweep.alpha_values[alpha_index]),
        beta=float(sweep.beta_values[beta_index]),
        seed=cell_seed(sweep.base_seed, alpha_index, beta_index, run_index),
        # Only final values are consumed; skip intermediate samples since
        # sampling never affects the trajectory.
        sample_interval=sweep.template.steps,
    )
    series, _ = run_simulation(config, collect_snapshots=False)
    return float(series.p_o[-1]), float(series.p_a[-1])


def max_sweep_workers(requested: Optional[int] = None) -> int:
    """Worker count for sweeps: requested or CPU count, capped by BELIEFSIM_THREADS."""
    workers = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("BELIEFSIM_THREADS")
    if cap is not None:
        try:
            cap_val = int(cap)
        except ValueError as exc:
            raise ConfigError(f"BELIEFSIM_THREADS must be an integer, got {cap!r}") from exc
        if cap_val < 1:
            raise ConfigError(f"BELIEFSIM_THREADS must be >= 1, got {cap_val}")
        workers = min(workers, cap_val)
    return max(1, workers)


def run_sweep(sweep: SweepConfig, max_workers: Optional[int] = None) -> SweepResult:
    """Run the full grid; cell results are averaged over runs_per_cell runs.

    Cells execute on a thread pool (the step kernel releases the GIL); the
    result is independent of worker count and scheduling order because every
    run's seed is a pure function of its grid position.
    """
    sweep.validate()
    n_a = len(sweep.alpha_values)
    n_b = len(sweep.beta_values)
    mean_p_o = np.zeros((n_a, n_b), dtype=np.float64)
    mean_p_a = np.zeros((n_a, n_b), dtype=np.float64)
    jobs = [(ai, bi, ri)
            for ai in range(n_a)
            for bi in range(n_b)
            for ri in range(sweep.runs_per_cell)]
    workers = max_sweep_workers(max_workers)
    if workers == 1:
        results = [run_cell(sweep, ai, bi, ri) for ai, bi, ri in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: run_cell(sweep, *job), jobs))
    for (ai, bi, _), (p_o, p_a) in zip(jobs, results):
        mean_p_o[ai, bi] += p_o
        mean_p_a[ai, bi] += p_a
    mean_p_o /= sweep.runs_per_cell
    mean_p_a /= sweep.runs_per_cell
    return SweepResult(
        alpha_values=list(sweep.alpha_values),
        beta_values=list(sweep.beta_values),
        runs_per_cell=sweep.runs_per_cell,
        mean_p_o=mean_p_o,
        mean_p_a=mean_p_a,
    )
