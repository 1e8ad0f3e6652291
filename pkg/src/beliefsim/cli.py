"""Command-line interface: beliefsim run | sweep | validate."""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import parse_sim_config, parse_sweep_config
from .errors import ConfigError
from .experiment import max_sweep_workers, run_simulation, run_sweep
from .output import (RunManifest, emit_histograms_csv, emit_sweep_csv,
                     emit_timeseries_csv, heatmap_svg, histogram_svg, line_plot_svg)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="random seed (sweep: base seed)")
    parser.add_argument("--alpha", type=float, help="social influence strength in [0, 1]")
    parser.add_argument("--beta", type=float, help="coherence strength >= 0")
    parser.add_argument("--sigma", type=float, help="update noise scale >= 0")
    parser.add_argument("--steps", type=int, help="simulation steps per run")
    parser.add_argument("--out", metavar="DIR", default="out", help="output directory")
    parser.add_argument("--mode", choices=("convergent", "reinforcing"),
                        help="social influence formulation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefsim",
        description="Belief-network simulation: stereotypes and polarization "
                    "from social transmission plus coherence-driven updates.",
    )
    parser.add_argument("--version", action="version", version=f"beliefsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single trajectory with metrics, CSV, and plots")
    _add_common_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="alpha x beta grid averaged over repeated runs")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--runs-per-cell", type=int, help="independent runs per grid cell")
    p_sweep.add_argument("--workers", type=int, help="thread pool size (also capped by BELIEFSIM_THREADS)")

    p_val = sub.add_parser("validate", help="run the correctness oracle suite")
    p_val.add_argument("--quick", action="store_true", help="smaller sample sizes")
    return parser


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _overrides(args) -> dict:
    return {
        "seed": args.seed,
        "alpha": args.alpha,
        "beta": args.beta,
        "sigma": args.sigma,
        "steps": args.steps,
        "influence_mode": args.mode,
    }


def _cmd_run(args) -> int:
    config = parse_sim_config(args.config, _overrides(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    series, pop = run_simulation(config)
    finished = _now()

    files = []
    files.append(emit_timeseries_csv(series, out / "timeseries.csv"))
    steps = series.steps
    files.append(line_plot_svg(steps, series.p_o, out / "opinion_polarization.svg",
                               title="Opinion polarization over time",
                               xlabel="step", ylabel="P_O", y_range=(0.0, 2.0)))
    files.append(line_plot_svg(steps, series.p_a, out / "affective_polarization.svg",
                               title="Affective polarization over time",
                               xlabel="step", ylabel="P_A", y_range=(-2.0, 2.0)))
    files.append(line_plot_svg(steps, series.mean_dissonance, out / "mean_dissonance.svg",
                               title="Mean internal dissonance over time",
                               xlabel="step", ylabel="mean dissonance", y_range=(-1.0, 1.0)))
    for step, hists in series.snapshots:
        tag = "initial" if step == 0 else "final"
        files.append(emit_histograms_csv(hists, out / f"histograms_{tag}.csv"))
        files.append(histogram_svg(
            hists.bin_edges,
            [("group A", hists.latte_group_a), ("group B", hists.latte_group_b)],
            out / f"hist_latte_by_group_{tag}.svg",
            title=f"Belief toward latte by group ({tag})", xlabel="belief weight"))
        files.append(histogram_svg(
            hists.bin_edges, [("all agents", hists.group_a_latte)],
            out / f"hist_group_a_latte_{tag}.svg",
            title=f"Group A-latte association ({tag})", xlabel="belief weight"))
        files.append(histogram_svg(
            hists.bin_edges, [("ingroup", hists.ingroup)],
            out / f"hist_ingroup_{tag}.svg",
            title=f"Beliefs toward ingroup neighbors ({tag})", xlabel="belief weight"))
        files.append(histogram_svg(
            hists.bin_edges, [("outgroup", hists.outgroup)],
            out / f"hist_outgroup_{tag}.svg",
            title=f"Beliefs toward outgroup neighbors ({tag})", xlabel="belief weight"))

    manifest = RunManifest(command="run", config=asdict(config), seed=config.seed,
                           version=__version__, started=started, finished=finished,
                           files=[f.name for f in files])
    manifest_path = manifest.write(out / "manifest.json")
    print(f"run complete: {config.steps} steps, seed {config.seed}")
    print(f"final P_O={series.p_o[-1]:.4f} P_A={series.p_a[-1]:.4f} "
          f"mean_dissonance={series.mean_dissonance[-1]:.4f}")
    print(f"wrote {len(files) + 1} files to {out} (manifest: {manifest_path.name})")
    return 0


def _cmd_sweep(args) -> int:
    sweep = parse_sweep_config(args.config, _overrides(args))
    if args.runs_per_cell is not None:
        sweep.runs_per_cell = args.runs_per_cell
        sweep.validate()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    workers = max_sweep_workers(args.workers)
    n_runs = len(sweep.alpha_values) * len(sweep.beta_values) * sweep.runs_per_cell
    print(f"sweep: {len(sweep.alpha_values)}x{len(sweep.beta_values)} grid, "
          f"{sweep.runs_per_cell} runs/cell ({n_runs} runs), {workers} worker(s)")
    started = _now()
    result = run_sweep(sweep, max_workers=workers)
    finished = _now()

    files = []
    files.append(emit_sweep_csv(result, out / "sweep.csv"))
    files.append(heatmap_svg(result.alpha_values, result.beta_values, result.mean_p_o,
                             out / "heatmap_opinion_polarization.svg",
                             title="Mean final opinion polarization"))
    files.append(heatmap_svg(result.alpha_values, result.beta_values, result.mean_p_a,
                             out / "heatmap_affective_polarization.svg",
                             title="Mean final affective polarization"))
    config_record = {
        "alpha_values": list(sweep.alpha_values),
        "beta_values": list(sweep.beta_values),
        "runs_per_cell": sweep.runs_per_cell,
        "base_seed": sweep.base_seed,
        "template": asdict(sweep.template),
    }
    manifest = RunManifest(command="sweep", config=config_record, seed=sweep.base_seed,
                           version=__version__, started=started, finished=finished,
                           files=[f.name for f in files])
    manifest.write(out / "manifest.json")
    print(f"wrote {len(files) + 1} files to {out}")
    return 0


def _cmd_validate(args) -> int:
    from .validation import run_validation_suite
    outcomes = run_validation_suite(quick=args.quick)
    failures = 0
    for outcome in outcomes:
        status = "PASS" if outcome.passed else "FAIL"
        failures += 0 if outcome.passed else 1
        print(f"[{status}] {outcome.name}: {outcome.detail}")
    print(f"{len(outcomes) - failures}/{len(outcomes)} checks passed")
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_validate(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
