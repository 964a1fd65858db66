"""Command-line interface.

Subcommands:
  generate-data  write the training series and reference CSVs for a scenario
  train          train one model and save it to a model file
  infer          run a saved model autonomously toward one attractor
  evaluate       error report for a saved model over all scenario attractors
  ensemble       sweep over random topologies, write report + histogram CSVs
  histogram      rebin the total errors of an existing report
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import AttractorScoutError
from .experiment import evaluate_model, histogram, load_config, \
    read_report, run_ensemble, scenario_config, write_histogram_csv, \
    write_report
from .io import load_model, save_model, write_series, write_trajectory
from .lisprott import SCENARIOS, make_reference, make_training_series
from .reservoir import build_reservoir
from .training import train as train_readout


def _add_common(parser, n_seeds=False, parallelism=False):
    parser.add_argument("--config", metavar="PATH",
                        help="JSON experiment config (flags override it)")
    parser.add_argument("--scenario", choices=sorted(SCENARIOS),
                        help="scenario registry entry (default A)")
    parser.add_argument("--seed", type=int, default=None,
                        help="primary RNG seed for this subcommand")
    if n_seeds:
        parser.add_argument("--n-seeds", type=int, default=None,
                            help="number of topology seeds in the sweep")
    if parallelism:
        parser.add_argument("--parallelism", type=int, default=None,
                            help="worker processes (overrides "
                                 "ATTRACTOR_SCOUT_THREADS)")


def _experiment_config(args, **overrides):
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        if args.scenario:
            cfg = replace(cfg, scenario=SCENARIOS[args.scenario])
    else:
        cfg = scenario_config(args.scenario or "A")
    if getattr(args, "n_seeds", None):
        overrides["n_seeds"] = args.n_seeds
    return replace(cfg, **overrides) if overrides else cfg


def _cmd_generate_data(args):
    cfg = _experiment_config(args)
    series_seed = args.seed if args.seed is not None else cfg.series_seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scenario = cfg.scenario
    series = make_training_series(scenario, series_seed)
    write_trajectory(series, out / f"training_{scenario.name}.csv")
    for site in scenario.attractors:
        transient, reference = make_reference(scenario, site.attractor_id)
        write_trajectory(transient, out / f"{site.attractor_id}_transient.csv")
        write_trajectory(reference, out / f"{site.attractor_id}_reference.csv")
    print(f"wrote training series ({len(series)} points) and "
          f"{len(scenario.attractors)} reference pairs to {out}")
    return 0


def _cmd_train(args):
    cfg = _experiment_config(args)
    topology_seed = args.seed if args.seed is not None else cfg.base_seed
    rcfg = replace(cfg.reservoir, topology_seed=topology_seed)
    series = make_training_series(cfg.scenario, cfg.series_seed)
    weights = build_reservoir(rcfg)
    model = train_readout(weights, rcfg, series, cfg.ridge)
    save_model(model, args.out)
    nrmse = ", ".join(f"{v:.3g}" for v in model.training_meta["nrmse"])
    print(f"trained seed {topology_seed} on scenario {cfg.scenario.name} "
          f"(training NRMSE {nrmse}); model written to {args.out}")
    return 0


def _cmd_infer(args):
    from .autonomous import run_autonomous

    cfg = _experiment_config(args)
    model = load_model(args.model)
    transient, _ = make_reference(cfg.scenario, args.attractor)
    run = run_autonomous(model, transient, n_steps=args.steps,
                         attractor_id=args.attractor)
    meta = {
        "scenario": cfg.scenario.name,
        "attractor_id": args.attractor,
        "model_file": str(args.model),
        "model_ref": run.model_ref,
        "diverged_at": run.diverged_at,
        "sample_interval": cfg.scenario.sample_interval(),
    }
    write_series(run.generated, cfg.scenario.sample_interval(), args.out, meta)
    status = (f"diverged at step {run.diverged_at}" if run.truncated
              else f"generated {len(run.generated)} points")
    print(f"{status}; series written to {args.out}")
    return 0


def _cmd_evaluate(args):
    cfg = _experiment_config(args)
    model = load_model(args.model)
    record = evaluate_model(cfg, model)
    write_report([record], args.out)
    print(f"{record.outcome.outcome}: delta_tot = "
          f"{record.outcome.delta_tot:.6g}; report written to {args.out}")
    return 0


def _cmd_ensemble(args):
    out = Path(args.out)
    cfg = _experiment_config(args, output_dir=out)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    records = run_ensemble(cfg, parallelism=args.parallelism)
    report_path = write_report(records, out / "report.csv")
    delta_tots = [r.outcome.delta_tot for r in records if r.outcome is not None]
    edges = np.arange(0.0, args.max + args.bin_width, args.bin_width)
    hist = histogram(delta_tots, edges)
    hist_path = write_histogram_csv(hist, out / "histogram.csv")
    n_failed = sum(r.failed for r in records)
    counts = {}
    for rec in records:
        if rec.outcome is not None:
            counts[rec.outcome.outcome] = counts.get(rec.outcome.outcome, 0) + 1
    summary = ", ".join(f"{k}: {v}" for k, v in sorted(counts.items()))
    print(f"{len(records)} runs ({summary}"
          + (f", Failed: {n_failed}" if n_failed else "")
          + f"); report {report_path}, histogram {hist_path}")
    return 0


def _cmd_histogram(args):
    rows = read_report(args.report)
    by_seed = {}
    for row in rows:
        by_seed[row["seed"]] = row["delta_tot"]
    edges = np.arange(0.0, args.max + args.bin_width, args.bin_width)
    hist = histogram(list(by_seed.values()), edges)
    write_histogram_csv(hist, args.out)
    print(f"rebinned {len(by_seed)} runs into {len(hist.counts)} bins "
          f"(+{hist.n_overflow} overflow); histogram written to {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="attractor-scout",
        description="Echo-state-network inference of unseen attractors of "
                    "the 4-D Li-Sprott system.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data",
                       help="write training/reference CSVs for a scenario")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_generate_data)

    p = sub.add_parser("train", help="train one model and save it")
    _add_common(p)
    p.add_argument("--out", required=True, help="model file (.npz)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("infer",
                       help="run a saved model autonomously for one attractor")
    _add_common(p)
    p.add_argument("--model", required=True, help="model file from train")
    p.add_argument("--attractor", required=True, help="attractor id")
    p.add_argument("--steps", type=int, default=10000,
                   help="closed-loop steps to generate")
    p.add_argument("--out", required=True, help="generated series CSV")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("evaluate",
                       help="error report for a saved model")
    _add_common(p)
    p.add_argument("--model", required=True, help="model file from train")
    p.add_argument("--out", required=True, help="report CSV")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("ensemble",
                       help="sweep random topologies; report + histogram")
    _add_common(p, n_seeds=True, parallelism=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--bin-width", type=float, default=0.25,
                   help="histogram bin width for delta_tot")
    p.add_argument("--max", type=float, default=10.0,
                   help="histogram upper edge (rest is overflow)")
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("histogram", help="rebin an existing report")
    p.add_argument("--report", required=True, help="report CSV to read")
    p.add_argument("--out", required=True, help="histogram CSV")
    p.add_argument("--bin-width", type=float, default=0.25)
    p.add_argument("--max", type=float, default=10.0)
    p.set_defaults(func=_cmd_histogram)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AttractorScoutError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
