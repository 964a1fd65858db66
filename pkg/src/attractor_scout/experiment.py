"""End-to-end experiments: scenario defaults, single runs, parallel ensembles
over random topologies, report/histogram files."""

import json
import math
import os
from dataclasses import dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from .autonomous import run_autonomous
from .io import write_series
from .lisprott import SCENARIOS, ScenarioSpec, AttractorSite, LiSprottParams, \
    make_reference, make_training_series
from .metrics import RunOutcome, attractor_error, classify, stats
from .reservoir import ReservoirConfig, build_reservoir
from .training import RidgeConfig, train

THREADS_ENV_VAR = "ATTRACTOR_SCOUT_THREADS"

REPORT_COLUMNS = (
    "seed,scenario,attractor_id,class,delta_x,delta_y,delta_z,delta_u,"
    "delta_abs_x,delta_abs_y,delta_abs_z,delta_abs_u,delta_att,delta_tot")

# per-scenario reservoir/readout operating points
_SCENARIO_RESERVOIR = {
    "A": dict(input_gain=0.3, bias_amplitude=1.0, lambda_max_target=0.95),
    "B": dict(input_gain=0.01, bias_amplitude=3.0, lambda_max_target=0.99),
}
_SCENARIO_ETA = {"A": 1e-3, "B": 1e-5}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce an ensemble."""

    scenario: ScenarioSpec
    reservoir: ReservoirConfig
    ridge: RidgeConfig
    n_seeds: int = 1
    base_seed: int = 0
    series_seed: int = 0
    autonomous_steps: int = 10000
    output_dir: Path = Path("runs")
    save_generated: bool = False

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if self.autonomous_steps < 1:
            raise ValueError("autonomous_steps must be >= 1")
        object.__setattr__(self, "output_dir", Path(self.output_dir))


@dataclass(eq=False)
class RunRecord:
    """Outcome of one topology seed (immutable once emitted)."""

    topology_seed: int
    scenario: str
    attractor_ids: tuple = ()
    outcome: RunOutcome | None = None
    training_nrmse: tuple | None = None
    error: str | None = None
    series_paths: dict = field(default_factory=dict)

    @property
    def failed(self):
        return self.error is not None


@dataclass(eq=False)
class Histogram:
    """Left-closed right-open binning; values at or above the last edge are
    counted in n_overflow."""

    bin_edges: np.ndarray
    counts: np.ndarray
    n_overflow: int


@dataclass(eq=False)
class SharedData:
    """Per-scenario inputs computed once and shared read-only by all runs."""

    series: object
    transients: dict
    references: dict
    ref_stats: dict


def scenario_config(name, **overrides):
    """ExperimentConfig with the registry meta-parameters for scenario name.

    Any ExperimentConfig field can be overridden; reservoir/ridge overrides
    are given as the full objects.
    """
    scenario = SCENARIOS[name]
    reservoir = ReservoirConfig(**_SCENARIO_RESERVOIR[name])
    ridge = RidgeConfig(eta=_SCENARIO_ETA[name])
    base = dict(scenario=scenario, reservoir=reservoir, ridge=ridge)
    base.update(overrides)
    return ExperimentConfig(**base)


def prepare_shared(cfg):
    """Generate the training series and all reference attractors once."""
    series = make_training_series(cfg.scenario, cfg.series_seed)
    transients = {}
    references = {}
    ref_stats = {}
    for site in cfg.scenario.attractors:
        transient, reference = make_reference(cfg.scenario, site.attractor_id)
        transients[site.attractor_id] = transient
        references[site.attractor_id] = reference
        ref_stats[site.attractor_id] = stats(reference)
    return SharedData(series=series, transients=transients,
                      references=references, ref_stats=ref_stats)


def evaluate_model(cfg, model, shared=None, topology_seed=None):
    """Probe every scenario attractor with an already-trained model and
    classify the outcome."""
    if shared is None:
        shared = prepare_shared(cfg)
    if topology_seed is None:
        topology_seed = model.config.topology_seed
    ids = tuple(site.attractor_id for site in cfg.scenario.attractors)
    record = RunRecord(topology_seed=topology_seed, scenario=cfg.scenario.name,
                       attractor_ids=ids)
    errors = []
    truncated = False
    for attractor_id in ids:
        run = run_autonomous(model, shared.transients[attractor_id],
                             n_steps=cfg.autonomous_steps,
                             attractor_id=attractor_id)
        truncated = truncated or run.truncated
        errors.append(attractor_error(stats(run.generated),
                                      shared.ref_stats[attractor_id]))
        if cfg.save_generated:
            record.series_paths[attractor_id] = str(_save_generated(
                cfg, topology_seed, attractor_id, run))
    record.outcome = classify(errors, truncated=truncated)
    record.training_nrmse = tuple(model.training_meta["nrmse"])
    return record


def run_single(cfg, topology_seed, shared=None):
    """Train one random topology and probe every scenario attractor.

    Module errors become a failed record rather than an exception so that
    ensembles never crash on one bad run.
    """
    if shared is None:
        shared = prepare_shared(cfg)
    try:
        rcfg = replace(cfg.reservoir, topology_seed=topology_seed)
        weights = build_reservoir(rcfg)
        model = train(weights, rcfg, shared.series, cfg.ridge)
        return evaluate_model(cfg, model, shared, topology_seed=topology_seed)
    except Exception as exc:  # noqa: BLE001 - failed runs are data, not crashes
        ids = tuple(site.attractor_id for site in cfg.scenario.attractors)
        return RunRecord(topology_seed=topology_seed,
                         scenario=cfg.scenario.name, attractor_ids=ids,
                         error=f"{type(exc).__name__}: {exc}")


def _save_generated(cfg, topology_seed, attractor_id, run):
    run_dir = cfg.output_dir / f"seed_{topology_seed}"
    run_dir.mkdir(parents=True, exist_ok=True)
    path = run_dir / f"{attractor_id}.csv"
    meta = {
        "scenario": cfg.scenario.name,
        "topology_seed": topology_seed,
        "attractor_id": attractor_id,
        "model_ref": run.model_ref,
        "diverged_at": run.diverged_at,
        "sample_interval": cfg.scenario.sample_interval(),
    }
    return write_series(run.generated, cfg.scenario.sample_interval(), path,
                        meta)


_WORKER = {}


def _ensemble_init(cfg, shared):
    _WORKER["cfg"] = cfg
    _WORKER["shared"] = shared


def _ensemble_task(seed):
    return run_single(_WORKER["cfg"], seed, _WORKER["shared"])


def resolve_parallelism(requested=None, n_tasks=None):
    """Worker count: explicit request wins, else the ATTRACTOR_SCOUT_THREADS
    cap, else the CPU count."""
    if requested is None:
        cap = os.environ.get(THREADS_ENV_VAR)
        requested = int(cap) if cap else (os.cpu_count() or 1)
    workers = max(1, int(requested))
    if n_tasks is not None:
        workers = min(workers, n_tasks)
    return workers


def run_ensemble(cfg, parallelism=None, shared=None):
    """Run seeds base_seed .. base_seed+n_seeds-1 independently.

    The record list is a pure function of cfg, independent of the execution
    order and degree of parallelism.
    """
    if shared is None:
        shared = prepare_shared(cfg)
    seeds = [cfg.base_seed + k for k in range(cfg.n_seeds)]
    workers = resolve_parallelism(parallelism, n_tasks=len(seeds))
    if workers == 1:
        records = [run_single(cfg, seed, shared) for seed in seeds]
    else:
        ctx = get_context("fork")
        with ctx.Pool(workers, initializer=_ensemble_init,
                      initargs=(cfg, shared)) as pool:
            results = pool.map(_ensemble_task, seeds)
        records = sorted(results, key=lambda r: r.topology_seed)
    return records


def report_rows(records):
    """Flatten records into report rows (one per run and attractor)."""
    rows = []
    for rec in records:
        if rec.failed or rec.outcome is None:
            rows.append({
                "seed": rec.topology_seed, "scenario": rec.scenario,
                "attractor_id": "", "class": "Failed",
                "delta": (math.nan,) * 4, "delta_abs": (math.nan,) * 4,
                "delta_att": math.nan, "delta_tot": math.nan,
            })
            continue
        for attractor_id, err in zip(rec.attractor_ids,
                                     rec.outcome.per_attractor):
            rows.append({
                "seed": rec.topology_seed, "scenario": rec.scenario,
                "attractor_id": attractor_id, "class": rec.outcome.outcome,
                "delta": err.delta, "delta_abs": err.delta_abs,
                "delta_att": err.delta_att,
                "delta_tot": rec.outcome.delta_tot,
            })
    return rows


def write_report(records, path):
    """Error report CSV, one row per (seed, attractor), full float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(REPORT_COLUMNS + "\n")
        for row in report_rows(records):
            values = [str(row["seed"]), row["scenario"], row["attractor_id"],
                      row["class"]]
            values += [repr(v) for v in row["delta"]]
            values += [repr(v) for v in row["delta_abs"]]
            values += [repr(row["delta_att"]), repr(row["delta_tot"])]
            fh.write(",".join(values) + "\n")
    return path


def read_report(path):
    """Parse a report CSV back into a list of row dicts."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            row = dict(zip(header, parts))
            for key in header[4:]:
                row[key] = float(row[key])
            row["seed"] = int(row["seed"])
            rows.append(row)
    return rows


def histogram(values, bin_edges):
    """Bin values left-closed right-open; values at or beyond the last edge
    land in n_overflow. Non-finite values are ignored; values below the first
    edge are a caller error."""
    edges = np.asarray(bin_edges, dtype=np.float64)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin_edges must be ascending with at least 2 entries")
    values = np.asarray(values, dtype=np.float64)
    finite = values[np.isfinite(values)]
    if np.any(finite < edges[0]):
        raise ValueError(f"values below the first edge {edges[0]}")
    overflow = int(np.sum(finite >= edges[-1]))
    inside = finite[finite < edges[-1]]
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    idx = np.searchsorted(edges, inside, side="right") - 1
    for i in idx:
        counts[i] += 1
    return Histogram(bin_edges=edges, counts=counts, n_overflow=overflow)


def write_histogram_csv(hist, path):
    """Histogram CSV bin_low,bin_high,count with a final overflow row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write("bin_low,bin_high,count\n")
        for lo, hi, c in zip(hist.bin_edges[:-1], hist.bin_edges[1:],
                             hist.counts):
            fh.write(f"{float(lo)!r},{float(hi)!r},{int(c)}\n")
        fh.write(f"{float(hist.bin_edges[-1])!r},inf,{hist.n_overflow}\n")
    return path


def config_to_dict(cfg):
    """JSON-ready dict mirroring the config type hierarchy."""
    scenario = cfg.scenario
    return {
        "scenario": {
            "name": scenario.name,
            "params": {"a": scenario.params.a, "b": scenario.params.b,
                       "sigma": scenario.params.sigma},
            "stride": scenario.stride,
            "attractors": [
                {"id": a.attractor_id,
                 "initial_condition": list(a.initial_condition),
                 "label": a.label} for a in scenario.attractors],
            "training_attractor_id": scenario.training_attractor_id,
        },
        "reservoir": dict(cfg.reservoir.__dict__),
        "ridge": {"eta": cfg.ridge.eta},
        "n_seeds": cfg.n_seeds,
        "base_seed": cfg.base_seed,
        "series_seed": cfg.series_seed,
        "autonomous_steps": cfg.autonomous_steps,
        "output_dir": str(cfg.output_dir),
        "save_generated": cfg.save_generated,
    }


def _check_fields(section, given, allowed):
    for key in given:
        if key not in allowed:
            raise ValueError(f"config: unknown field {section}{key}")


def config_from_dict(data):
    """Build an ExperimentConfig from a parsed config mapping.

    "scenario" may be a registry name ("A"/"B") or a full scenario section;
    reservoir/ridge fields override the scenario's registry defaults.
    """
    if not isinstance(data, dict):
        raise ValueError("config: top level must be an object")
    allowed = {"scenario", "reservoir", "ridge", "n_seeds", "base_seed",
               "series_seed", "autonomous_steps", "output_dir",
               "save_generated"}
    _check_fields("", data, allowed)
    scenario_raw = data.get("scenario", "A")
    if isinstance(scenario_raw, str):
        if scenario_raw not in SCENARIOS:
            raise ValueError(f"config: unknown scenario {scenario_raw!r}")
        name = scenario_raw
        scenario = SCENARIOS[name]
    else:
        _check_fields("scenario.", scenario_raw,
                      {"name", "params", "stride", "attractors",
                       "training_attractor_id"})
        _check_fields("scenario.params.", scenario_raw.get("params", {}),
                      {"a", "b", "sigma"})
        scenario = ScenarioSpec(
            name=scenario_raw.get("name", "custom"),
            params=LiSprottParams(**scenario_raw["params"]),
            stride=scenario_raw["stride"],
            attractors=tuple(
                AttractorSite(a["id"], tuple(a["initial_condition"]),
                              a["label"])
                for a in scenario_raw["attractors"]),
            training_attractor_id=scenario_raw["training_attractor_id"],
        )
        name = scenario.name if scenario.name in _SCENARIO_RESERVOIR else "A"
    reservoir_defaults = _SCENARIO_RESERVOIR.get(name, _SCENARIO_RESERVOIR["A"])
    reservoir_kwargs = dict(reservoir_defaults)
    _check_fields("reservoir.", data.get("reservoir", {}),
                  set(ReservoirConfig().__dict__))
    reservoir_kwargs.update(data.get("reservoir", {}))
    ridge_section = data.get("ridge", {})
    _check_fields("ridge.", ridge_section, {"eta"})
    eta = ridge_section.get("eta", _SCENARIO_ETA.get(name, 1e-3))
    kwargs = {k: data[k] for k in ("n_seeds", "base_seed", "series_seed",
                                   "autonomous_steps", "output_dir",
                                   "save_generated") if k in data}
    return ExperimentConfig(scenario=scenario,
                            reservoir=ReservoirConfig(**reservoir_kwargs),
                            ridge=RidgeConfig(eta=eta), **kwargs)


def load_config(path):
    """Load a JSON experiment config; parse errors cite line and column."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"config {path}: line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    return config_from_dict(data)
