"""File formats: trajectory CSV with JSON sidecar, model files (npz)."""

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sparse

from .lisprott import LiSprottParams, SampledTrajectory
from .reservoir import ReservoirConfig, ReservoirState, ReservoirWeights
from .training import RidgeConfig, TrainedModel

_TRAJ_HEADER = "t,x,y,z,u"


def _sidecar_path(path):
    path = Path(path)
    return path.with_suffix(".meta.json")


def write_series(points, sample_interval, path, meta):
    """Write a (K, 4) series as CSV rows t,x,y,z,u at 17 significant digits,
    plus a JSON sidecar with the given metadata."""
    points = np.asarray(points, dtype=np.float64)
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(_TRAJ_HEADER + "\n")
        for k, row in enumerate(points):
            t = (k + 1) * sample_interval
            fh.write("%.17g,%.17g,%.17g,%.17g,%.17g\n" % (t, *row))
    with open(_sidecar_path(path), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return path


def write_trajectory(traj, path):
    """Persist a SampledTrajectory (CSV + sidecar with its provenance)."""
    return write_series(traj.points, traj.sample_interval, path, traj.meta())


def read_trajectory(path):
    """Load a trajectory CSV and its sidecar back into a SampledTrajectory."""
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    with open(_sidecar_path(path)) as fh:
        meta = json.load(fh)
    return SampledTrajectory(
        points=data[:, 1:5],
        sample_interval=meta["sample_interval"],
        params=LiSprottParams(a=meta["a"], b=meta["b"], sigma=meta["sigma"]),
        initial_condition=tuple(meta["initial_condition"]),
        rng_seed=meta["rng_seed"],
        stride=meta["stride"],
        h=meta["h"],
    )


def _weights_arrays(weights):
    coo = weights.w_res.tocoo()
    n = weights.n_nodes
    w_in_row = np.arange(n)
    w_in_col = np.argmax(weights.w_in != 0, axis=1)
    w_in_val = weights.w_in[w_in_row, w_in_col]
    return {
        "w_res_row": coo.row,
        "w_res_col": coo.col,
        "w_res_val": coo.data,
        "w_in_row": w_in_row,
        "w_in_col": w_in_col,
        "w_in_val": w_in_val,
        "bias": weights.bias,
        "achieved_lambda_max": np.float64(weights.achieved_lambda_max),
    }


def _weights_from_arrays(data, cfg):
    n = cfg.n_nodes
    w_res = sparse.csr_matrix(
        (data["w_res_val"], (data["w_res_row"], data["w_res_col"])),
        shape=(n, n))
    w_in = np.zeros((n, 4))
    w_in[data["w_in_row"], data["w_in_col"]] = data["w_in_val"]
    return ReservoirWeights(
        w_res=w_res, w_in=w_in, bias=data["bias"],
        achieved_lambda_max=float(data["achieved_lambda_max"]))


def save_weights(weights, cfg, path):
    """Weights-only model file; round-trips bit-exactly."""
    arrays = _weights_arrays(weights)
    np.savez(path, kind="reservoir",
             config_json=json.dumps(cfg.__dict__), **arrays)
    return Path(path)


def load_weights(path):
    """Load (ReservoirWeights, ReservoirConfig) from a weights file."""
    with np.load(path, allow_pickle=False) as data:
        cfg = ReservoirConfig(**json.loads(str(data["config_json"])))
        return _weights_from_arrays(data, cfg), cfg


def save_model(model, path):
    """Full trained-model file: weights + readout + relaxed state + meta."""
    arrays = _weights_arrays(model.weights)
    np.savez(
        path, kind="trained",
        config_json=json.dumps(model.config.__dict__),
        training_meta_json=json.dumps(model.training_meta),
        ridge_eta=np.float64(model.ridge.eta),
        w_out=model.w_out,
        relaxed_x=model.relaxed_state.x,
        relaxed_t=np.float64(model.relaxed_state.t),
        **arrays)
    return Path(path)


def load_model(path):
    """Load a TrainedModel saved by save_model; round-trips bit-exactly."""
    with np.load(path, allow_pickle=False) as data:
        if str(data["kind"]) != "trained":
            raise ValueError(f"{path} is not a trained-model file")
        cfg = ReservoirConfig(**json.loads(str(data["config_json"])))
        weights = _weights_from_arrays(data, cfg)
        return TrainedModel(
            weights=weights,
            config=cfg,
            ridge=RidgeConfig(eta=float(data["ridge_eta"])),
            w_out=data["w_out"],
            relaxed_state=ReservoirState(x=data["relaxed_x"],
                                         t=float(data["relaxed_t"])),
            training_meta=json.loads(str(data["training_meta_json"])),
        )
