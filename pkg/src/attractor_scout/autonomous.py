"""Closed-loop operation: warm up on a ground-truth transient, then feed the
model its own predictions to generate the inferred attractor series."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import LengthMismatchError
from .lisprott import N_VARS, SampledTrajectory

# predictions beyond this magnitude stop the run; the offending prediction is
# still recorded so the blow-up is visible in downstream statistics
DIVERGENCE_GUARD = 1e6

WARMUP_LEN = 1000


@dataclass(eq=False)
class InferenceRun:
    """One autonomous generation: warmup provenance, output and divergence."""

    model_ref: dict
    attractor_id: str | None
    warmup_points: np.ndarray
    generated: np.ndarray
    diverged_at: int | None = None

    @property
    def truncated(self):
        return self.diverged_at is not None


def predict_next(model, state):
    """Readout of one state: [X_1, ..., X_N, 1] . W_out as a 4-vector."""
    n = model.weights.n_nodes
    return state.x @ model.w_out[:n] + model.w_out[n]


def run_autonomous(model, transient, n_steps=10000, attractor_id=None):
    """Reset to the cached relaxed state, warm up on 1,000 ground-truth
    points, then generate n_steps samples in closed loop.

    The transient must be a noise-free ground-truth run of exactly 1,000
    points. Divergence (any predicted component beyond 1e6) is recorded via
    diverged_at rather than raised: it is a classified outcome.
    """
    from .reservoir import ReservoirState, drive

    if isinstance(transient, SampledTrajectory):
        points = transient.points
    else:
        points = np.ascontiguousarray(transient, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != N_VARS:
        raise ValueError("transient must have shape (1000, 4)")
    if len(points) != WARMUP_LEN:
        raise LengthMismatchError(
            f"warmup transient must have exactly {WARMUP_LEN} points, "
            f"got {len(points)}")
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")

    cfg = model.config
    state = ReservoirState(x=model.relaxed_state.x.copy(),
                           t=model.relaxed_state.t)
    state, _ = drive(model.weights, state, points, cfg)

    out = np.empty((n_steps, N_VARS))
    diverged_at = None
    if n_steps > 0:
        w = model.weights
        stop = _kernels.autonomous_chunk(
            w.w_res.data, w.w_res.indices, w.w_res.indptr, w.w_in, w.bias,
            cfg.input_gain, model.w_out, state.x, cfg.rk4_dt,
            cfg.steps_per_input, n_steps, DIVERGENCE_GUARD, out)
        if stop >= 0:
            diverged_at = int(stop)
            out = out[:stop + 1]

    return InferenceRun(
        model_ref={"topology_seed": cfg.topology_seed,
                   "eta": model.ridge.eta},
        attractor_id=attractor_id,
        warmup_points=points,
        generated=out,
        diverged_at=diverged_at,
    )
