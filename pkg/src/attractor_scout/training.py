"""One-step-ahead readout training via Tikhonov-regularized regression.

The recorded reservoir states (with a trailing bias column of ones) form the
state matrix S; the targets are the input series shifted one sample into the
future; the readout solves S^T Y = (S^T S + eta I) W_out.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import LengthMismatchError, SingularSystemError
from .lisprott import N_VARS, SampledTrajectory
from .reservoir import drive, relax


@dataclass(frozen=True)
class RidgeConfig:
    """Regularization strength for the readout regression."""

    eta: float = 1e-3

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0")


@dataclass(eq=False)
class TrainedModel:
    """Reservoir weights plus the trained readout and run-time context.

    relaxed_state is the cached post-relaxation state that autonomous runs
    reset to; training_meta records series provenance, eta, washout length
    and the per-variable training NRMSE.
    """

    weights: object
    config: object
    ridge: RidgeConfig
    w_out: np.ndarray
    relaxed_state: object
    training_meta: dict


def assemble_state_matrix(recorded):
    """Stack recorded states into rows [X_1(t_k), ..., X_N(t_k), 1]."""
    recorded = np.asarray(recorded, dtype=np.float64)
    if recorded.ndim != 2 or len(recorded) == 0:
        raise ValueError("recorded must be a nonempty (K, N) array")
    return np.hstack([recorded, np.ones((len(recorded), 1))])


def ridge_solve(s_matrix, targets, eta):
    """Solve the regularized normal equations for the readout weights.

    Forms the Gram matrix explicitly and uses a Cholesky factorization;
    the result satisfies ||S^T S W + eta W - S^T Y|| / ||S^T Y|| < 1e-8.
    """
    s_matrix = np.asarray(s_matrix, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    if s_matrix.shape[0] != targets.shape[0]:
        raise ValueError(
            f"S has {s_matrix.shape[0]} rows but targets have "
            f"{targets.shape[0]}")
    if eta < 0:
        raise ValueError("eta must be >= 0")
    gram = s_matrix.T @ s_matrix
    gram[np.diag_indices_from(gram)] += eta
    rhs = s_matrix.T @ targets
    try:
        factor = scipy.linalg.cho_factor(gram)
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystemError(
            f"regularized Gram matrix is numerically singular (eta={eta})"
        ) from exc
    return scipy.linalg.cho_solve(factor, rhs)


def train(weights, cfg, series, ridge, washout=1000, n_train=9999,
          relaxed_state=None):
    """Train a readout on a sampled series (defaults: the 11,000-point protocol).

    The series must contain exactly washout + n_train + 1 points: the washout
    drives the reservoir without recording, the next n_train responses become
    state-matrix rows, and each target is the input one sample ahead (the
    final point serves only as the last target).
    """
    if isinstance(series, SampledTrajectory):
        points = series.points
        provenance = series.meta()
    else:
        points = np.ascontiguousarray(series, dtype=np.float64)
        provenance = {"n_points": int(len(points))}
    if points.ndim != 2 or points.shape[1] != N_VARS:
        raise ValueError("series must have shape (K, 4)")
    expected = washout + n_train + 1
    if len(points) != expected:
        raise LengthMismatchError(
            f"series has {len(points)} points; expected {expected} "
            f"(washout {washout} + {n_train} training rows + 1 reserve)")
    if relaxed_state is None:
        relaxed_state = relax(weights, cfg)
    _, recorded = drive(weights, relaxed_state, points[:washout + n_train], cfg)
    s_matrix = assemble_state_matrix(recorded[washout:])
    targets = points[washout + 1:washout + n_train + 1]
    w_out = ridge_solve(s_matrix, targets, ridge.eta)

    residual = s_matrix @ w_out - targets
    rmse = np.sqrt(np.mean(residual ** 2, axis=0))
    std = targets.std(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        nrmse = np.where(std > 0, rmse / std, np.nan)

    meta = {
        "series": provenance,
        "eta": ridge.eta,
        "washout": washout,
        "n_train": n_train,
        "nrmse": tuple(float(v) for v in nrmse),
    }
    return TrainedModel(weights=weights, config=cfg, ridge=ridge, w_out=w_out,
                        relaxed_state=relaxed_state, training_meta=meta)
