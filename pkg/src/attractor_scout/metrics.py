"""Attractor-reconstruction error measures and outcome classification.

Reconstruction quality is judged on time averages: for each variable the
plain average and the average of absolute values, normalized by the
reference absolute average. The per-attractor error is the root of the sum
of all eight squared deviations.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EmptySeriesError, ZeroNormalizerError
from .lisprott import N_VARS, SampledTrajectory

# any normalized deviation at or above this marks a run as Diverged
DIVERGED_THRESHOLD = 100.0
# all normalized deviations strictly below this marks PartialSuccess
SUCCESS_THRESHOLD = 2.0

OUTCOME_DIVERGED = "Diverged"
OUTCOME_BOUNDED_FAILURE = "BoundedFailure"
OUTCOME_PARTIAL_SUCCESS = "PartialSuccess"


@dataclass(frozen=True)
class AttractorStats:
    """Per-variable means and absolute-value means of a series."""

    mean: tuple
    mean_abs: tuple
    n_points: int


@dataclass(frozen=True)
class AttractorError:
    """Normalized deviations of one (prediction, reference) pair."""

    delta: tuple
    delta_abs: tuple
    delta_att: float


@dataclass(frozen=True)
class RunOutcome:
    """Classification of one run over all scenario attractors."""

    outcome: str
    per_attractor: tuple
    delta_tot: float


def stats(series):
    """Arithmetic means of each component and of each absolute component."""
    if isinstance(series, SampledTrajectory):
        points = series.points
    else:
        points = np.asarray(series, dtype=np.float64)
    if points.size == 0:
        raise EmptySeriesError("cannot take statistics of an empty series")
    if points.ndim != 2 or points.shape[1] != N_VARS:
        raise ValueError("series must have shape (K, 4)")
    if not np.isfinite(points).all():
        raise ValueError("series must be finite")
    return AttractorStats(
        mean=tuple(float(v) for v in points.mean(axis=0)),
        mean_abs=tuple(float(v) for v in np.abs(points).mean(axis=0)),
        n_points=len(points),
    )


def attractor_error(pred, ref):
    """Normalized deviations of pred from ref and their root-sum-square.

    delta_i = (<i>_pred - <i>_ref) / <|i|>_ref and
    delta_|i| = (<|i|>_pred - <|i|>_ref) / <|i|>_ref for i in (x, y, z, u).
    """
    ref_abs = np.asarray(ref.mean_abs)
    if np.any(ref_abs <= 0):
        raise ZeroNormalizerError(
            "reference absolute averages must be positive to normalize")
    delta = (np.asarray(pred.mean) - np.asarray(ref.mean)) / ref_abs
    delta_abs = (np.asarray(pred.mean_abs) - ref_abs) / ref_abs
    delta_att = float(np.sqrt(np.sum(delta ** 2) + np.sum(delta_abs ** 2)))
    return AttractorError(
        delta=tuple(float(v) for v in delta),
        delta_abs=tuple(float(v) for v in delta_abs),
        delta_att=delta_att,
    )


def total_error(per_attractor):
    """Root of the sum of squared per-attractor errors."""
    if len(per_attractor) == 0:
        raise ValueError("need at least one attractor error")
    return float(np.sqrt(sum(e.delta_att ** 2 for e in per_attractor)))


def classify(per_attractor, truncated=False):
    """Assign the run outcome from all eight deviations of every attractor.

    Diverged if any |delta| reaches 100 (or the run was truncated by the
    divergence guard); PartialSuccess if every |delta| stays below 2;
    BoundedFailure otherwise.
    """
    per_attractor = tuple(per_attractor)
    all_deltas = np.array([abs(v) for e in per_attractor
                           for v in (*e.delta, *e.delta_abs)])
    if truncated or np.any(all_deltas >= DIVERGED_THRESHOLD):
        outcome = OUTCOME_DIVERGED
    elif np.all(all_deltas < SUCCESS_THRESHOLD):
        outcome = OUTCOME_PARTIAL_SUCCESS
    else:
        outcome = OUTCOME_BOUNDED_FAILURE
    return RunOutcome(outcome=outcome, per_attractor=per_attractor,
                      delta_tot=total_error(per_attractor))
