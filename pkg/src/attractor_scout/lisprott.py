"""The 4-dimensional Li-Sprott extension of the Lorenz system.

Ground-truth trajectories are produced by Euler-Maruyama integration of

    x' = y - x      + sigma*xi_x
    y' = -x*z + u   + sigma*xi_y
    z' = x*y - a    + sigma*xi_z
    u' = -b*y       + sigma*xi_u

with independent standard Gaussian noise terms xi. Randomness comes from
numpy's PCG64 generator (``numpy.random.default_rng(seed)``) with Gaussians
drawn by ``standard_normal`` (ziggurat transform); sequences are reproducible
for a fixed seed within this implementation.
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from . import _kernels
from .errors import BasinEscapeError, NonFiniteError

N_VARS = 4
DEFAULT_H = 1e-3

# |component| beyond this (or any NaN) counts as integration blow-up
NONFINITE_LIMIT = 1e12

# Per-step noise increment std is sigma*sqrt(h) = 0.2*h at the default h,
# i.e. sigma = 0.2*sqrt(h) ~= 6.3e-3.
DEFAULT_SIGMA = 0.2 * math.sqrt(DEFAULT_H)

ATTRACTOR_LABELS = (
    "limit_cycle_plus",
    "limit_cycle_minus",
    "torus",
    "chaos_plus",
    "chaos_minus",
)


@dataclass(frozen=True)
class LiSprottParams:
    """System parameters a, b and the noise strength sigma (0 = deterministic)."""

    a: float
    b: float
    sigma: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class AttractorSite:
    """One attractor of a scenario: id, starting point and qualitative label."""

    attractor_id: str
    initial_condition: tuple
    label: str

    def __post_init__(self):
        if self.label not in ATTRACTOR_LABELS:
            raise ValueError(f"unknown attractor label {self.label!r}")
        if len(self.initial_condition) != N_VARS:
            raise ValueError("initial_condition must have 4 components")


@dataclass(frozen=True)
class ScenarioSpec:
    """A parameter regime with its known attractors and the training target."""

    name: str
    params: LiSprottParams
    stride: int
    attractors: tuple
    training_attractor_id: str

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        ids = [a.attractor_id for a in self.attractors]
        if len(set(ids)) != len(ids):
            raise ValueError("attractor ids must be unique")
        if self.training_attractor_id not in ids:
            raise ValueError(
                f"training attractor {self.training_attractor_id!r} not in scenario")

    def attractor(self, attractor_id):
        for a in self.attractors:
            if a.attractor_id == attractor_id:
                return a
        raise KeyError(attractor_id)

    @property
    def training_attractor(self):
        return self.attractor(self.training_attractor_id)

    def sample_interval(self, h=DEFAULT_H):
        return self.stride * h


@dataclass
class SampledTrajectory:
    """Uniformly sampled trajectory with provenance.

    points[k] is the state after (k+1)*stride integration steps; the initial
    condition itself is not included. rng_seed is None for noise-free runs.
    """

    points: np.ndarray
    sample_interval: float
    params: LiSprottParams
    initial_condition: tuple
    rng_seed: int | None = None
    stride: int = 1
    h: float = DEFAULT_H

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != N_VARS:
            raise ValueError("points must have shape (K, 4)")
        if len(self.points) == 0:
            raise ValueError("points must be nonempty")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be > 0")
        if not np.isfinite(self.points).all():
            raise ValueError("points must be finite")

    def __len__(self):
        return len(self.points)

    @property
    def times(self):
        """Simulation time of each sample (initial condition sits at t=0)."""
        return self.sample_interval * np.arange(1, len(self.points) + 1)

    def meta(self):
        """Provenance record used in sidecar files and model metadata."""
        return {
            "a": self.params.a,
            "b": self.params.b,
            "sigma": self.params.sigma,
            "h": self.h,
            "stride": self.stride,
            "sample_interval": self.sample_interval,
            "initial_condition": list(map(float, self.initial_condition)),
            "rng_seed": self.rng_seed,
            "n_points": int(len(self.points)),
        }


def drift(state, params):
    """Deterministic part of the flow, (y-x, -xz+u, xy-a, -by)."""
    x, y, z, u = np.asarray(state, dtype=np.float64)
    return np.array([y - x, -x * z + u, x * y - params.a, -params.b * y])


def _check_sample(s, k):
    if not np.isfinite(s).all() or np.abs(s).max() > NONFINITE_LIMIT:
        raise NonFiniteError(
            f"state left the finite range at sample {k}", sample_index=k)


def integrate_em(params, x0, n_steps, h=DEFAULT_H, stride=1, seed=None):
    """Integrate n_steps Euler-Maruyama steps, emitting every stride-th state.

    With sigma = 0 the run is deterministic and seed-independent. For
    sigma > 0 a seed is required; the per-step increment beyond the drift is
    sigma*sqrt(h) times a standard Gaussian.
    """
    if h <= 0:
        raise ValueError("h must be > 0")
    if n_steps <= 0 or n_steps % stride != 0:
        raise ValueError("n_steps must be a positive multiple of stride")
    noisy = params.sigma > 0
    if noisy and seed is None:
        raise ValueError("a seed is required when sigma > 0")
    rng = np.random.default_rng(seed) if noisy else None
    scale = params.sigma * math.sqrt(h)
    n_samples = n_steps // stride
    s = np.array(x0, dtype=np.float64)
    if s.shape != (N_VARS,):
        raise ValueError("x0 must have 4 components")
    points = np.empty((n_samples, N_VARS))
    for k in range(n_samples):
        if noisy:
            noise = rng.standard_normal((stride, N_VARS))
            _kernels.em_chunk(s, params.a, params.b, h, noise, scale)
        else:
            _kernels.euler_chunk(s, params.a, params.b, h, stride)
        _check_sample(s, k)
        points[k] = s
    return SampledTrajectory(
        points=points,
        sample_interval=stride * h,
        params=params,
        initial_condition=tuple(np.asarray(x0, dtype=np.float64)),
        rng_seed=seed if noisy else None,
        stride=stride,
        h=h,
    )


def make_reference(spec, attractor_id, transient_len=1000, n_points=10000,
                   discard=10000, h=DEFAULT_H):
    """Noise-free transient and attractor sample for one attractor.

    Returns (transient, reference): the first transient_len sampled points
    from the attractor's initial condition, and n_points further samples
    taken after discarding discard samples so the statistics reflect the
    attractor itself rather than the approach to it.
    """
    site = spec.attractor(attractor_id)
    clean = replace(spec.params, sigma=0.0)
    total = transient_len + discard + n_points
    run = integrate_em(clean, site.initial_condition,
                       n_steps=total * spec.stride, h=h, stride=spec.stride)
    transient = SampledTrajectory(
        points=run.points[:transient_len].copy(),
        sample_interval=run.sample_interval,
        params=clean,
        initial_condition=site.initial_condition,
        stride=spec.stride,
        h=h,
    )
    reference = SampledTrajectory(
        points=run.points[transient_len + discard:].copy(),
        sample_interval=run.sample_interval,
        params=clean,
        initial_condition=site.initial_condition,
        stride=spec.stride,
        h=h,
    )
    return transient, reference


def _basin_check(series, reference, label):
    """Automated attractor-hopping check on the training series.

    Chaotic training attractors: the u-average over each consecutive
    1000-point window must keep the sign of the reference u-average.
    Periodic/quasiperiodic ones: max |u| must stay within twice the
    reference's max |u|.
    """
    u = series.points[:, 3]
    if label.startswith("chaos"):
        ref_sign = np.sign(reference.points[:, 3].mean())
        n_windows = len(u) // 1000
        for w in range(n_windows):
            window = u[w * 1000:(w + 1) * 1000]
            if np.sign(window.mean()) != ref_sign:
                raise BasinEscapeError(
                    f"u-average changed sign in window {w}; "
                    "training trajectory left its basin")
    else:
        limit = 2.0 * np.abs(reference.points[:, 3]).max()
        if np.abs(u).max() > limit:
            raise BasinEscapeError(
                f"max |u| {np.abs(u).max():.3g} exceeds 2x the reference "
                f"envelope {limit:.3g}")


def make_training_series(spec, seed, n_points=11000, h=DEFAULT_H,
                         basin_check=True):
    """The canonical noisy training series: n_points samples from the
    training attractor's initial condition at the scenario's stride.

    Raises BasinEscapeError if the automated basin check fails; regenerate
    with a different seed in that case.
    """
    site = spec.training_attractor
    series = integrate_em(spec.params, site.initial_condition,
                          n_steps=n_points * spec.stride, h=h,
                          stride=spec.stride, seed=seed)
    if basin_check:
        _, reference = make_reference(spec, site.attractor_id, h=h)
        _basin_check(series, reference, site.label)
    return series


def _scenario_a():
    # limit-cycle starts read as (+-5, +-1, 1, +-1); torus from (4, 1, -1, 1)
    return ScenarioSpec(
        name="A",
        params=LiSprottParams(a=2.0, b=0.8, sigma=DEFAULT_SIGMA),
        stride=300,
        attractors=(
            AttractorSite("limit_cycle_plus", (5.0, 1.0, 1.0, 1.0),
                          "limit_cycle_plus"),
            AttractorSite("limit_cycle_minus", (-5.0, -1.0, 1.0, -1.0),
                          "limit_cycle_minus"),
            AttractorSite("torus", (4.0, 1.0, -1.0, 1.0), "torus"),
        ),
        training_attractor_id="limit_cycle_plus",
    )


def _scenario_b():
    # chaotic regions from (0, -+4, 0, +-5); training on the positive-u one
    return ScenarioSpec(
        name="B",
        params=LiSprottParams(a=6.0, b=0.1, sigma=DEFAULT_SIGMA),
        stride=200,
        attractors=(
            AttractorSite("chaos_plus", (0.0, -4.0, 0.0, 5.0), "chaos_plus"),
            AttractorSite("chaos_minus", (0.0, 4.0, 0.0, -5.0), "chaos_minus"),
            AttractorSite("torus", (1.0, -1.0, 1.0, -1.0), "torus"),
        ),
        training_attractor_id="chaos_plus",
    )


SCENARIOS = {"A": _scenario_a(), "B": _scenario_b()}
