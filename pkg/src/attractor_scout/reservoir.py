"""Random continuous-time reservoir construction and RK4 simulation.

The reservoir is N tanh nodes evolving as

    X' = -X + tanh(W_res X + G W_in u(t) + B)

with u held piecewise constant for theta time units per input sample and the
state recorded at the last integration point of each interval. W_res, W_in
and B are random but fixed, fully determined by a topology seed (PCG64; draw
order: W_res mask, W_res values, W_in columns, W_in values, bias).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as splinalg

from . import _kernels
from .errors import DegenerateSpectrumError
from .lisprott import N_VARS

# raw spectra with max real part at or below this are resampled
_SPECTRUM_FLOOR = 1e-6
_MAX_RESAMPLES = 8

# dense eigensolver is used up to this size, ARPACK above it
_DENSE_EIG_LIMIT = 400


@dataclass(frozen=True)
class ReservoirConfig:
    """Reservoir meta-parameters.

    Defaults are the limit-cycle-scenario operating point; the chaotic
    scenario uses input_gain=0.01, bias_amplitude=3.0, lambda_max_target=0.99.
    """

    n_nodes: int = 300
    density: float = 0.1
    input_gain: float = 0.3
    bias_amplitude: float = 1.0
    theta: float = 2.5
    rk4_dt: float = 0.1
    lambda_max_target: float = 0.95
    relax_time: float = 300.0
    topology_seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")
        if not 0 < self.density <= 1:
            raise ValueError("density must be in (0, 1]")
        if self.lambda_max_target <= 0:
            raise ValueError("lambda_max_target must be > 0")
        if self.rk4_dt <= 0 or self.theta <= 0:
            raise ValueError("theta and rk4_dt must be > 0")
        if self.relax_time < 0:
            raise ValueError("relax_time must be >= 0")
        for name in ("theta", "relax_time"):
            value = getattr(self, name)
            steps = round(value / self.rk4_dt)
            if abs(steps * self.rk4_dt - value) > 1e-9 * max(1.0, value):
                raise ValueError(
                    f"{name}={value} is not an integer multiple of "
                    f"rk4_dt={self.rk4_dt}")

    @property
    def steps_per_input(self):
        return round(self.theta / self.rk4_dt)

    @property
    def relax_steps(self):
        return round(self.relax_time / self.rk4_dt)


@dataclass(eq=False)
class ReservoirWeights:
    """The fixed random triple (W_res, W_in, B) plus the realized spectrum.

    w_res is CSR with max real eigenvalue part equal to achieved_lambda_max;
    each w_in row has exactly one nonzero in [-1, 1]; bias entries lie in
    [-bias_amplitude, bias_amplitude].
    """

    w_res: sparse.csr_matrix
    w_in: np.ndarray
    bias: np.ndarray
    achieved_lambda_max: float

    @property
    def n_nodes(self):
        return self.w_res.shape[0]


@dataclass(eq=False)
class ReservoirState:
    """Node values and the current simulation time."""

    x: np.ndarray
    t: float = 0.0

    def copy(self):
        return ReservoirState(x=self.x.copy(), t=self.t)


def largest_real_eigenpart(matrix, tol=1e-8):
    """Largest real part among the eigenvalues of a (sparse) square matrix.

    Dense QR eigensolver up to 400 nodes (deterministic), ARPACK with a fixed
    starting vector above that, falling back to dense on non-convergence.
    """
    n = matrix.shape[0]
    issparse = sparse.issparse(matrix)
    if n <= _DENSE_EIG_LIMIT:
        dense = matrix.toarray() if issparse else np.asarray(matrix)
        return float(np.linalg.eigvals(dense).real.max())
    mat = matrix if issparse else sparse.csr_matrix(matrix)
    try:
        vals = splinalg.eigs(mat, k=1, which="LR", tol=tol,
                             v0=np.ones(n), return_eigenvectors=False)
        return float(vals.real.max())
    except splinalg.ArpackNoConvergence:
        return float(np.linalg.eigvals(mat.toarray()).real.max())


def build_reservoir(cfg):
    """Draw the random weights for cfg and rescale the spectrum.

    W_res entries are independently nonzero with probability cfg.density,
    values uniform in [-1, 1]; the whole matrix is then scaled so its largest
    real eigenvalue part equals cfg.lambda_max_target. Raw draws whose
    largest real part is <= 1e-6 are redrawn (at most 8 times).
    """
    n = cfg.n_nodes
    rng = np.random.default_rng(cfg.topology_seed)
    raw = None
    for _ in range(_MAX_RESAMPLES):
        mask = rng.random((n, n)) < cfg.density
        values = rng.uniform(-1.0, 1.0, (n, n))
        candidate = np.where(mask, values, 0.0)
        lam_raw = largest_real_eigenpart(candidate)
        if lam_raw > _SPECTRUM_FLOOR:
            raw = candidate
            break
    if raw is None:
        raise DegenerateSpectrumError(
            f"no draw with max Re(eig) > {_SPECTRUM_FLOOR} in "
            f"{_MAX_RESAMPLES} attempts (n_nodes={n}, density={cfg.density})")
    w_res = sparse.csr_matrix(raw * (cfg.lambda_max_target / lam_raw))

    w_in = np.zeros((n, N_VARS))
    cols = rng.integers(0, N_VARS, n)
    vals = rng.uniform(-1.0, 1.0, n)
    w_in[np.arange(n), cols] = vals

    bias = rng.uniform(-cfg.bias_amplitude, cfg.bias_amplitude, n)

    achieved = largest_real_eigenpart(w_res)
    return ReservoirWeights(w_res=w_res, w_in=w_in, bias=bias,
                            achieved_lambda_max=achieved)


def _csr_parts(weights):
    w = weights.w_res
    return w.data, w.indices, w.indptr


def rk4_step(state, weights, input_held, input_gain, dt):
    """One classical RK4 step with the input held constant."""
    u = np.asarray(input_held, dtype=np.float64)
    c = input_gain * (weights.w_in @ u) + weights.bias
    x = state.x.copy()
    out = np.empty((1, x.shape[0]))
    data, indices, indptr = _csr_parts(weights)
    _kernels.drive_chunk(data, indices, indptr, c[None, :], x, dt, 1, out)
    return ReservoirState(x=x, t=state.t + dt)


def relax(weights, cfg, start=None):
    """Input-free evolution for cfg.relax_time, from zero unless start given.

    The resulting state is what autonomous runs are later reset to.
    """
    n = weights.n_nodes
    x = np.zeros(n) if start is None else np.array(start, dtype=np.float64)
    if cfg.relax_steps == 0:
        return ReservoirState(x=x, t=0.0)
    out = np.empty((1, n))
    data, indices, indptr = _csr_parts(weights)
    _kernels.drive_chunk(data, indices, indptr, weights.bias[None, :], x,
                         cfg.rk4_dt, cfg.relax_steps, out)
    return ReservoirState(x=x, t=cfg.relax_time)


def drive(weights, state, inputs, cfg):
    """Drive the reservoir with a sequence of piecewise-constant inputs.

    Each input is held for cfg.theta and the state at the end of its interval
    is recorded. Returns (final_state, recorded) with recorded of shape
    (len(inputs), n_nodes); the final state equals the last recorded row.
    """
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != N_VARS:
        raise ValueError("inputs must have shape (K, 4)")
    if len(inputs) == 0:
        raise ValueError("inputs must be nonempty")
    if not np.isfinite(inputs).all():
        raise ValueError("inputs must be finite")
    c_all = inputs @ (cfg.input_gain * weights.w_in).T + weights.bias
    x = state.x.copy()
    recorded = np.empty((len(inputs), weights.n_nodes))
    data, indices, indptr = _csr_parts(weights)
    _kernels.drive_chunk(data, indices, indptr, c_all, x, cfg.rk4_dt,
                         cfg.steps_per_input, recorded)
    final = ReservoirState(x=recorded[-1].copy(),
                           t=state.t + len(inputs) * cfg.theta)
    return final, recorded
