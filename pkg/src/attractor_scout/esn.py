"""Scikit-learn style estimator wrapping reservoir construction, readout
training and autonomous generation."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .autonomous import run_autonomous
from .lisprott import N_VARS, SampledTrajectory
from .reservoir import ReservoirConfig, build_reservoir
from .training import RidgeConfig, train


class EchoStateNetwork(BaseEstimator):
    """Continuous-time echo state network for attractor reconstruction.

    fit(X) consumes one sampled trajectory (rows are consecutive 4-vector
    samples): the first `washout` samples wash out the reservoir state and
    the rest train a one-step-ahead linear readout. predict(X) warms the
    fitted network up on a 1,000-point ground-truth transient and returns the
    series it then generates in closed loop.

    Defaults are the limit-cycle scenario's meta-parameters; topology_seed fully
    determines the random weights.
    """

    def __init__(self, n_nodes=300, density=0.1, input_gain=0.3,
                 bias_amplitude=1.0, theta=2.5, rk4_dt=0.1,
                 lambda_max_target=0.95, relax_time=300.0, eta=1e-3,
                 washout=1000, topology_seed=0):
        self.n_nodes = n_nodes
        self.density = density
        self.input_gain = input_gain
        self.bias_amplitude = bias_amplitude
        self.theta = theta
        self.rk4_dt = rk4_dt
        self.lambda_max_target = lambda_max_target
        self.relax_time = relax_time
        self.eta = eta
        self.washout = washout
        self.topology_seed = topology_seed

    def _reservoir_config(self):
        return ReservoirConfig(
            n_nodes=self.n_nodes, density=self.density,
            input_gain=self.input_gain, bias_amplitude=self.bias_amplitude,
            theta=self.theta, rk4_dt=self.rk4_dt,
            lambda_max_target=self.lambda_max_target,
            relax_time=self.relax_time, topology_seed=self.topology_seed)

    def _validate_series(self, X):
        if isinstance(X, SampledTrajectory):
            return X
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        if X.shape[1] != N_VARS:
            raise ValueError(f"expected {N_VARS} columns, got {X.shape[1]}")
        return X

    def fit(self, X, y=None):
        """Build the random reservoir and train the readout on X.

        X: (K, 4) trajectory (or SampledTrajectory); the one-step targets are
        derived internally, so y is ignored.
        """
        X = self._validate_series(X)
        n_points = len(X.points) if isinstance(X, SampledTrajectory) else len(X)
        n_train = n_points - self.washout - 1
        if n_train < 1:
            raise ValueError(
                f"series of {n_points} points leaves no training rows after "
                f"washout={self.washout} and the reserve target")
        cfg = self._reservoir_config()
        weights = build_reservoir(cfg)
        self.model_ = train(weights, cfg, X, RidgeConfig(eta=self.eta),
                            washout=self.washout, n_train=n_train)
        self.n_features_in_ = N_VARS
        return self

    def run(self, X, n_steps=10000, attractor_id=None):
        """Full autonomous run from a 1,000-point warmup transient X."""
        check_is_fitted(self, "model_")
        return run_autonomous(self.model_, X, n_steps=n_steps,
                              attractor_id=attractor_id)

    def predict(self, X, n_steps=10000):
        """Generated (n_steps, 4) series after warming up on transient X.

        Truncated early if the closed loop diverges; inspect run(X) for the
        divergence index.
        """
        return self.run(X, n_steps=n_steps).generated

    @property
    def weights_(self):
        check_is_fitted(self, "model_")
        return self.model_.weights

    @property
    def w_out_(self):
        check_is_fitted(self, "model_")
        return self.model_.w_out

    @property
    def relaxed_state_(self):
        check_is_fitted(self, "model_")
        return self.model_.relaxed_state
