import numpy as np
import pytest
import scipy.sparse as sparse

from attractor_scout import SCENARIOS, make_training_series
from attractor_scout.experiment import prepare_shared, scenario_config
from attractor_scout.reservoir import ReservoirConfig, ReservoirWeights, \
    build_reservoir
from attractor_scout.training import RidgeConfig, train


def make_weights(n, w_res=None, w_in=None, bias=None, lam=0.0):
    """Hand-built weights for contract tests (zero matrices by default)."""
    if w_res is None:
        w_res = sparse.csr_matrix((n, n))
    elif not sparse.issparse(w_res):
        w_res = sparse.csr_matrix(np.asarray(w_res, dtype=np.float64))
    if w_in is None:
        w_in = np.zeros((n, 4))
    if bias is None:
        bias = np.zeros(n)
    return ReservoirWeights(w_res=w_res, w_in=np.asarray(w_in, float),
                            bias=np.asarray(bias, float),
                            achieved_lambda_max=lam)


@pytest.fixture(scope="session")
def series_a():
    """The canonical scenario-A noisy training series (seed 0)."""
    return make_training_series(SCENARIOS["A"], seed=0)


@pytest.fixture(scope="session")
def shared_a():
    """Training series plus reference attractors for scenario A."""
    return prepare_shared(scenario_config("A", series_seed=0))


@pytest.fixture(scope="session")
def small_cfg():
    return ReservoirConfig(n_nodes=40, topology_seed=3)


@pytest.fixture(scope="session")
def small_weights(small_cfg):
    return build_reservoir(small_cfg)


@pytest.fixture(scope="session")
def small_model(small_cfg, small_weights, series_a):
    """A cheap 40-node model trained on the real scenario-A series."""
    return train(small_weights, small_cfg, series_a, RidgeConfig(eta=1e-3))


@pytest.fixture(scope="session")
def model_a(series_a):
    """Full-scale scenario-A model (N=300, registry meta-parameters)."""
    cfg = ReservoirConfig(topology_seed=0)
    weights = build_reservoir(cfg)
    return train(weights, cfg, series_a, RidgeConfig(eta=1e-3))
