import numpy as np
import pytest

from attractor_scout.errors import BasinEscapeError, NonFiniteError
from attractor_scout.lisprott import DEFAULT_SIGMA, SCENARIOS, AttractorSite, \
    LiSprottParams, SampledTrajectory, ScenarioSpec, _basin_check, drift, \
    integrate_em, make_reference, make_training_series

P_A = LiSprottParams(a=2.0, b=0.8)


def rk4_oracle(x0, a, b, h, n_steps):
    """Independent fixed-step RK4 on the Li-Sprott drift (test-local)."""
    def f(s):
        x, y, z, u = s
        return np.array([y - x, -x * z + u, x * y - a, -b * y])

    s = np.array(x0, dtype=np.float64)
    for _ in range(n_steps):
        k1 = f(s)
        k2 = f(s + 0.5 * h * k1)
        k3 = f(s + 0.5 * h * k2)
        k4 = f(s + h * k3)
        s = s + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
    return s


def test_drift_direct_substitution():
    np.testing.assert_allclose(drift((0, 0, 0, 0), P_A), [0, 0, -2, 0])
    np.testing.assert_allclose(
        drift((1, 1, 1, 1), LiSprottParams(a=0.0, b=0.0)), [0, 0, 1, 0])
    np.testing.assert_allclose(drift((4, 1, -1, 1), P_A), [-3, 5, 2, -0.8])


def test_params_reject_negative_sigma():
    with pytest.raises(ValueError):
        LiSprottParams(a=2.0, b=0.8, sigma=-0.1)


def test_single_euler_step():
    x0 = np.array([1.0, 1.0, 1.0, 1.0])
    traj = integrate_em(P_A, x0, n_steps=1, h=1e-3)
    np.testing.assert_array_equal(traj.points[0], x0 + 1e-3 * drift(x0, P_A))


def test_noise_free_is_seed_independent():
    a = integrate_em(P_A, (4, 1, -1, 1), n_steps=3000, stride=300, seed=1)
    b = integrate_em(P_A, (4, 1, -1, 1), n_steps=3000, stride=300, seed=99)
    np.testing.assert_array_equal(a.points, b.points)
    assert a.rng_seed is None


def test_noisy_requires_seed():
    noisy = LiSprottParams(a=2.0, b=0.8, sigma=DEFAULT_SIGMA)
    with pytest.raises(ValueError, match="seed"):
        integrate_em(noisy, (4, 1, -1, 1), n_steps=300)


def test_noisy_reproducible_for_fixed_seed():
    noisy = LiSprottParams(a=2.0, b=0.8, sigma=DEFAULT_SIGMA)
    a = integrate_em(noisy, (4, 1, -1, 1), n_steps=3000, stride=300, seed=7)
    b = integrate_em(noisy, (4, 1, -1, 1), n_steps=3000, stride=300, seed=7)
    np.testing.assert_array_equal(a.points, b.points)
    assert a.rng_seed == 7


def test_symmetry_of_noise_free_trajectories():
    # (x, y, z, u) -> (-x, -y, z, -u) maps trajectories onto each other
    flip = np.array([-1.0, -1.0, 1.0, -1.0])
    x0 = np.array([5.0, 1.0, 1.0, 1.0])
    a = integrate_em(P_A, x0, n_steps=20000, stride=100)
    b = integrate_em(P_A, flip * x0, n_steps=20000, stride=100)
    np.testing.assert_array_equal(a.points * flip, b.points)


def test_noise_increment_scaling():
    # increments beyond the drift term have std sigma*sqrt(h) within 5%
    sigma = 0.05
    h = 1e-3
    noisy = LiSprottParams(a=2.0, b=0.8, sigma=sigma)
    traj = integrate_em(noisy, (4, 1, -1, 1), n_steps=120000, h=h, seed=11)
    pts = np.vstack([np.array([4.0, 1.0, -1.0, 1.0]), traj.points])
    increments = np.empty((len(traj.points), 4))
    for k in range(len(traj.points)):
        increments[k] = pts[k + 1] - pts[k] - h * drift(pts[k], noisy)
    measured = increments.std(axis=0)
    np.testing.assert_allclose(measured, sigma * np.sqrt(h), rtol=0.05)


def test_euler_converges_to_rk4_oracle():
    x0 = (4.0, 1.0, -1.0, 1.0)
    oracle = rk4_oracle(x0, 2.0, 0.8, 1e-5, 100000)
    fine = integrate_em(P_A, x0, n_steps=10000, h=1e-4).points[-1]
    assert np.abs(fine - oracle).max() < 1e-3
    # first-order convergence: halving-by-ten the step divides the error by ~10
    coarse = integrate_em(P_A, x0, n_steps=1000, h=1e-3).points[-1]
    ratio = np.abs(coarse - oracle).max() / np.abs(fine - oracle).max()
    assert 7.0 < ratio < 13.0


def test_nonfinite_blowup_raises():
    # an unstable step size blows the trajectory up
    with pytest.raises(NonFiniteError) as info:
        integrate_em(P_A, (10.0, 10.0, 10.0, 10.0), n_steps=2000, h=0.5)
    assert info.value.sample_index is not None


def test_integration_argument_validation():
    with pytest.raises(ValueError):
        integrate_em(P_A, (1, 1, 1, 1), n_steps=10, stride=3)
    with pytest.raises(ValueError):
        integrate_em(P_A, (1, 1, 1, 1), n_steps=10, h=0.0)
    with pytest.raises(ValueError):
        integrate_em(P_A, (1, 1, 1), n_steps=10)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        SampledTrajectory(points=np.empty((0, 4)), sample_interval=0.3,
                          params=P_A, initial_condition=(0, 0, 0, 0))
    with pytest.raises(ValueError):
        SampledTrajectory(points=np.full((3, 4), np.nan), sample_interval=0.3,
                          params=P_A, initial_condition=(0, 0, 0, 0))
    with pytest.raises(ValueError):
        SampledTrajectory(points=np.ones((3, 4)), sample_interval=0.0,
                          params=P_A, initial_condition=(0, 0, 0, 0))


def test_trajectory_times():
    traj = integrate_em(P_A, (4, 1, -1, 1), n_steps=900, stride=300)
    np.testing.assert_allclose(traj.times, [0.3, 0.6, 0.9])


def test_scenario_validation():
    site = AttractorSite("a1", (0.0, 0.0, 0.0, 0.0), "torus")
    with pytest.raises(ValueError):
        ScenarioSpec("x", P_A, stride=0, attractors=(site,),
                     training_attractor_id="a1")
    with pytest.raises(ValueError):
        ScenarioSpec("x", P_A, stride=1, attractors=(site, site),
                     training_attractor_id="a1")
    with pytest.raises(ValueError):
        ScenarioSpec("x", P_A, stride=1, attractors=(site,),
                     training_attractor_id="other")
    with pytest.raises(ValueError):
        AttractorSite("a1", (0.0, 0.0, 0.0, 0.0), "strange")


def test_scenario_registry():
    a = SCENARIOS["A"]
    assert (a.params.a, a.params.b, a.stride) == (2.0, 0.8, 300)
    assert a.sample_interval() == pytest.approx(0.3)
    assert a.training_attractor_id == "limit_cycle_plus"
    b = SCENARIOS["B"]
    assert (b.params.a, b.params.b, b.stride) == (6.0, 0.1, 200)
    assert b.sample_interval() == pytest.approx(0.2)
    assert b.training_attractor.label == "chaos_plus"
    for scenario in (a, b):
        assert scenario.params.sigma == pytest.approx(DEFAULT_SIGMA)


def test_training_series_lengths(series_a):
    assert len(series_a) == 11000
    assert series_a.sample_interval == pytest.approx(0.3)
    assert series_a.rng_seed == 0


def test_training_series_noise_free_determinism():
    from dataclasses import replace
    spec = SCENARIOS["A"]
    clean = replace(spec, params=replace(spec.params, sigma=0.0))
    s1 = make_training_series(clean, seed=1, n_points=1500, basin_check=False)
    s2 = make_training_series(clean, seed=2, n_points=1500, basin_check=False)
    np.testing.assert_array_equal(s1.points, s2.points)


def test_make_reference_lengths(shared_a):
    transient = shared_a.transients["torus"]
    reference = shared_a.references["torus"]
    assert len(transient) == 1000
    assert len(reference) == 10000
    assert transient.params.sigma == 0.0
    assert reference.params.sigma == 0.0


def test_symmetric_chaotic_references():
    spec = SCENARIOS["B"]
    _, plus = make_reference(spec, "chaos_plus")
    _, minus = make_reference(spec, "chaos_minus")
    flip = np.array([-1.0, -1.0, 1.0, -1.0])
    np.testing.assert_array_equal(plus.points * flip, minus.points)


def test_limit_cycle_reference_mean_stability():
    # periodic averaging: means stable within 1% against a 2x longer run
    # (plain means judged on the scale of the absolute means)
    spec = SCENARIOS["A"]
    _, ref = make_reference(spec, "limit_cycle_plus")
    _, ref2 = make_reference(spec, "limit_cycle_plus", n_points=20000)
    abs1 = np.abs(ref.points).mean(axis=0)
    abs2 = np.abs(ref2.points).mean(axis=0)
    np.testing.assert_allclose(abs1, abs2, rtol=0.01)
    m1 = ref.points.mean(axis=0)
    m2 = ref2.points.mean(axis=0)
    assert np.all(np.abs(m1 - m2) < 0.01 * abs1)


def test_basin_check_rejects_sign_flip():
    spec = SCENARIOS["B"]
    _, ref = make_reference(spec, "chaos_plus", transient_len=10,
                            n_points=200, discard=100)
    pts = np.tile([0.1, 0.1, 0.1, 3.0], (2000, 1))
    pts[1000:, 3] = -3.0
    series = SampledTrajectory(points=pts, sample_interval=0.2,
                               params=spec.params,
                               initial_condition=(0, -4, 0, 5))
    with pytest.raises(BasinEscapeError):
        _basin_check(series, ref, "chaos_plus")
    series_ok = SampledTrajectory(points=np.abs(pts), sample_interval=0.2,
                                  params=spec.params,
                                  initial_condition=(0, -4, 0, 5))
    _basin_check(series_ok, ref, "chaos_plus")


def test_basin_check_rejects_envelope_escape(shared_a):
    ref = shared_a.references["limit_cycle_plus"]
    limit = 2.0 * np.abs(ref.points[:, 3]).max()
    pts = np.tile([0.1, 0.1, 0.1, 1.1 * limit], (100, 1))
    series = SampledTrajectory(points=pts, sample_interval=0.3,
                               params=SCENARIOS["A"].params,
                               initial_condition=(5, 1, 1, 1))
    with pytest.raises(BasinEscapeError):
        _basin_check(series, ref, "limit_cycle_plus")


def test_training_series_passes_basin_check():
    # the default series seeds stay within their basins for both scenarios
    make_training_series(SCENARIOS["A"], seed=0)
    make_training_series(SCENARIOS["B"], seed=0)
