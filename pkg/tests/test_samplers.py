import numpy as np
import pytest

from pcs.errors import DivergenceError, InvalidArgumentError
from pcs.measurement import MeasurementRecord
from pcs.numeric import RngStream
from pcs.posterior import exact_posterior
from pcs.priors import BallMixturePrior, GaussianMixturePrior, LinearGenerativePrior
from pcs.samplers import (AnnealSchedule, LangevinSampler, MapConfig, MapSampler, annealed_map, langevin_x, langevin_z,
                          map_estimate, select_by_holdout, select_map_by_likelihood)
from pcs.transport import wasserstein_p


def test_anneal_schedule():
    sched = AnnealSchedule(sigma_start=16.0, sigma_end=1.0, num_levels=5, steps_per_level=10, base_step=0.01)
    np.testing.assert_allclose(sched.sigmas(), [16, 8, 4, 2, 1])
    np.testing.assert_allclose(sched.step_sizes(), 0.01 * np.array([256, 64, 16, 4, 1]))
    assert sched.sigmas()[-1] == 1.0
    # prior smoothing shrinks with the ladder and is off at the last level
    np.testing.assert_allclose(sched.smoothing_scales(), np.sqrt([255, 63, 15, 3, 0]))
    assert sched.smoothing_scales()[-1] == 0.0
    assert np.all(AnnealSchedule(16.0, 1.0, num_levels=5, kappa=0.0).smoothing_scales() == 0.0)

    single = AnnealSchedule(1.0, 0.5, num_levels=1)
    np.testing.assert_array_equal(single.sigmas(), [0.5])
    with pytest.raises(InvalidArgumentError):
        single.step_sizes()

    default = AnnealSchedule.for_noise(0.1)
    assert default.sigma_start == pytest.approx(0.4) and default.sigma_end == 0.1
    from_opt = AnnealSchedule.from_dict({'num_levels': 3, 'sigma_floor': 0.2}, sigma=0.5)
    assert from_opt.num_levels == 3 and from_opt.sigma_end == 0.5
    assert AnnealSchedule.from_dict(from_opt.to_dict()) == from_opt

    with pytest.raises(InvalidArgumentError):
        AnnealSchedule(0.5, 1.0)
    with pytest.raises(InvalidArgumentError):
        AnnealSchedule(1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        AnnealSchedule(1.0, 0.5, num_levels=0)


def conjugate_cases():
    scalar = GaussianMixturePrior([1.0], [[0.0]], [[[1.0]]])
    bimodal = GaussianMixturePrior.isotropic([0.5, 0.5], [[-1.0], [1.0]], [0.5, 0.5])
    return [
        (scalar, MeasurementRecord([[1.0]], [2.0], 1.0)),
        (bimodal, MeasurementRecord([[1.0]], [0.5], 1.0)),
    ]


def test_langevin_fidelity():
    for index, (prior, rec) in enumerate(conjugate_cases()):
        exact = exact_posterior(prior, rec).sample(RngStream(100 + index), 2000)
        # shipped defaults (kappa = 1) and likelihood-only annealing both end on the posterior
        for kappa in (1.0, 0.0):
            sched = AnnealSchedule.for_noise(rec.sigma, kappa=kappa)
            chains = langevin_x(prior, rec, sched, RngStream(index), num_chains=2000)
            assert chains.shape == exact.shape
            assert wasserstein_p(chains, exact, p=1) <= 0.1

    # scalar case: posterior N(1, 1/2)
    prior, rec = conjugate_cases()[0]
    chains = langevin_x(prior, rec, AnnealSchedule.for_noise(rec.sigma), RngStream(7), num_chains=2000)
    assert abs(chains.mean() - 1.0) < 0.05
    assert abs(chains.var() - 0.5) < 0.1


def z_space_case():
    gen = LinearGenerativePrior.from_singular_values([1.0, 0.5, 0.25])
    rec = MeasurementRecord([[1.0, 1.0, 0.0], [0.0, 1.0, -1.0]], [0.5, -0.2], 0.3)
    return gen, rec


def test_langevin_z():
    gen, rec = z_space_case()
    sched = AnnealSchedule.for_noise(rec.sigma)
    x, z = langevin_z(gen, rec, sched, RngStream(0), num_chains=2000, return_latent=True)
    assert x.shape == (2000, 3) and z.shape == (2000, 3)
    np.testing.assert_allclose(x, gen.generate(z), atol=1e-12)
    exact = exact_posterior(gen, rec)
    np.testing.assert_allclose(x.mean(axis=0), exact.mean(), atol=0.05)
    np.testing.assert_allclose(np.cov(x, rowvar=False), exact.covariance(), atol=0.05)

    with pytest.raises(InvalidArgumentError):
        LangevinSampler(GaussianMixturePrior([1.0], [[0.0]], [[[1.0]]]), MeasurementRecord([[1.0]], [0.0], 1.0),
                        sched, space='z')
    with pytest.raises(InvalidArgumentError):
        LangevinSampler(BallMixturePrior([1.0], [[0.0]], 1.0), MeasurementRecord([[1.0]], [0.0], 1.0), sched)


def test_typicality_contrast():
    gen, rec = z_space_case()
    # closed-form latent posterior N(M^-1 B^T y m / sigma^2, M^-1), M = (m / sigma^2) B^T B + I
    B = rec.A @ gen.matrix
    precision = rec.m / rec.sigma**2
    cov = np.linalg.inv(precision * B.T @ B + np.eye(gen.seed_dim))
    mean = cov @ B.T @ rec.y * precision
    expected = (mean @ mean + np.trace(cov)) / gen.seed_dim

    _, z = langevin_z(gen, rec, AnnealSchedule.for_noise(rec.sigma), RngStream(1), num_chains=2000,
                      return_latent=True)
    langevin_stat = np.mean(np.sum(z**2, axis=1)) / gen.seed_dim
    assert 0.5 * expected <= langevin_stat <= 1.5 * expected

    result = map_estimate(gen, rec, MapConfig(gamma=1.0), RngStream(2), return_result=True)
    map_stat = float(result.latent @ result.latent) / gen.seed_dim
    assert map_stat < langevin_stat


def test_sampler_determinism():
    prior, rec = conjugate_cases()[1]
    sched = AnnealSchedule.for_noise(rec.sigma, num_levels=3, steps_per_level=50)
    np.testing.assert_array_equal(
        langevin_x(prior, rec, sched, RngStream(3), num_chains=10), langevin_x(prior, rec, sched, RngStream(3),
                                                                               num_chains=10))
    gen, z_rec = z_space_case()
    np.testing.assert_array_equal(
        langevin_z(gen, z_rec, sched, RngStream(4), num_chains=10), langevin_z(gen, z_rec, sched, RngStream(4),
                                                                               num_chains=10))
    cfg = MapConfig(iterations=50)
    np.testing.assert_array_equal(map_estimate(prior, rec, cfg, RngStream(5)), map_estimate(prior, rec, cfg,
                                                                                            RngStream(5)))


def test_divergence_guard():
    prior, rec = conjugate_cases()[0]
    # a step far above 2 / curvature makes every iterate overshoot
    sched = AnnealSchedule(1.0, 1.0, num_levels=1, steps_per_level=50, base_step=10.0)
    with pytest.raises(DivergenceError):
        langevin_x(prior, rec, sched, RngStream(0))
    with pytest.raises(DivergenceError):
        map_estimate(prior, rec, MapConfig(step_size=10.0, halving=False, iterations=500), RngStream(0))


def test_annealed_map():
    prior, rec = conjugate_cases()[0]
    sched = AnnealSchedule.for_noise(rec.sigma, kappa=0.0)
    x = annealed_map(prior, rec, sched, RngStream(0))
    # the posterior mode of the scalar case is 1
    assert abs(x[0] - 1.0) < 1e-2
    sampler = LangevinSampler(prior, rec, sched)
    assert sampler.base_step() == pytest.approx(0.05 / 2.0)


def test_map_config():
    cfg = MapConfig.from_dict({'gamma': 0.1, 'restarts': 4})
    assert cfg.gamma == 0.1 and cfg.restarts == 4 and cfg.optimizer == 'gd'
    assert MapConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidArgumentError):
        MapConfig(gamma=-1.0)
    with pytest.raises(InvalidArgumentError):
        MapConfig(optimizer='lbfgs')
    with pytest.raises(InvalidArgumentError):
        MapConfig(iterations=0)


def test_map_gaussian():
    prior, rec = conjugate_cases()[0]
    for optimizer in ('gd', 'adam'):
        result = map_estimate(prior, rec, MapConfig(optimizer=optimizer, iterations=800), RngStream(1),
                              return_result=True)
        assert abs(result.x[0] - 1.0) < (1e-3 if optimizer == 'gd' else 1e-2)
        # gd never increases the objective
        if optimizer == 'gd':
            assert np.all(np.diff(result.trace) <= 1e-12)

    # ------------------ modified objective in z-space ---------------- #
    gen = LinearGenerativePrior.from_singular_values([2.0])
    rec = MeasurementRecord([[1.0]], [2.0], 0.5)
    result = map_estimate(gen, rec, MapConfig(gamma=1.0), RngStream(2), return_result=True)
    # minimise (2 - 2 z)^2 + z^2 / 2 -> z = 8 / 9
    assert abs(result.latent[0] - 8 / 9) < 1e-4
    assert abs(result.x[0] - 16 / 9) < 1e-4

    # ------------------ sigma = 0 and no gamma fits the data only ---------------- #
    sampler = MapSampler(prior, MeasurementRecord([[1.0]], [2.0], 0.0), MapConfig())
    assert (sampler.data_weight, sampler.prior_weight) == (1.0, 0.0)
    assert abs(sampler.run(RngStream(3)).x[0] - 2.0) < 1e-6


def test_select_map_by_likelihood():
    prior, rec = conjugate_cases()[1]
    cfg = MapConfig(iterations=50, halving=False)
    best = select_map_by_likelihood(prior, rec, cfg, [0.01, 0.1, 0.5], RngStream(4))
    runs = [map_estimate(prior, rec, MapConfig(iterations=50, halving=False, step_size=s), RngStream(4), True)
            for s in (0.01, 0.1, 0.5)]
    assert best.objective == min(r.objective for r in runs)
    assert best.step_size in (0.01, 0.1, 0.5)
    assert best.step_size == min(runs, key=lambda r: r.objective).step_size
    with pytest.raises(InvalidArgumentError):
        select_map_by_likelihood(prior, rec, cfg, [], RngStream(4))


def test_map_spike_and_slab():
    dim = 4
    prior = GaussianMixturePrior.isotropic([0.01, 0.99], np.zeros((2, dim)), [1e-6, 1.0])
    x_star = prior.sample(RngStream(0))
    rec = MeasurementRecord(np.ones((1, dim)) / 2, [0.5 * x_star.sum() + 30.0], 1e3)

    # MAP is drawn to the spike from every start
    cfg = MapConfig(restarts=1, iterations=300)
    for restart in range(50):
        x_map = map_estimate(prior, rec, cfg, RngStream(1000 + restart))
        assert np.linalg.norm(x_map) < 0.01

    # posterior samples are typical: almost all of them come from the broad component
    draws = exact_posterior(prior, rec).sample(RngStream(1), 2000)
    assert np.mean(np.linalg.norm(draws, axis=1) > 0.01) >= 0.95


def test_select_by_holdout():
    # scalar N(0, 1) seen at noise 1: (y - x)^2 + gamma x^2 / 2 is minimised by y / (1 + gamma / 2),
    # the posterior mean y / 2 at gamma = 2
    prior = GaussianMixturePrior([1.0], [[0.0]], [[[1.0]]])
    rec = MeasurementRecord([[1.0]], [0.0], 1.0)
    cfg = MapConfig(gamma=0.0, iterations=60)
    best, error = select_by_holdout(prior, rec, cfg, RngStream(11), gammas=[0.0, 2.0, 20.0], holdout=200)
    assert best.gamma == 2.0 and best.step_size == cfg.step_size
    assert best.iterations == 60
    assert 0.0 < error < 1.0

    # the same stream replays the same choice
    again, again_error = select_by_holdout(prior, rec, cfg, RngStream(11), gammas=[0.0, 2.0, 20.0], holdout=200)
    assert again == best and again_error == error

    with pytest.raises(InvalidArgumentError):
        select_by_holdout(prior, rec, cfg, RngStream(0), gammas=[])
    with pytest.raises(InvalidArgumentError):
        select_by_holdout(prior, rec, cfg, RngStream(0), step_sizes=[])
    with pytest.raises(InvalidArgumentError):
        select_by_holdout(prior, rec, cfg, RngStream(0), holdout=0)
