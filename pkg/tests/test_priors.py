import numpy as np
import pytest
import torch
import yaml
from scipy.stats import multivariate_normal

from pcs.errors import InvalidArgumentError, UnsupportedConfigurationError
from pcs.numeric import RngStream
from pcs.priors import (PRIOR_REGISTRY, PRIOR_TYPES, BallMixturePrior, DiscreteAtomsPrior, GaussianMixturePrior,
                        LinearGenerativePrior, build_prior, log_density, prior_from_json, prior_to_json, shift_prior,
                        smoothed_score, support_radius)


def load_specs():
    with open('tests/data/priors.yml', mode='r') as f:
        return yaml.load(f, Loader=yaml.FullLoader)


def test_registry():
    assert set(PRIOR_TYPES) == {'gaussian_mixture', 'ball_mixture', 'linear_generative', 'discrete_atoms'}
    assert set(PRIOR_REGISTRY.keys()) == {
        'GaussianMixturePrior', 'BallMixturePrior', 'LinearGenerativePrior', 'DiscreteAtomsPrior'
    }
    specs = load_specs()
    for name, spec in specs.items():
        prior = build_prior(spec)
        assert prior.tag == spec['type']
        # json round trip keeps the prior
        assert prior_from_json(prior_to_json(prior)) == prior
        # equal priors hash equal
        assert hash(build_prior(spec)) == hash(prior)
        assert len({prior, build_prior(spec)}) == 1
    with pytest.raises(InvalidArgumentError):
        build_prior({'type': 'glow'})
    with pytest.raises(InvalidArgumentError):
        build_prior([1, 2])


def test_invalid_weights():
    with pytest.raises(InvalidArgumentError):
        GaussianMixturePrior([0.5, 0.6], [[0.0], [1.0]], [[[1.0]], [[1.0]]])
    with pytest.raises(InvalidArgumentError):
        GaussianMixturePrior([1.2, -0.2], [[0.0], [1.0]], [[[1.0]], [[1.0]]])
    with pytest.raises(InvalidArgumentError):
        BallMixturePrior([1.0], [[0.0, 0.0]], [0.0])
    with pytest.raises(InvalidArgumentError):
        DiscreteAtomsPrior([[0.0, 1.0], [0.0, 1.0]])


def test_gaussian_mixture():
    prior = build_prior(load_specs()['gaussian_mixture'])
    assert prior.dim == 2 and prior.num_components == 2

    # ------------------ log density against scipy ---------------- #
    x = np.array([[0.3, -0.2], [-1.5, 1.0], [4.0, 4.0]])
    expected = np.log(0.3 * multivariate_normal(prior.means[0], prior.covariances[0]).pdf(x) +
                      0.7 * multivariate_normal(prior.means[1], prior.covariances[1]).pdf(x))
    np.testing.assert_allclose(prior.log_density(x), expected, rtol=1e-10)
    assert isinstance(prior.log_density(x[0]), float)
    s = 0.5
    smoothed = np.log(0.3 * multivariate_normal(prior.means[0], prior.covariances[0] + s * s * np.eye(2)).pdf(x) +
                      0.7 * multivariate_normal(prior.means[1], prior.covariances[1] + s * s * np.eye(2)).pdf(x))
    np.testing.assert_allclose(log_density(prior, x, s), smoothed, rtol=1e-10)

    # ------------------ torch log density matches ---------------- #
    torch_values = prior.torch_log_prob(torch.from_numpy(x), s).numpy()
    np.testing.assert_allclose(torch_values, smoothed, rtol=1e-10)

    # ------------------ score against finite differences ---------------- #
    point = np.array([0.4, -0.3])
    h = 1e-6
    numeric = np.array([(prior.log_density(point + h * e, s) - prior.log_density(point - h * e, s)) / (2 * h)
                        for e in np.eye(2)])
    np.testing.assert_allclose(smoothed_score(prior, point, s), numeric, atol=1e-6)
    with pytest.raises(InvalidArgumentError):
        smoothed_score(prior, point, -1.0)

    # ------------------ sampling moments ---------------- #
    samples, comps = prior.sample_with_component(RngStream(0), 40000)
    assert samples.shape == (40000, 2)
    assert abs(np.mean(comps == 1) - 0.7) < 0.01
    mean = prior.weights @ prior.means
    np.testing.assert_allclose(samples.mean(axis=0), mean, atol=0.03)
    assert prior.sample(RngStream(0)).shape == (2, )


def test_isotropic_and_support():
    prior = build_prior(load_specs()['isotropic_mixture'])
    np.testing.assert_allclose(prior.covariances[1], 0.25 * np.eye(3))
    radius = support_radius(prior)
    # 2 + 4.75 sqrt(0.5)
    assert 5.3 < radius < 5.5
    samples = prior.sample(RngStream(1), 10000)
    assert np.mean(np.linalg.norm(samples, axis=1) <= radius) > 0.999


def test_ball_mixture():
    prior = build_prior(load_specs()['two_balls'])
    np.testing.assert_allclose(prior.centers, [[0, 0, 0], [10, 0, 0]])
    assert prior.separation() == 10.0
    assert prior.support_radius() == 11.0

    samples, comps = prior.sample_with_component(RngStream(2), 5000)
    dists = np.linalg.norm(samples - prior.centers[comps], axis=1)
    assert np.all(dists <= 1.0)
    np.testing.assert_array_equal(prior.component_of(samples), comps)

    # ------------------ density is flat inside and -inf outside ---------------- #
    volume = 4.0 / 3.0 * np.pi
    assert abs(prior.log_density([0.1, 0.2, 0.0]) - np.log(0.5 / volume)) < 1e-12
    assert prior.log_density([5.0, 0.0, 0.0]) == -np.inf

    other = build_prior(load_specs()['ball_mixture'])
    assert abs(other.log_density([5.5, 5.0]) - np.log(0.8 / (4 * np.pi))) < 1e-12


def test_projected_ball_density():
    disc = BallMixturePrior([1.0], [[0.0, 0.0]], 1.0)
    # x uniform on the unit disc: the first coordinate has density 2 sqrt(1 - y^2) / pi
    A = np.array([[1.0, 0.0]])
    y = np.array([[0.0], [0.5], [0.99], [1.5]])
    values = disc.projected_log_density(A, y, 0)
    np.testing.assert_allclose(values[:3], np.log(2 * np.sqrt(1 - y[:3, 0]**2) / np.pi), rtol=1e-10)
    assert values[3] == -np.inf

    # ------------------ m = n: uniform on the image of the ball ---------------- #
    B = np.array([[2.0, 0.0], [0.0, 1.0]])
    assert abs(disc.projected_log_density(B, [0.5, 0.5], 0) - np.log(1 / (2 * np.pi))) < 1e-12

    # ------------------ noisy density approaches the exact one ---------------- #
    noisy = disc.projected_log_density(A, [[0.0]], 0, sigma=0.05, rng=RngStream(0), num_samples=200000)
    assert abs(noisy[0] - np.log(2 / np.pi)) < 0.03

    with pytest.raises(UnsupportedConfigurationError):
        disc.projected_log_density(np.eye(3, 2), [0.0, 0.0, 0.0], 0)
    with pytest.raises(InvalidArgumentError):
        disc.projected_log_density(A, [[0.0]], 0, sigma=0.1)

    # ------------------ component posterior picks the ball consistent with y ---------------- #
    balls = BallMixturePrior.two_balls(3, 10.0)
    weights = balls.component_posterior(np.array([[1.0, 0.0, 0.0]]), [9.5], 0.0)
    np.testing.assert_allclose(weights, [0.0, 1.0])


def test_linear_generative():
    zipf = build_prior(load_specs()['zipf'])
    np.testing.assert_allclose(zipf.singular_values(), [1, 1 / 2, 1 / 3, 1 / 4])
    assert zipf == LinearGenerativePrior.zipf(4)

    prior = build_prior(load_specs()['linear_generative'])
    assert prior.dim == 3 and prior.seed_dim == 2
    z = np.array([1.0, -1.0])
    np.testing.assert_allclose(prior.generate(z), prior.matrix @ z)
    samples = prior.sample(RngStream(3), 50000)
    np.testing.assert_allclose(np.cov(samples.T), prior.matrix @ prior.matrix.T, atol=0.1)

    gm = zipf.as_gaussian_mixture()
    np.testing.assert_allclose(gm.covariances[0], np.diag([1, 1 / 4, 1 / 9, 1 / 16]))
    point = np.array([0.1, 0.2, -0.1, 0.0])
    assert abs(zipf.log_density(point) - gm.log_density(point)) < 1e-12

    shifted = shift_prior(zipf, np.ones(4))
    np.testing.assert_allclose(shifted.offset, np.ones(4))
    assert 'offset' in shifted.to_dict() and 'offset' not in zipf.to_dict()
    with pytest.raises(InvalidArgumentError):
        LinearGenerativePrior.from_singular_values([1.0, 0.0])


def test_discrete_atoms():
    prior = build_prior(load_specs()['discrete_atoms'])
    assert prior.num_components == 4
    assert abs(prior.entropy_bits() - 2.0) < 1e-12
    assert prior.support_radius() == 1.0
    np.testing.assert_array_equal(prior.nearest_atom([[0.9, 0.1], [0.1, -0.8]]), [0, 3])
    samples, idx = prior.sample_with_component(RngStream(4), 100)
    np.testing.assert_array_equal(samples, prior.points[idx])
    skewed = DiscreteAtomsPrior(prior.points, [0.5, 0.5, 0.0, 0.0])
    assert abs(skewed.entropy_bits() - 1.0) < 1e-12


def test_shift_prior():
    v = np.array([0.3, -0.4])
    for name in ('gaussian_mixture', 'ball_mixture', 'discrete_atoms'):
        prior = build_prior(load_specs()[name])
        shifted = shift_prior(prior, v)
        # the same stream moves every draw by exactly v
        np.testing.assert_allclose(shifted.sample(RngStream(9), 50), prior.sample(RngStream(9), 50) + v, atol=1e-12)
        np.testing.assert_allclose(
            shifted.shift(-v).sample(RngStream(9), 50), prior.sample(RngStream(9), 50), atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        shift_prior(build_prior(load_specs()['discrete_atoms']), np.ones(3))
