import numpy as np
from scipy.special import logsumexp

from pcs.errors import (DegenerateWeightsError, FactorizationError, InvalidArgumentError, NumericalError,
                        UnsupportedConfigurationError)
from pcs.numeric import as_vector, cholesky, logdet_spd, solve_spd
from pcs.priors import DiscreteAtomsPrior, GaussianMixturePrior, LinearGenerativePrior
from pcs.priors.base import check_weights

__all__ = [
    'PosteriorMixture', 'DiscretePosterior', 'exact_posterior', 'posterior_sample', 'discrete_posterior',
    'sir_posterior_sample'
]

# atoms whose residual is within this of the smallest one count as consistent when sigma = 0
CONSISTENCY_TOL = 1e-9


def _covariance_root(cov):
    """A matrix L with L L^T = cov; falls back to clipped eigenvalues when cov is numerically singular."""
    try:
        return cholesky(cov).lower
    except FactorizationError:
        vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
        if vals[0] < -1e-8 * max(1.0, vals[-1]):
            raise NumericalError(f'posterior covariance has a negative eigenvalue {vals[0]:.3e}.')
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


class PosteriorMixture():
    """The posterior of a Gaussian mixture prior under a linear Gaussian measurement.

    Args:
        weights (array): Updated component weights, shape (K,).
        means (array): Component posterior means, shape (K, n).
        covariances (array): Component posterior covariances, shape (K, n, n).
        log_evidence (array): Per-component marginal log-likelihoods log N(y; A mu_k, A Sigma_k A^T + sigma^2/m I).
    """

    def __init__(self, weights, means, covariances, log_evidence):
        self.weights = check_weights(weights)
        self.means = np.asarray(means, dtype=np.float64)
        self.covariances = np.asarray(covariances, dtype=np.float64)
        self.log_evidence = np.asarray(log_evidence, dtype=np.float64)
        self._roots = [_covariance_root(c) for c in self.covariances]

    @property
    def dim(self):
        return self.means.shape[1]

    @property
    def num_components(self):
        return len(self.weights)

    def sample(self, rng, num=None):
        comp = rng.choice(self.weights, 1 if num is None else num)
        g = rng.normal((len(comp), self.dim))
        roots = np.stack(self._roots)
        x = self.means[comp] + np.einsum('nij,nj->ni', roots[comp], g)
        return x[0] if num is None else x

    def mean(self):
        return self.weights @ self.means

    def covariance(self):
        mu = self.mean()
        spread = self.means - mu
        return np.einsum('k,kij->ij', self.weights, self.covariances) + np.einsum('k,ki,kj->ij', self.weights, spread,
                                                                                  spread)

    def log_density(self, x):
        mixture = GaussianMixturePrior(self.weights, self.means, self.covariances)
        return mixture.log_density(x)


class DiscretePosterior():
    """Posterior weights over the atoms of a discrete prior."""

    def __init__(self, atoms, weights):
        self.atoms = np.asarray(atoms, dtype=np.float64)
        self.weights = check_weights(weights)

    def sample(self, rng, num=None):
        idx = rng.choice(self.weights, 1 if num is None else num)
        return self.atoms[idx[0]].copy() if num is None else self.atoms[idx].copy()

    def sample_index(self, rng, num=None):
        idx = rng.choice(self.weights, 1 if num is None else num)
        return int(idx[0]) if num is None else idx

    def mean(self):
        return self.weights @ self.atoms

    def entropy_bits(self):
        w = self.weights[self.weights > 0]
        return float(-np.sum(w * np.log2(w)))


def exact_posterior(prior, rec, noise_floor=0.0):
    """Conjugate update of a Gaussian mixture (or linear generative) prior.

    Args:
        prior (GaussianMixturePrior | LinearGenerativePrior): Prior.
        rec (MeasurementRecord): Measurement.
        noise_floor (float): Lower limit on the noise level used in the update. Default: 0.

    Returns:
        PosteriorMixture: The posterior.
    """
    if isinstance(prior, LinearGenerativePrior):
        prior = prior.as_gaussian_mixture()
    if not isinstance(prior, GaussianMixturePrior):
        raise InvalidArgumentError(f'exact_posterior needs a Gaussian mixture prior, got {prior.tag}.')
    if rec.n != prior.dim:
        raise InvalidArgumentError(f'A has {rec.n} columns, prior has dimension {prior.dim}.')
    sigma = max(rec.sigma, float(noise_floor))
    if sigma == 0:
        raise UnsupportedConfigurationError('exact posterior of a Gaussian mixture needs sigma > 0.')
    A, y, m = rec.A, rec.y, rec.m
    noise = sigma**2 / m * np.eye(m)
    means, covs, log_ev = [], [], []
    for mu, cov in zip(prior.means, prior.covariances):
        a_cov = A @ cov
        gram = a_cov @ A.T + noise
        try:
            factor = cholesky(0.5 * (gram + gram.T))
        except FactorizationError as error:
            raise NumericalError(f'innovation covariance is not SPD: {error}') from error
        resid = y - A @ mu
        gain = solve_spd(factor, a_cov)
        means.append(mu + gain.T @ resid)
        post_cov = cov - a_cov.T @ gain
        covs.append(0.5 * (post_cov + post_cov.T))
        log_ev.append(-0.5 * (m * np.log(2 * np.pi) + logdet_spd(factor) + resid @ solve_spd(factor, resid)))
    log_ev = np.array(log_ev)
    with np.errstate(divide='ignore'):
        terms = np.log(prior.weights) + log_ev
    weights = np.exp(terms - logsumexp(terms))
    return PosteriorMixture(weights / weights.sum(), np.stack(means), np.stack(covs), log_ev)


def posterior_sample(post, rng, num=None):
    """Draw component k with probability w'_k, then x ~ N(m_k, C_k)."""
    return post.sample(rng, num)


def discrete_posterior(prior, rec):
    if not isinstance(prior, DiscreteAtomsPrior):
        raise InvalidArgumentError(f'discrete_posterior needs a discrete_atoms prior, got {prior.tag}.')
    if rec.n != prior.dim:
        raise InvalidArgumentError(f'A has {rec.n} columns, prior has dimension {prior.dim}.')
    sq = np.sum((rec.y - prior.points @ rec.A.T)**2, axis=1)
    if rec.sigma == 0:
        dist = np.sqrt(sq)
        consistent = dist <= dist.min() + CONSISTENCY_TOL
        return DiscretePosterior(prior.points, consistent / consistent.sum())
    with np.errstate(divide='ignore'):
        terms = np.log(prior.weights) - rec.m * sq / (2 * rec.sigma**2)
    weights = np.exp(terms - logsumexp(terms))
    return DiscretePosterior(prior.points, weights / weights.sum())


def sir_posterior_sample(prior, rec, particles, rng, sigma_t=None):
    """Sampling-importance-resampling draw from the posterior of any prior that can sample.

    Args:
        prior (Prior): Prior to draw particles from.
        rec (MeasurementRecord): Measurement.
        particles (int): Number of prior particles.
        rng (RngStream): Random stream.
        sigma_t (float | None): Pretended noise level; the likelihood uses max(rec.sigma, sigma_t).

    Returns:
        ndarray: One approximate posterior draw.
    """
    if particles < 1:
        raise InvalidArgumentError(f'particles must be >= 1, but got {particles}.')
    sigma = max(rec.sigma, 0.0 if sigma_t is None else float(sigma_t))
    if sigma == 0:
        raise UnsupportedConfigurationError('SIR needs sigma > 0; set a pretended noise level sigma_t.')
    x = prior.sample(rng, int(particles))
    log_lik = -rec.m * np.sum((as_vector(rec.y, 'y') - x @ rec.A.T)**2, axis=1) / (2 * sigma**2)
    top = np.max(log_lik)
    if not np.isfinite(top):
        raise DegenerateWeightsError('all importance weights vanished; raise the particle count or sigma_t.')
    probs = np.exp(log_lik - top)
    return x[int(rng.choice(probs / probs.sum()))].copy()
