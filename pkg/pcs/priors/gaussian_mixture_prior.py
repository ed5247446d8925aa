import numpy as np
import torch
from scipy import linalg
from scipy.special import logsumexp
from scipy.stats import norm
from torch import distributions as D

from pcs.errors import InvalidArgumentError
from pcs.numeric import cholesky, logdet_spd
from pcs.priors.base import PRIOR_REGISTRY, Prior, check_points, check_weights

# one-sided tail mass left outside the approximate support radius
SUPPORT_TAIL = 1e-6


@PRIOR_REGISTRY.register()
class GaussianMixturePrior(Prior):
    """Mixture of full-covariance Gaussians, sum_k w_k N(mu_k, Sigma_k).

    Cholesky factors of the covariances, and of the covariances smoothed by s^2 I, are
    computed once and cached on the instance.

    Args:
        weights (array): Mixture weights, shape (K,), summing to 1.
        means (array): Component means, shape (K, n).
        covariances (array): Component covariances, shape (K, n, n), each SPD.
    """

    tag = 'gaussian_mixture'
    exact_support = False

    def __init__(self, weights, means, covariances):
        self.weights = check_weights(weights)
        self.means = check_points(means, 'means')
        covariances = np.asarray(covariances, dtype=np.float64)
        num, dim = self.means.shape
        if covariances.ndim == 2 and num == 1:
            covariances = covariances[None]
        if len(self.weights) != num or covariances.shape != (num, dim, dim):
            raise InvalidArgumentError(f'inconsistent mixture shapes: weights {self.weights.shape}, means '
                                       f'{self.means.shape}, covariances {covariances.shape}.')
        self.covariances = covariances
        self.factors = [cholesky(c) for c in covariances]
        self._smoothed_factors = {0.0: self.factors}
        self._torch_dists = {}

    @property
    def dim(self):
        return self.means.shape[1]

    @property
    def num_components(self):
        return len(self.weights)

    @classmethod
    def isotropic(cls, weights, means, variances):
        """Mixture with covariances v_k I."""
        means = check_points(means, 'means')
        variances = np.broadcast_to(np.asarray(variances, dtype=np.float64), (means.shape[0], ))
        eye = np.eye(means.shape[1])
        return cls(weights, means, np.stack([v * eye for v in variances]))

    def smoothed_factors(self, s=0.0):
        """Cholesky factors of Sigma_k + s^2 I."""
        s = float(s)
        if s not in self._smoothed_factors:
            eye = np.eye(self.dim)
            self._smoothed_factors[s] = [cholesky(c + s * s * eye) for c in self.covariances]
        return self._smoothed_factors[s]

    def sample_with_component(self, rng, num):
        comp = rng.choice(self.weights, num)
        g = rng.normal((num, self.dim))
        lowers = np.stack([f.lower for f in self.factors])
        x = self.means[comp] + np.einsum('nij,nj->ni', lowers[comp], g)
        return x, comp

    def component_log_densities(self, x, s=0.0):
        """log w_k + log N(x; mu_k, Sigma_k + s^2 I) for every row of ``x``, shape (N, K)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.dim:
            raise InvalidArgumentError(f'x has dimension {x.shape[1]}, prior has {self.dim}.')
        with np.errstate(divide='ignore'):
            log_w = np.log(self.weights)
        out = np.empty((x.shape[0], self.num_components))
        for k, factor in enumerate(self.smoothed_factors(s)):
            white = linalg.solve_triangular(factor.lower, (x - self.means[k]).T, lower=True)
            maha = np.sum(white**2, axis=0)
            out[:, k] = log_w[k] - 0.5 * (self.dim * np.log(2 * np.pi) + logdet_spd(factor) + maha)
        return out

    def log_density(self, x, s=0.0):
        """ln sum_k w_k N(x; mu_k, Sigma_k + s^2 I), max-shifted; scalar for a vector input."""
        x = np.asarray(x, dtype=np.float64)
        values = logsumexp(self.component_log_densities(x, s), axis=1)
        return float(values[0]) if x.ndim <= 1 else values

    def responsibilities(self, x, s=0.0):
        terms = self.component_log_densities(x, s)
        return np.exp(terms - logsumexp(terms, axis=1, keepdims=True))

    def smoothed_score(self, x, s=0.0):
        """Gradient of ln(prior convolved with N(0, s^2 I)) at x; exact for mixtures."""
        x = np.asarray(x, dtype=np.float64)
        xs = np.atleast_2d(x)
        resp = self.responsibilities(xs, s)
        score = np.zeros_like(xs)
        for k, factor in enumerate(self.smoothed_factors(s)):
            pull = linalg.cho_solve((factor.lower, True), (self.means[k] - xs).T).T
            score += resp[:, k:k + 1] * pull
        return score[0] if x.ndim <= 1 else score

    def torch_distribution(self, s=0.0):
        """The smoothed mixture as a ``torch.distributions`` object in float64."""
        s = float(s)
        if s not in self._torch_dists:
            lowers = torch.from_numpy(np.stack([f.lower for f in self.smoothed_factors(s)]))
            components = D.MultivariateNormal(
                torch.from_numpy(self.means.copy()), scale_tril=lowers, validate_args=False)
            mixture = D.Categorical(probs=torch.from_numpy(self.weights.copy()), validate_args=False)
            self._torch_dists[s] = D.MixtureSameFamily(mixture, components, validate_args=False)
        return self._torch_dists[s]

    def torch_log_prob(self, x, s=0.0):
        return self.torch_distribution(s).log_prob(x)

    def max_precision(self, s=0.0):
        """Largest eigenvalue over components of (Sigma_k + s^2 I)^-1."""
        smallest = min(float(np.linalg.eigvalsh(c)[0]) for c in self.covariances)
        return 1.0 / (smallest + float(s)**2)

    def support_radius(self):
        # Gaussians are unbounded: radius holding all but SUPPORT_TAIL of the mass per component
        quantile = norm.isf(SUPPORT_TAIL)
        spreads = [np.sqrt(np.linalg.eigvalsh(c)[-1]) for c in self.covariances]
        return float(max(np.linalg.norm(mu) + quantile * sd for mu, sd in zip(self.means, spreads)))

    def shift(self, v):
        v = self._check_shift(v)
        return GaussianMixturePrior(self.weights.copy(), self.means + v, self.covariances.copy())

    def to_dict(self):
        return {
            'type': self.tag,
            'weights': self.weights.tolist(),
            'means': self.means.tolist(),
            'covariances': self.covariances.tolist()
        }

    @classmethod
    def from_dict(cls, spec):
        if 'covariances' in spec:
            return cls(spec['weights'], spec['means'], spec['covariances'])
        if 'variances' in spec:
            return cls.isotropic(spec['weights'], spec['means'], spec['variances'])
        raise InvalidArgumentError("gaussian_mixture needs 'covariances' or 'variances'.")
