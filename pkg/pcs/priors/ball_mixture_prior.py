import numpy as np
from scipy.special import gammaln, logsumexp

from pcs.errors import InvalidArgumentError, UnsupportedConfigurationError
from pcs.numeric import as_matrix, as_vector, cholesky, logdet_spd, solve_spd
from pcs.priors.base import PRIOR_REGISTRY, Prior, check_points, check_weights


def log_ball_volume(dim, radius):
    """Natural log of the volume of a ``dim``-dimensional ball; dim 0 has volume 1."""
    if dim == 0:
        return 0.0
    return 0.5 * dim * np.log(np.pi) - gammaln(0.5 * dim + 1) + dim * np.log(radius)


def uniform_ball(rng, num, dim):
    """``num`` points uniform in the unit ball of R^dim: Gaussian direction, radius U^(1/dim)."""
    g = rng.normal((num, dim))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    u = rng.uniform(num)[:, None]
    return g / norms * u**(1.0 / dim)


@PRIOR_REGISTRY.register()
class BallMixturePrior(Prior):
    """Mixture of uniform distributions on Euclidean balls.

    Args:
        weights (array): Mixture weights, shape (K,).
        centers (array): Ball centers, shape (K, n).
        radii (array): Ball radii eta_k > 0, shape (K,) or a scalar shared by all balls.
    """

    tag = 'ball_mixture'

    def __init__(self, weights, centers, radii):
        self.weights = check_weights(weights)
        self.centers = check_points(centers, 'centers')
        radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (self.centers.shape[0], )).copy()
        if len(self.weights) != self.centers.shape[0]:
            raise InvalidArgumentError(f'{len(self.weights)} weights for {self.centers.shape[0]} balls.')
        if not np.all(np.isfinite(radii)) or np.any(radii <= 0):
            raise InvalidArgumentError(f'radii must be positive, but got {radii.tolist()}.')
        self.radii = radii

    @property
    def dim(self):
        return self.centers.shape[1]

    @property
    def num_components(self):
        return len(self.weights)

    @classmethod
    def two_balls(cls, dim, distance, radius=1.0, weight=0.5):
        """Balls of equal radius centered at the origin and at ``distance`` along the first axis."""
        centers = np.zeros((2, dim))
        centers[1, 0] = distance
        return cls([weight, 1.0 - weight], centers, radius)

    def separation(self, i=0, j=1):
        return float(np.linalg.norm(self.centers[i] - self.centers[j]))

    def sample_with_component(self, rng, num):
        comp = rng.choice(self.weights, num)
        x = self.centers[comp] + self.radii[comp, None] * uniform_ball(rng, num, self.dim)
        return x, comp

    def sample_component(self, rng, k, num):
        return self.centers[k] + self.radii[k] * uniform_ball(rng, num, self.dim)

    def component_of(self, x):
        """Index of the ball each point lies in (or is closest to, by distance to the surface)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        gaps = np.linalg.norm(x[:, None, :] - self.centers[None], axis=2) - self.radii[None]
        return np.argmin(gaps, axis=1)

    def log_density(self, x):
        x = np.asarray(x, dtype=np.float64)
        xs = np.atleast_2d(x)
        dists = np.linalg.norm(xs[:, None, :] - self.centers[None], axis=2)
        with np.errstate(divide='ignore'):
            terms = np.log(self.weights)[None] - np.array([log_ball_volume(self.dim, r) for r in self.radii])[None]
        terms = np.where(dists <= self.radii[None], terms, -np.inf)
        values = logsumexp(terms, axis=1)
        return float(values[0]) if x.ndim <= 1 else values

    def projected_log_density(self, A, y, k, sigma=0.0, rng=None, num_samples=2000):
        """Log density of y = A x (+ noise N(0, sigma^2/m I)) when x is uniform on ball ``k``.

        With ``sigma == 0`` and ``m <= n`` the density is exact: the fibre {x : A x = y} cuts the
        ball in an (n - m)-dimensional ball whose volume, divided by vol_n(ball) sqrt(det A A^T),
        is the density. With ``sigma > 0`` it is a Monte-Carlo average of Gaussian likelihoods over
        ``num_samples`` uniform ball points drawn from ``rng``.

        Args:
            A (array): Measurement matrix, shape (m, n).
            y (array): One observation (m,) or a batch (N, m).
            k (int): Ball index.

        Returns:
            float | ndarray: log densities, -inf outside the support.
        """
        A = as_matrix(A)
        y = np.asarray(y, dtype=np.float64)
        ys = np.atleast_2d(y)
        m, n = A.shape
        if n != self.dim or ys.shape[1] != m:
            raise InvalidArgumentError(f'shape mismatch: A {A.shape}, y {y.shape}, prior dimension {self.dim}.')
        if sigma > 0:
            if rng is None:
                raise InvalidArgumentError('a random stream is needed for the noisy projected density.')
            pts = self.sample_component(rng, k, num_samples) @ A.T
            sq = np.sum((ys[:, None, :] - pts[None])**2, axis=2)
            var = sigma**2 / m
            log_lik = -0.5 * sq / var - 0.5 * m * np.log(2 * np.pi * var)
            values = logsumexp(log_lik, axis=1) - np.log(num_samples)
        else:
            if m > n:
                raise UnsupportedConfigurationError(f'noiseless projected density needs m <= n, got m={m}, n={n}.')
            gram = cholesky(A @ A.T)
            resid = ys - A @ self.centers[k]
            dist2 = np.sum(resid.T * solve_spd(gram, resid.T), axis=0)
            eta = self.radii[k]
            rho2 = eta**2 - dist2
            inside = rho2 >= -1e-12 * eta**2
            rho = np.sqrt(np.clip(rho2, 0.0, None))
            base = -log_ball_volume(n, eta) - 0.5 * logdet_spd(gram)
            values = np.full(len(ys), -np.inf)
            if m == n:
                values[inside] = base
            else:
                with np.errstate(divide='ignore'):
                    values[inside] = base + log_ball_volume(n - m, rho[inside])
        return float(values[0]) if y.ndim <= 1 else values

    def projected_mixture_log_density(self, A, y, sigma=0.0, rng=None, num_samples=2000, components=None):
        """Log density of the projected mixture restricted to ``components`` (renormalized)."""
        components = range(self.num_components) if components is None else list(components)
        weights = self.weights[list(components)]
        weights = weights / weights.sum()
        terms = []
        for w, k in zip(weights, components):
            with np.errstate(divide='ignore'):
                terms.append(np.log(w) + np.atleast_1d(self.projected_log_density(A, y, k, sigma, rng, num_samples)))
        values = logsumexp(np.stack(terms), axis=0)
        return float(values[0]) if np.asarray(y).ndim <= 1 else values

    def component_posterior(self, A, y, sigma=0.0, rng=None, num_samples=2000):
        """Posterior probability of each ball given one observation y."""
        y = as_vector(y, 'y')
        terms = np.array([
            np.log(w) + self.projected_log_density(A, y, k, sigma, rng, num_samples) if w > 0 else -np.inf
            for k, w in enumerate(self.weights)
        ])
        if not np.any(np.isfinite(terms)):
            return self.weights.copy()
        return np.exp(terms - logsumexp(terms))

    def support_radius(self):
        return float(np.max(np.linalg.norm(self.centers, axis=1) + self.radii))

    def shift(self, v):
        v = self._check_shift(v)
        return BallMixturePrior(self.weights.copy(), self.centers + v, self.radii.copy())

    def to_dict(self):
        return {
            'type': self.tag,
            'weights': self.weights.tolist(),
            'centers': self.centers.tolist(),
            'radii': self.radii.tolist()
        }

    @classmethod
    def from_dict(cls, spec):
        if 'centers' not in spec:
            return cls.two_balls(spec['dim'], spec['distance'], spec.get('radius', 1.0), spec.get('weight', 0.5))
        return cls(spec['weights'], spec['centers'], spec['radii'])
