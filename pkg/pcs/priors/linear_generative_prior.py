import numpy as np
from scipy.stats import norm

from pcs.errors import InvalidArgumentError
from pcs.numeric import as_matrix, as_vector
from pcs.priors.base import PRIOR_REGISTRY, Prior
from pcs.priors.gaussian_mixture_prior import SUPPORT_TAIL, GaussianMixturePrior


@PRIOR_REGISTRY.register()
class LinearGenerativePrior(Prior):
    """Linear generative model x = G(z) = Sigma z + offset with z ~ N(0, I_k).

    Args:
        matrix (array): Generator Sigma, shape (n, k).
        offset (array | None): Translation added to every output; zero by default.
    """

    tag = 'linear_generative'
    exact_support = False

    def __init__(self, matrix, offset=None):
        self.matrix = as_matrix(matrix, 'matrix')
        self.offset = np.zeros(self.matrix.shape[0]) if offset is None else as_vector(offset, 'offset')
        if len(self.offset) != self.matrix.shape[0]:
            raise InvalidArgumentError(f'offset has dimension {len(self.offset)}, generator maps to '
                                       f'{self.matrix.shape[0]}.')
        self._mixture = None

    @classmethod
    def from_singular_values(cls, values):
        values = as_vector(values, 'singular_values')
        if np.any(values <= 0):
            raise InvalidArgumentError(f'singular values must be positive, but got {values.tolist()}.')
        return cls(np.diag(values))

    @classmethod
    def zipf(cls, dim):
        """Diagonal generator with Zipfian singular values s_i = 1 / i."""
        return cls.from_singular_values(1.0 / np.arange(1, int(dim) + 1))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def seed_dim(self):
        return self.matrix.shape[1]

    def generate(self, z):
        """G(z) for one latent vector or a batch of rows."""
        return np.asarray(z, dtype=np.float64) @ self.matrix.T + self.offset

    def sample_latent(self, rng, num):
        return rng.normal((num, self.seed_dim))

    def sample_with_component(self, rng, num):
        return self.generate(self.sample_latent(rng, num)), np.zeros(num, dtype=np.int64)

    def singular_values(self):
        return np.linalg.svd(self.matrix, compute_uv=False)

    def as_gaussian_mixture(self):
        """The single-component mixture N(offset, Sigma Sigma^T); needs Sigma of full row rank."""
        if self._mixture is None:
            cov = self.matrix @ self.matrix.T
            self._mixture = GaussianMixturePrior([1.0], self.offset[None], (0.5 * (cov + cov.T))[None])
        return self._mixture

    def log_density(self, x, s=0.0):
        return self.as_gaussian_mixture().log_density(x, s)

    def smoothed_score(self, x, s=0.0):
        return self.as_gaussian_mixture().smoothed_score(x, s)

    def support_radius(self):
        return float(np.linalg.norm(self.offset) + norm.isf(SUPPORT_TAIL) * self.singular_values()[0])

    def shift(self, v):
        v = self._check_shift(v)
        return LinearGenerativePrior(self.matrix.copy(), self.offset + v)

    def to_dict(self):
        out = {'type': self.tag, 'matrix': self.matrix.tolist()}
        if np.any(self.offset != 0):
            out['offset'] = self.offset.tolist()
        return out

    @classmethod
    def from_dict(cls, spec):
        if 'matrix' in spec:
            prior = cls(spec['matrix'], spec.get('offset'))
        elif 'singular_values' in spec:
            prior = cls.from_singular_values(spec['singular_values'])
        elif 'zipf' in spec:
            prior = cls.zipf(spec['zipf'])
        else:
            raise InvalidArgumentError("linear_generative needs one of 'matrix', 'singular_values' or 'zipf'.")
        if 'offset' in spec and 'matrix' not in spec:
            prior = prior.shift(spec['offset'])
        return prior
