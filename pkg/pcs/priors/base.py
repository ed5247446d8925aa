import json
import numpy as np
from basicsr.utils.registry import Registry

from pcs.errors import InvalidArgumentError
from pcs.numeric import as_vector

# prior classes, registered under their class name
PRIOR_REGISTRY = Registry('prior')

# weights must sum to one within this tolerance
WEIGHT_TOL = 1e-12


def check_weights(weights, name='weights'):
    weights = np.atleast_1d(np.asarray(weights, dtype=np.float64))
    if weights.ndim != 1 or len(weights) == 0:
        raise InvalidArgumentError(f'{name} must be a non-empty vector.')
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise InvalidArgumentError(f'{name} must be finite and non-negative, but got {weights.tolist()}.')
    if abs(float(np.sum(weights)) - 1.0) > WEIGHT_TOL:
        raise InvalidArgumentError(f'{name} must sum to 1, but sum to {float(np.sum(weights))!r}.')
    return weights


def check_points(points, name='points'):
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2 or points.shape[0] == 0:
        raise InvalidArgumentError(f'{name} must be a non-empty list of vectors, but got shape {points.shape}.')
    if not np.all(np.isfinite(points)):
        raise InvalidArgumentError(f'{name} has non-finite entries.')
    return points


class Prior():
    """Base class of the signal distributions R and P.

    Subclasses set ``tag`` (the JSON ``type`` value) and implement
    :meth:`sample_with_component`, :meth:`support_radius`, :meth:`shift`,
    :meth:`to_dict` and :meth:`from_dict`.
    """

    tag = None
    # False when support_radius is a high-probability radius rather than a bound
    exact_support = True

    @property
    def dim(self):
        raise NotImplementedError

    @property
    def num_components(self):
        return 1

    def sample(self, rng, num=None):
        """One draw (shape (n,)) or ``num`` draws (shape (num, n))."""
        x, _ = self.sample_with_component(rng, 1 if num is None else num)
        return x[0] if num is None else x

    def sample_with_component(self, rng, num):
        """Draws together with the index of the mixture component each one came from."""
        raise NotImplementedError

    def support_radius(self):
        raise NotImplementedError

    def shift(self, v):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    @classmethod
    def from_dict(cls, spec):
        raise NotImplementedError

    def _check_shift(self, v):
        v = as_vector(v, 'v')
        if len(v) != self.dim:
            raise InvalidArgumentError(f'shift has dimension {len(v)}, prior has {self.dim}.')
        return v

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((type(self).__name__, json.dumps(self.to_dict(), sort_keys=True)))

    def __repr__(self):
        return f'{self.__class__.__name__}(dim={self.dim}, components={self.num_components})'
