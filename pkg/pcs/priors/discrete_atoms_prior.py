import numpy as np
from scipy.spatial.distance import pdist

from pcs.errors import InvalidArgumentError
from pcs.priors.base import PRIOR_REGISTRY, Prior, check_points, check_weights


@PRIOR_REGISTRY.register()
class DiscreteAtomsPrior(Prior):
    """Finitely supported distribution sum_i w_i delta(x_i).

    Args:
        points (array): Distinct atoms, shape (K, n).
        weights (array | None): Atom weights; uniform when omitted.
    """

    tag = 'discrete_atoms'

    def __init__(self, points, weights=None):
        self.points = check_points(points, 'points')
        num = self.points.shape[0]
        self.weights = check_weights(np.full(num, 1.0 / num) if weights is None else weights)
        if len(self.weights) != num:
            raise InvalidArgumentError(f'{len(self.weights)} weights for {num} atoms.')
        if num > 1 and np.min(pdist(self.points)) == 0:
            raise InvalidArgumentError('atoms must be distinct.')

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def num_components(self):
        return self.points.shape[0]

    def sample_with_component(self, rng, num):
        idx = rng.choice(self.weights, num)
        return self.points[idx].copy(), idx

    def nearest_atom(self, x):
        """Index of the closest atom for each row of ``x``; ties go to the lowest index."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        dists = np.linalg.norm(x[:, None, :] - self.points[None], axis=2)
        return np.argmin(dists, axis=1)

    def entropy_bits(self):
        w = self.weights[self.weights > 0]
        return float(-np.sum(w * np.log2(w)))

    def support_radius(self):
        return float(np.max(np.linalg.norm(self.points, axis=1)))

    def shift(self, v):
        v = self._check_shift(v)
        return DiscreteAtomsPrior(self.points + v, self.weights.copy())

    def to_dict(self):
        return {'type': self.tag, 'points': self.points.tolist(), 'weights': self.weights.tolist()}

    @classmethod
    def from_dict(cls, spec):
        return cls(spec['points'], spec.get('weights'))
