import heapq
import itertools
import numpy as np
from dataclasses import dataclass
from scipy import sparse
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from pcs.errors import InvalidArgumentError, SizeLimitError
from pcs.priors.base import check_points, check_weights

__all__ = ['CoverSpec', 'CoverResult', 'greedy_cover', 'brute_force_cover', 'BRUTE_FORCE_LIMIT']

BRUTE_FORCE_LIMIT = 12
# relative slack on the covered-mass target so 1 - delta is not lost to rounding
MASS_TOL = 1e-9


@dataclass(frozen=True)
class CoverSpec:
    """Ball radius ``eta`` and the mass ``delta`` that may stay uncovered."""
    eta: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidArgumentError(f'eta must be > 0, but got {self.eta}.')
        if not 0 <= self.delta < 1:
            raise InvalidArgumentError(f'delta must be in [0, 1), but got {self.delta}.')


@dataclass
class CoverResult:
    """Centers of a sample-centered cover and the mass they carry.

    The count upper-bounds cov_{eta,delta} among covers centered at sample points; such covers
    also bound the unrestricted cover number at radius eta / 2 from above.
    """
    centers: np.ndarray
    center_indices: list
    covered_mass: float
    spec: CoverSpec
    n_samples: int

    @property
    def count(self):
        return len(self.center_indices)

    def to_dict(self):
        return {
            'eta': self.spec.eta,
            'delta': self.spec.delta,
            'count': self.count,
            'covered_mass': self.covered_mass,
            'n_samples': self.n_samples,
            'center_indices': [int(i) for i in self.center_indices],
            'centers': self.centers.tolist()
        }


def _neighbourhoods(points, eta):
    """CSR adjacency of the eta-ball graph, self loops included."""
    num = points.shape[0]
    pairs = cKDTree(points).query_pairs(eta, output_type='ndarray')
    rows = np.concatenate([pairs[:, 0], pairs[:, 1], np.arange(num)])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0], np.arange(num)])
    data = np.ones(len(rows), dtype=bool)
    return sparse.csr_matrix((data, (rows, cols)), shape=(num, num))


def _points_of(samples):
    return check_points(getattr(samples, 'points', samples), 'samples')


def greedy_cover(samples, spec, weights=None):
    """Greedy sample-centered (eta, delta) cover.

    Repeatedly picks the sample whose eta-ball holds the most uncovered mass, lowest index
    first among ties, until at least 1 - delta of the mass is covered.

    Args:
        samples (EmpiricalDist | array): Points, shape (N, n).
        spec (CoverSpec): Radius and allowed uncovered mass.
        weights (array | None): Point masses; 1/N each when omitted.

    Returns:
        CoverResult: The chosen centers.
    """
    points = _points_of(samples)
    num = points.shape[0]
    if weights is None:
        # integer counts keep the gain comparisons exact
        mass = np.ones(num, dtype=np.int64)
    else:
        mass = check_weights(weights)
        if len(mass) != num:
            raise InvalidArgumentError(f'{len(mass)} weights for {num} samples.')
    total = mass.sum()
    target = (1.0 - spec.delta) * total - MASS_TOL * total
    graph = _neighbourhoods(points, spec.eta)
    indptr, indices = graph.indptr, graph.indices

    covered = np.zeros(num, dtype=bool)
    covered_mass = 0
    gains = np.array([mass[indices[indptr[i]:indptr[i + 1]]].sum() for i in range(num)])
    heap = [(-g, i) for i, g in enumerate(gains)]
    heapq.heapify(heap)
    chosen = []
    while covered_mass < target and heap:
        _, i = heapq.heappop(heap)
        nbrs = indices[indptr[i]:indptr[i + 1]]
        fresh = nbrs[~covered[nbrs]]
        gain = mass[fresh].sum()
        if gain == 0:
            continue
        if heap and (-gain, i) > heap[0]:
            heapq.heappush(heap, (-gain, i))
            continue
        chosen.append(i)
        covered[fresh] = True
        covered_mass += gain
    return CoverResult(
        centers=points[chosen].copy(),
        center_indices=chosen,
        covered_mass=float(covered_mass / total),
        spec=spec,
        n_samples=num)


def brute_force_cover(atoms, spec):
    """Smallest number of atom-centered eta-balls carrying at least 1 - delta of the weight.

    Exhaustive over subsets, so limited to 12 atoms.
    """
    points = check_points(atoms.points)
    weights = atoms.weights
    num = points.shape[0]
    if num > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(f'brute_force_cover handles at most {BRUTE_FORCE_LIMIT} atoms, got {num}.')
    inside = cdist(points, points) <= spec.eta
    target = (1.0 - spec.delta) - MASS_TOL
    for k in range(1, num + 1):
        for combo in itertools.combinations(range(num), k):
            if weights[np.any(inside[list(combo)], axis=0)].sum() >= target:
                return k
    return num
