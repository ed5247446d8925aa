import numpy as np
from dataclasses import dataclass
from scipy import sparse
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial.distance import cdist

from pcs.errors import InvalidArgumentError
from pcs.priors.base import check_points

__all__ = ['EmpiricalDist', 'wasserstein_p', 'wasserstein_inf', 'tv_monte_carlo', 'symmetric_tv', 'MAX_POINTS']

MAX_POINTS = 10000


@dataclass(frozen=True)
class EmpiricalDist:
    """Equal-weight point cloud, each point carrying mass 1/N."""
    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'points', check_points(self.points, 'points'))

    def __len__(self):
        return self.points.shape[0]


def _pair(a, b):
    a = a if isinstance(a, EmpiricalDist) else EmpiricalDist(a)
    b = b if isinstance(b, EmpiricalDist) else EmpiricalDist(b)
    if len(a) != len(b):
        raise InvalidArgumentError(f'empirical distributions need equal sizes, got {len(a)} and {len(b)}.')
    if len(a) > MAX_POINTS:
        raise InvalidArgumentError(f'at most {MAX_POINTS} points per distribution, got {len(a)}.')
    if a.points.shape[1] != b.points.shape[1]:
        raise InvalidArgumentError(f'dimension mismatch: {a.points.shape[1]} vs {b.points.shape[1]}.')
    return a.points, b.points


def wasserstein_p(a, b, p=1):
    """Exact W_p between two equal-size point clouds by optimal assignment."""
    if p < 1:
        raise InvalidArgumentError(f'order p must be >= 1, but got {p}.')
    x, y = _pair(a, b)
    cost = cdist(x, y)**p
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean()**(1.0 / p))


def _has_perfect_matching(feasible):
    match = maximum_bipartite_matching(sparse.csr_matrix(feasible.astype(np.int8)), perm_type='column')
    return bool(np.all(match >= 0))


def wasserstein_inf(a, b):
    """Bottleneck matching: the smallest t such that a perfect matching uses only pairs within t."""
    x, y = _pair(a, b)
    dist = cdist(x, y)
    levels = np.unique(dist)
    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(dist <= levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def tv_monte_carlo(log_density_a, log_density_b, sampler_a, num, rng):
    """One-sided Monte-Carlo estimate of TV(a, b) = E_a[(1 - p_b / p_a)_+].

    Args:
        log_density_a (callable): Batch log density of a, (N, d) -> (N,).
        log_density_b (callable): Batch log density of b; -inf is allowed.
        sampler_a (callable): ``sampler_a(rng, num)`` returns num draws from a.
        num (int): Number of draws.
        rng (RngStream): Random stream.
    """
    if num < 1:
        raise InvalidArgumentError(f'num must be >= 1, but got {num}.')
    draws = sampler_a(rng, num)
    log_a = np.asarray(log_density_a(draws), dtype=np.float64)
    log_b = np.asarray(log_density_b(draws), dtype=np.float64)
    if not np.all(np.isfinite(log_a)):
        raise InvalidArgumentError('log_density_a is not finite on draws from sampler_a.')
    if np.any(np.isnan(log_b)) or np.any(log_b == np.inf):
        raise InvalidArgumentError('log_density_b returned NaN or +inf.')
    ratio = np.exp(np.minimum(log_b - log_a, 0.0))
    return float(np.mean(1.0 - ratio))


def symmetric_tv(log_density_a, log_density_b, sampler_a, sampler_b, num, rng):
    """Average of the two one-sided estimates, each on its own child stream."""
    forward = tv_monte_carlo(log_density_a, log_density_b, sampler_a, num, rng.spawn('forward'))
    backward = tv_monte_carlo(log_density_b, log_density_a, sampler_b, num, rng.spawn('backward'))
    return 0.5 * (forward + backward)
