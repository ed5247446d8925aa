import itertools
import numpy as np
import pytest
from scipy.stats import norm

from pcs.errors import InvalidArgumentError
from pcs.numeric import RngStream
from pcs.transport import EmpiricalDist, symmetric_tv, tv_monte_carlo, wasserstein_inf, wasserstein_p


def exhaustive(x, y, p=None):
    """W_p (or W_inf when p is None) by trying every permutation."""
    dist = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=-1)
    best = np.inf
    for perm in itertools.permutations(range(len(x))):
        d = dist[np.arange(len(x)), perm]
        best = min(best, d.max() if p is None else np.mean(d**p)**(1.0 / p))
    return best


def test_wasserstein_against_permutations():
    rng = np.random.default_rng(11)
    for _ in range(100):
        num = int(rng.integers(1, 7))
        dim = int(rng.integers(1, 4))
        x = rng.normal(0, 1, (num, dim))
        y = rng.normal(0.5, 1, (num, dim))
        assert abs(wasserstein_p(x, y, p=1) - exhaustive(x, y, 1)) < 1e-9
        assert abs(wasserstein_p(x, y, p=2) - exhaustive(x, y, 2)) < 1e-9
        assert abs(wasserstein_inf(x, y) - exhaustive(x, y)) < 1e-9


def test_wasserstein_simple():
    x = np.array([[0.0], [1.0]])
    assert wasserstein_p(x, x) == 0.0
    assert wasserstein_inf(EmpiricalDist(x), EmpiricalDist(x + 3.0)) == 3.0
    assert abs(wasserstein_p(x, x + 3.0, p=2) - 3.0) < 1e-12

    with pytest.raises(InvalidArgumentError):
        wasserstein_p(x, x[:1])
    with pytest.raises(InvalidArgumentError):
        wasserstein_p(x, np.zeros((2, 2)))
    with pytest.raises(InvalidArgumentError):
        wasserstein_p(x, x, p=0.5)


def gaussian(mean):
    return lambda pts: norm.logpdf(pts[:, 0], loc=mean)


def gaussian_sampler(mean):
    return lambda rng, num: mean + rng.normal((num, 1))


def test_tv_monte_carlo():
    # TV(N(0, 1), N(1, 1)) = 2 Phi(1/2) - 1
    expected = 2 * norm.cdf(0.5) - 1
    estimate = tv_monte_carlo(gaussian(0.0), gaussian(1.0), gaussian_sampler(0.0), 20000, RngStream(0))
    assert abs(estimate - expected) < 0.02
    both = symmetric_tv(gaussian(0.0), gaussian(1.0), gaussian_sampler(0.0), gaussian_sampler(1.0), 20000,
                        RngStream(1))
    assert abs(both - expected) < 0.02

    assert tv_monte_carlo(gaussian(0.0), gaussian(0.0), gaussian_sampler(0.0), 500, RngStream(2)) == 0.0

    # disjoint supports
    def uniform_log(lo):
        return lambda pts: np.where((pts[:, 0] >= lo) & (pts[:, 0] <= lo + 1), 0.0, -np.inf)

    def uniform_sampler(rng, num):
        return rng.uniform((num, 1))

    assert tv_monte_carlo(uniform_log(0.0), uniform_log(5.0), uniform_sampler, 500, RngStream(3)) == 1.0


def test_tv_errors():
    with pytest.raises(InvalidArgumentError):
        tv_monte_carlo(gaussian(0.0), gaussian(1.0), gaussian_sampler(0.0), 0, RngStream(0))
    with pytest.raises(InvalidArgumentError):
        tv_monte_carlo(lambda pts: np.full(len(pts), -np.inf), gaussian(1.0), gaussian_sampler(0.0), 10,
                       RngStream(0))
    with pytest.raises(InvalidArgumentError):
        tv_monte_carlo(gaussian(0.0), lambda pts: np.full(len(pts), np.nan), gaussian_sampler(0.0), 10,
                       RngStream(0))
