import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcs.cover import BRUTE_FORCE_LIMIT, CoverSpec, brute_force_cover, greedy_cover
from pcs.errors import InvalidArgumentError, SizeLimitError
from pcs.priors import DiscreteAtomsPrior
from pcs.transport import EmpiricalDist


def clustered_atoms(rng, eta=1.0):
    """Atoms in clusters of diameter below eta whose gaps exceed eta, with random weights."""
    num_clusters = int(rng.integers(1, 5))
    centers = 10.0 * np.arange(num_clusters)[:, None] * np.array([[1.0, 0.0]]) + rng.normal(0, 1, (num_clusters, 2))
    points = []
    for center in centers:
        size = int(rng.integers(1, 3))
        for _ in range(size):
            offset = rng.normal(0, 1, 2)
            points.append(center + 0.4 * eta * rng.uniform(0, 1) * offset / np.linalg.norm(offset))
    points = np.array(points)
    return DiscreteAtomsPrior(points, rng.dirichlet(np.ones(len(points))))


def test_cover_spec():
    assert CoverSpec(0.5).delta == 0.0
    with pytest.raises(InvalidArgumentError):
        CoverSpec(0.0, 0.1)
    with pytest.raises(InvalidArgumentError):
        CoverSpec(1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        CoverSpec(1.0, -0.1)


def test_greedy_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(50):
        atoms = clustered_atoms(rng)
        assert atoms.num_components <= 8
        for delta in (0.0, 0.2, 0.5):
            spec = CoverSpec(1.0, delta)
            greedy = greedy_cover(atoms.points, spec, weights=atoms.weights)
            assert greedy.count == brute_force_cover(atoms, spec)
            assert greedy.covered_mass >= 1 - delta - 1e-9


def test_greedy_cover():
    # three points on a line spaced by 1: the middle one covers all at eta = 1
    points = np.array([[0.0], [1.0], [2.0]])
    result = greedy_cover(points, CoverSpec(1.0))
    assert result.count == 1 and result.center_indices == [1]
    np.testing.assert_array_equal(result.centers, [[1.0]])
    assert result.covered_mass == 1.0

    # ties go to the lowest index
    result = greedy_cover(np.array([[0.0], [5.0]]), CoverSpec(1.0, 0.5))
    assert result.center_indices == [0] and result.covered_mass == 0.5

    as_dist = greedy_cover(EmpiricalDist(points), CoverSpec(0.5))
    assert as_dist.count == 3
    record = as_dist.to_dict()
    assert record['count'] == 3 and record['n_samples'] == 3 and record['eta'] == 0.5

    with pytest.raises(InvalidArgumentError):
        greedy_cover(points, CoverSpec(1.0), weights=[0.5, 0.5])


def test_brute_force_limit():
    points = np.arange(BRUTE_FORCE_LIMIT + 1, dtype=np.float64)[:, None]
    with pytest.raises(SizeLimitError):
        brute_force_cover(DiscreteAtomsPrior(points), CoverSpec(1.0))
    assert brute_force_cover(DiscreteAtomsPrior(points[:BRUTE_FORCE_LIMIT]), CoverSpec(1.0)) == 4


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), deltas=st.lists(st.floats(0.0, 0.95), min_size=2, max_size=2))
def test_greedy_monotone_in_delta(seed, deltas):
    points = np.random.default_rng(seed).normal(0, 1, (80, 2))
    lo, hi = sorted(deltas)
    assert greedy_cover(points, CoverSpec(0.5, hi)).count <= greedy_cover(points, CoverSpec(0.5, lo)).count


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), etas=st.lists(st.floats(0.05, 3.0), min_size=2, max_size=2),
       delta=st.floats(0.0, 0.5))
def test_exact_cover_monotone_in_eta(seed, etas, delta):
    rng = np.random.default_rng(seed)
    atoms = DiscreteAtomsPrior(rng.normal(0, 1, (7, 2)), rng.dirichlet(np.ones(7)))
    lo, hi = sorted(etas)
    assert brute_force_cover(atoms, CoverSpec(hi, delta)) <= brute_force_cover(atoms, CoverSpec(lo, delta))
