import json
import math
import numpy as np
import pytest

from pcs.bounds import (TWOBALL_MIN_C, BoundReport, awgn_mi_bound, fano_check, lower_bound_measurements, plug_in_mi,
                        posterior_entropy_mi, twoball_tv_bound, wrong_component_bound)
from pcs.errors import InvalidArgumentError, OutOfRegimeError
from pcs.measurement import MeasurementRecord
from pcs.priors import DiscreteAtomsPrior


def test_awgn_mi_bound():
    assert awgn_mi_bound(1, 1.0, 1.0) == pytest.approx(0.5)
    # fixed A with a_inf = 1 and m = 1 gives the same snr
    assert awgn_mi_bound(1, 1.0, 1.0, a_inf=1.0) == pytest.approx(0.5)
    assert awgn_mi_bound(2, math.sqrt(3.0), 1.0) == pytest.approx(2.0)
    assert awgn_mi_bound(4, 0.0, 1.0) == 0.0
    with pytest.raises(InvalidArgumentError):
        awgn_mi_bound(1, 1.0, 0.0)


def test_plug_in_mi():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 4, 20000)
    assert plug_in_mi(x, x) == pytest.approx(2.0, abs=1e-3)
    assert plug_in_mi(x, rng.integers(0, 4, 20000)) < 0.01

    # binary symmetric channel with crossover 0.1: 1 - h(0.1)
    bits = rng.integers(0, 2, 200000)
    flips = rng.uniform(size=200000) < 0.1
    assert abs(plug_in_mi(bits, bits ^ flips) - 0.531) < 0.01

    with pytest.raises(InvalidArgumentError):
        plug_in_mi([], [])
    with pytest.raises(InvalidArgumentError):
        plug_in_mi([0, 1], [0])


def test_posterior_entropy_mi():
    atoms = DiscreteAtomsPrior([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    # a noiseless look at both coordinates identifies the atom
    records = [MeasurementRecord(np.eye(2), atoms.points[i], 0.0) for i in range(4)]
    assert posterior_entropy_mi(atoms, records) == pytest.approx(2.0)
    # one coordinate leaves a fair coin
    records = [MeasurementRecord([[1.0, 0.0]], atoms.points[i, :1], 0.0) for i in range(4)]
    assert posterior_entropy_mi(atoms, records) == pytest.approx(1.0)
    with pytest.raises(InvalidArgumentError):
        posterior_entropy_mi(atoms, [])


def test_fano_check():
    atoms = DiscreteAtomsPrior(np.eye(4) * 10.0)
    rng = np.random.default_rng(1)
    x_idx = rng.integers(0, 4, 400)

    # ------------------ perfect recovery: half the mass needs two of the four atoms ---------------- #
    report = fano_check(atoms, x_idx, atoms.points[x_idx], eta=1.0, delta=0.0, tau=0.5)
    assert report.holds and report.status == 'ok'
    assert report.inputs['cover_count'] == 2
    assert report.lhs == pytest.approx(0.99 * 0.5)
    assert report.rhs == pytest.approx(report.inputs['mi'] + 1.98)

    # ------------------ a single atom needs one ball ---------------- #
    single = DiscreteAtomsPrior([[0.0, 0.0]])
    report = fano_check(single, np.zeros(10, dtype=int), np.zeros((10, 2)), eta=1.0, delta=0.0, tau=1.0)
    assert report.lhs == 0.0 and report.holds

    # ------------------ preconditions ---------------- #
    wrong = atoms.points[(x_idx + 1) % 4]
    with pytest.raises(InvalidArgumentError):
        fano_check(atoms, x_idx, wrong, eta=1.0, delta=0.1, tau=0.5)
    with pytest.raises(InvalidArgumentError):
        fano_check(atoms, x_idx, atoms.points[x_idx], eta=1.0, delta=0.1, tau=0.9)
    with pytest.raises(InvalidArgumentError):
        fano_check(atoms, x_idx, atoms.points[x_idx], eta=1.0, delta=0.4, tau=0.0)


def test_lower_bound_measurements():
    # log2 cov = 100, delta = 0.05, snr = 1
    expected = 0.1584 * (100 + math.log2(0.3)) - 3.96
    assert lower_bound_measurements(100, 0.05, 1.0, 1.0) == pytest.approx(expected)
    assert expected == pytest.approx(11.605, abs=1e-3)
    # snr = 3 doubles log2(1 + snr) and halves the bound
    assert lower_bound_measurements(100, 0.05, math.sqrt(3.0), 1.0) == pytest.approx(expected / 2)
    fixed = lower_bound_measurements(100, 0.05, 1.0, 1.0, gaussian=False, a_inf=1.0, m_probe=3)
    assert fixed == pytest.approx(expected / 2)
    assert lower_bound_measurements(1, 0.05, 1.0, 1.0) < 0

    with pytest.raises(OutOfRegimeError):
        lower_bound_measurements(100, 0.1, 1.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        lower_bound_measurements(100, 0.05, 1.0, 1.0, gaussian=False)


def test_twoball_bounds():
    c = TWOBALL_MIN_C * math.e**2
    assert twoball_tv_bound(10, c) == pytest.approx(1 - 4 * math.exp(-10))
    assert twoball_tv_bound(4, TWOBALL_MIN_C) == pytest.approx(-3.0)
    with pytest.raises(OutOfRegimeError):
        twoball_tv_bound(10, 19.0)

    assert wrong_component_bound(0.6827) == pytest.approx(0.3173)
    with pytest.raises(InvalidArgumentError):
        wrong_component_bound(1.5)


def test_bound_report():
    report = BoundReport.compare('awgn', 1.0, 2.0, inputs={'m': 3})
    assert report.holds and report.status == 'ok'
    record = json.loads(report.to_json())
    assert record['name'] == 'awgn' and record['inputs'] == {'m': 3} and record['direction'] == 'lhs <= rhs'

    violated = BoundReport.compare('dpi', 2.0, 1.0)
    assert violated.holds is False and violated.status == 'violated'

    skipped = BoundReport.skipped('twoball_tv', 'out-of-regime', 'c below 4e^2')
    assert skipped.holds is None and skipped.lhs is None
    with pytest.raises(InvalidArgumentError):
        BoundReport.skipped('x', 'unknown', '')
