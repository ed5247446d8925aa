import json
import math
import numpy as np
from dataclasses import asdict, dataclass, field
from scipy.stats.contingency import crosstab

from pcs.cover import BRUTE_FORCE_LIMIT, CoverSpec, brute_force_cover, greedy_cover
from pcs.errors import InvalidArgumentError, OutOfRegimeError
from pcs.posterior import discrete_posterior
from pcs.utils import get_root_logger

__all__ = [
    'BoundReport', 'awgn_mi_bound', 'plug_in_mi', 'posterior_entropy_mi', 'fano_check', 'lower_bound_measurements',
    'twoball_tv_bound', 'wrong_component_bound', 'FANO_SLACK', 'LOWER_BOUND_SLOPE', 'LOWER_BOUND_OFFSET',
    'TWOBALL_MIN_C'
]

# constants of the Fano-variant inequality and of the measurement lower bound derived from it
FANO_FACTOR = 0.99
FANO_SLACK = 1.98
LOWER_BOUND_SLOPE = 0.1584
LOWER_BOUND_OFFSET = 3.96
LOWER_BOUND_MAX_DELTA = 0.1
TWOBALL_MIN_C = 4 * math.e**2
MIN_MI_PAIRS = 100

REPORT_STATUSES = ('ok', 'violated', 'out-of-regime', 'precondition-failed')


@dataclass
class BoundReport:
    """One evaluated inequality ``lhs <= rhs``.

    ``holds`` is None when the bound could not be evaluated; ``status`` then says why.
    """
    name: str
    lhs: float = None
    rhs: float = None
    holds: bool = None
    status: str = 'ok'
    inputs: dict = field(default_factory=dict)
    units: str = 'bits'
    direction: str = 'lhs <= rhs'
    note: str = ''

    @classmethod
    def compare(cls, name, lhs, rhs, inputs=None, units='bits', note=''):
        holds = bool(lhs <= rhs)
        return cls(
            name=name,
            lhs=float(lhs),
            rhs=float(rhs),
            holds=holds,
            status='ok' if holds else 'violated',
            inputs=dict(inputs or {}),
            units=units,
            note=note)

    @classmethod
    def skipped(cls, name, status, note, inputs=None):
        if status not in REPORT_STATUSES:
            raise InvalidArgumentError(f'unknown report status {status!r}.')
        return cls(name=name, status=status, inputs=dict(inputs or {}), note=note)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict())


def awgn_mi_bound(m, r, sigma, a_inf=None):
    """Cap on I(y; x* | A) in bits for a signal of norm at most r.

    With a Gaussian A (``a_inf`` None) the cap is (m/2) log2(1 + r^2/sigma^2); for a fixed A with
    largest absolute entry ``a_inf`` it is (m/2) log2(1 + m r^2 a_inf^2 / sigma^2).
    """
    if not sigma > 0:
        raise InvalidArgumentError(f'the AWGN bound needs sigma > 0, but got {sigma}.')
    if r < 0 or m < 1:
        raise InvalidArgumentError(f'need r >= 0 and m >= 1, but got r={r}, m={m}.')
    snr = r**2 / sigma**2 if a_inf is None else m * r**2 * a_inf**2 / sigma**2
    return 0.5 * m * math.log2(1.0 + snr)


def plug_in_mi(x_idx, xhat_idx):
    """Plug-in mutual information, in bits, of two paired label sequences."""
    x_idx = np.asarray(x_idx)
    xhat_idx = np.asarray(xhat_idx)
    if x_idx.size == 0 or x_idx.shape != xhat_idx.shape:
        raise InvalidArgumentError(f'need two non-empty label sequences of equal length, got sizes '
                                   f'{x_idx.size} and {xhat_idx.size}.')
    if x_idx.size < MIN_MI_PAIRS:
        get_root_logger().warning(f'plug-in MI from {x_idx.size} pairs (< {MIN_MI_PAIRS}) is strongly biased.')
    counts = crosstab(x_idx, xhat_idx).count.astype(np.float64)
    joint = counts / counts.sum()
    outer = joint.sum(axis=1, keepdims=True) * joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    return float(max(0.0, np.sum(joint[nz] * np.log2(joint[nz] / outer[nz]))))


def posterior_entropy_mi(prior, records):
    """I(x; y | A) in bits as H(x) minus the average posterior entropy over measured records."""
    if len(records) == 0:
        raise InvalidArgumentError('no measurement records.')
    cond = np.mean([discrete_posterior(prior, rec).entropy_bits() for rec in records])
    return float(max(0.0, prior.entropy_bits() - cond))


def _atom_cover_count(prior, spec):
    if prior.num_components <= BRUTE_FORCE_LIMIT:
        return brute_force_cover(prior, spec), ''
    result = greedy_cover(prior.points, spec, weights=prior.weights)
    return result.count, 'cover count from the greedy estimate (upper bound)'


def fano_check(prior, x_idx, x_hat, eta, delta, tau, cov_fn=None):
    """Check 0.99 tau (1 - 2 delta) log2 cov_{3 eta, tau + 3 delta}(R) <= I(x; x_hat) + 1.98.

    Args:
        prior (DiscreteAtomsPrior): R.
        x_idx (array): Atom index of each true signal.
        x_hat (array): Recovered signals, shape (N, n); quantized to the nearest atom for the MI.
        eta (float): Recovery radius.
        delta (float): Allowed failure probability.
        tau (float): Trade-off parameter, tau <= 1 - 3 delta.
        cov_fn (callable | None): ``cov_fn(prior, CoverSpec) -> count``; exact for <= 12 atoms by default.

    Returns:
        BoundReport: The evaluated inequality.
    """
    x_idx = np.asarray(x_idx)
    x_hat = np.atleast_2d(np.asarray(x_hat, dtype=np.float64))
    inputs = {'eta': eta, 'delta': delta, 'tau': tau, 'pairs': int(len(x_idx))}
    if not delta < 1.0 / 3:
        raise InvalidArgumentError(f'fano_check needs delta < 1/3, but got {delta}.')
    if tau > 1 - 3 * delta:
        raise InvalidArgumentError(f'fano_check needs tau <= 1 - 3 delta = {1 - 3 * delta}, but got {tau}.')
    errors = np.linalg.norm(prior.points[x_idx] - x_hat, axis=1)
    failure = float(np.mean(errors > eta))
    inputs['failure_rate'] = failure
    if failure > delta:
        raise InvalidArgumentError(f'fano_check needs Pr[|x - x_hat| > eta] <= delta, but the empirical failure '
                                   f'rate is {failure} > {delta}.')
    cover_delta = tau + 3 * delta
    note = ''
    if cover_delta >= 1:
        count = 1
    elif cov_fn is not None:
        count = cov_fn(prior, CoverSpec(3 * eta, cover_delta))
    else:
        count, note = _atom_cover_count(prior, CoverSpec(3 * eta, cover_delta))
    inputs['cover_count'] = int(count)
    mi = plug_in_mi(x_idx, prior.nearest_atom(x_hat))
    inputs['mi'] = mi
    lhs = FANO_FACTOR * tau * (1 - 2 * delta) * math.log2(count)
    return BoundReport.compare('fano', lhs, mi + FANO_SLACK, inputs, note=note)


def lower_bound_measurements(log2_cov, delta, r, sigma, gaussian=True, a_inf=None, m_probe=None):
    """Measurements needed for (eta, delta) recovery, from the Fano-variant inequality.

    Returns (0.1584 (log2 cov_{3 eta, 4 delta} + log2(6 delta)) - 3.96) / log2(1 + snr) with
    snr = r^2/sigma^2 for Gaussian A, or m_probe r^2 a_inf^2 / sigma^2 for a fixed A. The value
    may be negative, which means the bound is vacuous.
    """
    if not delta < LOWER_BOUND_MAX_DELTA:
        raise OutOfRegimeError(f'the measurement lower bound assumes delta < {LOWER_BOUND_MAX_DELTA}, got {delta}.')
    if not delta > 0:
        raise InvalidArgumentError(f'delta must be > 0, but got {delta}.')
    if not sigma > 0:
        raise InvalidArgumentError(f'sigma must be > 0, but got {sigma}.')
    if gaussian:
        snr = r**2 / sigma**2
    else:
        if a_inf is None or m_probe is None:
            raise InvalidArgumentError('a fixed matrix needs a_inf and m_probe.')
        snr = m_probe * r**2 * a_inf**2 / sigma**2
    numer = LOWER_BOUND_SLOPE * (log2_cov + math.log2(6 * delta)) - LOWER_BOUND_OFFSET
    if snr == 0:
        # a zero-power channel carries no information
        return math.inf if numer > 0 else 0.0
    return numer / math.log2(1 + snr)


def twoball_tv_bound(m, c):
    """Lower bound 1 - 4 exp(-(m/2) ln(c / 4e^2)) on E_A TV of the projected balls; needs c >= 4e^2."""
    if c < TWOBALL_MIN_C:
        raise OutOfRegimeError(f'the two-ball TV bound needs c >= 4e^2 = {TWOBALL_MIN_C:.4f}, got {c}.')
    return 1.0 - 4.0 * math.exp(-0.5 * m * math.log(c / TWOBALL_MIN_C))


def wrong_component_bound(tv):
    """Pr[x* from one component, x_hat from the other] <= 1 - TV."""
    if not 0 <= tv <= 1:
        raise InvalidArgumentError(f'tv must be in [0, 1], but got {tv}.')
    return 1.0 - tv
