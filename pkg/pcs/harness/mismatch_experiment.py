import numpy as np

from pcs.bounds import BoundReport
from pcs.errors import ConfigurationError
from pcs.harness.emit import ExperimentResult
from pcs.harness.recovery_experiment import recovery_trial
from pcs.harness.registry import EXPERIMENT_REGISTRY
from pcs.harness.runner import run_trials

__all__ = ['shift_vectors', 'run_mismatch']

QUANTILE = 90


def shift_vectors(opt):
    """(eps_factor, v) pairs with ||v|| = eps_factor * sigma along the configured direction."""
    direction = opt.get('shift_direction')
    if direction is None:
        direction = np.eye(opt['n'])[0]
    direction = np.asarray(direction, dtype=np.float64)
    if direction.shape != (opt['n'], ) or np.linalg.norm(direction) == 0:
        raise ConfigurationError(f"shift_direction must be a non-zero vector of length {opt['n']}.")
    direction = direction / np.linalg.norm(direction)
    return [(float(f), float(f) * opt['sigma'] * direction) for f in opt['eps_factors']]


@EXPERIMENT_REGISTRY.register()
def run_mismatch(opt):
    """Recovery when the sampler believes P = R shifted by eps, for every eps factor.

    Scenes are the recovery_curve scenes, so eps = 0 repeats those rows exactly.
    """
    shifts = shift_vectors(opt)
    tasks = [(opt, m, trial, shifts) for m in opt['m_list'] for trial in range(opt['trials'])]
    rows = [row for rows in run_trials(recovery_trial, tasks, opt['num_workers'], 'Mismatch') for row in rows]

    quantiles = {}
    for row in rows:
        quantiles.setdefault((row.method, row.m), []).append(row.error_l2)
    quantiles = {key: float(np.percentile(v, QUANTILE)) for key, v in quantiles.items()}

    reports = []
    sigma = opt['sigma']
    if 0.0 in [f for f, _ in shifts]:
        for method in opt['methods']:
            for m in opt['m_list']:
                base = quantiles[(f'{method}_eps0', m)]
                for factor, _ in shifts:
                    if factor == 0:
                        continue
                    eps = factor * sigma
                    reports.append(
                        BoundReport.compare(
                            f'{method}_q{QUANTILE}_excess_eps{factor:g}_m{m}',
                            quantiles[(f'{method}_eps{factor:g}', m)] - base,
                            eps + 2 * sigma,
                            inputs={
                                'method': method,
                                'm': m,
                                'eps': eps,
                                'sigma': sigma
                            },
                            units='l2'))
    summary = {f'{method}@m={m}': q for (method, m), q in sorted(quantiles.items())}
    return ExperimentResult('mismatch', rows=rows, reports=reports, summary={f'q{QUANTILE}': summary})
