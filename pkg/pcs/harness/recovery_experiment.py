import numpy as np

from pcs.bounds import BoundReport
from pcs.errors import NumericalError
from pcs.harness.emit import ExperimentResult, ResultRow, mean_curves
from pcs.harness.methods import run_method
from pcs.harness.registry import EXPERIMENT_REGISTRY
from pcs.harness.runner import Timer, run_trials, trial_seed
from pcs.measurement import MeasurementProcess, draw_matrix, measure
from pcs.numeric import RngStream, stable_seed
from pcs.priors import build_prior, shift_prior
from pcs.utils import get_root_logger

__all__ = ['SCENE_NAMESPACE', 'build_process', 'draw_scene', 'recovery_trial', 'run_recovery_curve']

# recovery_curve and mismatch draw (x*, A, xi) from this seed namespace
SCENE_NAMESPACE = 'recovery_curve'


def build_process(opt, m):
    measurement = opt['measurement']
    if measurement['kind'] == 'mask':
        mask = measurement.get('mask') or list(range(m))
        return MeasurementProcess.masked(mask, opt['n'], opt['sigma'])
    return MeasurementProcess.gaussian(m, opt['n'], opt['sigma'])


def draw_scene(prior, opt, m, trial):
    """Signal, matrix and noise of one trial, each from its own child stream of the trial seed."""
    seed = trial_seed(opt['master_seed'], SCENE_NAMESPACE, m, trial)
    rng = RngStream(seed)
    x = prior.sample(rng.spawn('signal'))
    A = draw_matrix(build_process(opt, m), rng.spawn('matrix'))
    rec = measure(A, x, opt['sigma'], rng.spawn('noise'))
    return seed, x, rec


def recovery_trial(opt, m, trial, shifts=None):
    """Result rows of every method on one scene.

    Args:
        opt (dict): Parsed options.
        m (int): Measurement count.
        trial (int): Trial index.
        shifts (list | None): (eps_factor, shift vector) pairs; each method then believes the
            prior shifted by the vector. None runs on the true prior.
    """
    prior = build_prior(opt['prior'])
    seed, x, rec = draw_scene(prior, opt, m, trial)
    beliefs = [(None, prior)] if shifts is None else [(f, shift_prior(prior, v)) for f, v in shifts]
    rows = []
    for factor, belief in beliefs:
        for method in opt['methods']:
            rng = RngStream(stable_seed(seed, method))
            aux = {}
            try:
                with Timer(opt['record_runtime']) as timer:
                    x_hat, aux = run_method(method, belief, rec, opt['samplers'], rng)
                error = float(np.linalg.norm(x - x_hat))
                aux['per_pixel'] = error**2 / len(x)
            except NumericalError as err:
                get_root_logger().warning(f'{method} failed on m={m}, trial={trial}: {err}')
                error = float('inf')
                aux['failure'] = type(err).__name__
            name = method
            if factor is not None:
                aux['eps'] = factor * opt['sigma']
                name = f'{method}_eps{factor:g}'
            rows.append(
                ResultRow(opt['name'], trial, m, opt['sigma'], name, error, timer.elapsed_ms, seed,
                          aux))
    return rows


@EXPERIMENT_REGISTRY.register()
def run_recovery_curve(opt):
    """Error of every configured method as the number of measurements grows."""
    tasks = [(opt, m, trial) for m in opt['m_list'] for trial in range(opt['trials'])]
    rows = [row for rows in run_trials(recovery_trial, tasks, opt['num_workers'], 'Recovery') for row in rows]
    series = mean_curves(rows)
    reports = []
    m_lo, m_hi = min(opt['m_list']), max(opt['m_list'])
    if m_lo < m_hi:
        for method, curve in series.items():
            values = dict(curve)
            reports.append(
                BoundReport.compare(
                    f'{method}_error_m{m_hi}_vs_m{m_lo}',
                    values[m_hi],
                    values[m_lo],
                    inputs={'method': method},
                    units='l2'))
    return ExperimentResult('recovery_curve', rows=rows, reports=reports, series=series)
