import numpy as np
from scipy.spatial.distance import pdist

from pcs.bounds import BoundReport
from pcs.harness.emit import ExperimentResult, ResultRow
from pcs.harness.methods import run_method
from pcs.harness.recovery_experiment import build_process
from pcs.harness.registry import EXPERIMENT_REGISTRY
from pcs.harness.runner import Timer, trial_seed
from pcs.measurement import draw_matrix, measure
from pcs.numeric import RngStream, stable_seed
from pcs.priors import build_prior

__all__ = ['dispersion', 'run_inpaint_demo']

# methods that return a point estimate rather than a posterior draw
POINT_METHODS = ('map', 'modified_map', 'annealed_map')
DIVERSITY_FACTOR = 10.0


def dispersion(outputs):
    """Mean pairwise distance among the rows of ``outputs``; 0 for fewer than two rows."""
    outputs = np.atleast_2d(outputs)
    if outputs.shape[0] < 2:
        return 0.0
    return float(np.mean(pdist(outputs)))


@EXPERIMENT_REGISTRY.register()
def run_inpaint_demo(opt):
    """Many seeds of MAP and of posterior sampling on one masked signal.

    Posterior draws should spread over every mode the mask leaves open, while MAP keeps
    returning the same point.
    """
    prior = build_prior(opt['prior'])
    m = opt['m_list'][0]
    scene = trial_seed(opt['master_seed'], 'inpaint_demo', m, 0)
    rng = RngStream(scene)
    x = prior.sample(rng.spawn('signal'))
    A = draw_matrix(build_process(opt, m), rng.spawn('matrix'))
    rec = measure(A, x, opt['sigma'], rng.spawn('noise'))

    coords = [f'x{i}' for i in range(len(x))]
    rows, outputs = [], {}
    table = [{'seed': -1, 'method': 'truth', **dict(zip(coords, x))}]
    for seed in range(opt['num_seeds']):
        for method in opt['methods']:
            with Timer(opt['record_runtime']) as timer:
                method_rng = RngStream(stable_seed(scene, method, seed))
                x_hat, aux = run_method(method, prior, rec, opt['samplers'], method_rng)
            error = float(np.linalg.norm(x - x_hat))
            aux['per_pixel'] = error**2 / len(x)
            rows.append(ResultRow('inpaint_demo', seed, m, opt['sigma'], method, error, timer.elapsed_ms, scene, aux))
            outputs.setdefault(method, []).append(x_hat)
            table.append({'seed': seed, 'method': method, **dict(zip(coords, x_hat))})

    spread = {method: dispersion(np.stack(v)) for method, v in outputs.items()}
    reports = []
    for point in (p for p in POINT_METHODS if p in spread):
        for method in (k for k in spread if k not in POINT_METHODS):
            reports.append(
                BoundReport.compare(
                    f'{method}_dispersion_vs_{point}',
                    DIVERSITY_FACTOR * spread[point],
                    spread[method],
                    inputs={
                        'point_method': point,
                        'sampler': method,
                        'seeds': opt['num_seeds']
                    },
                    units='l2',
                    note=f'{DIVERSITY_FACTOR:g} x point-estimate dispersion <= sampler dispersion'))

    summary = {'dispersion': spread, 'mask': np.flatnonzero(np.any(A != 0, axis=0)).tolist()}
    return ExperimentResult('inpaint_demo', rows=rows, reports=reports,
                            tables={'inpaint_outputs': (['seed', 'method'] + coords, table)}, summary=summary)
