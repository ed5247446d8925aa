import numpy as np

from pcs.bounds import BoundReport
from pcs.cover import CoverSpec, greedy_cover
from pcs.harness.emit import COVER_HEADER, ExperimentResult
from pcs.harness.registry import EXPERIMENT_REGISTRY
from pcs.harness.runner import run_trials
from pcs.numeric import RngStream, stable_seed
from pcs.priors import LinearGenerativePrior, build_prior

__all__ = ['cover_curve', 'fit_inverse_square', 'ratio_report', 'run_zipf_cover']

# log cov at eta / sqrt(2) over log cov at eta when log cov grows like 1 / eta^2 is 2
RATIO_TARGET = 1.3
# a cover holding more than this share of the samples is saturated; its ratio is not evaluated
SATURATION = 0.25


def _zipf_prior(opt):
    if opt.get('prior'):
        return build_prior(opt['prior'])
    return LinearGenerativePrior.zipf(opt['n'])


def cover_point(points, eta, delta, seed):
    result = greedy_cover(points, CoverSpec(eta, delta))
    return {
        'eta': eta,
        'delta': delta,
        'count': result.count,
        'covered_mass': result.covered_mass,
        'n_samples': result.n_samples,
        'seed': seed,
        'log2_count': float(np.log2(result.count))
    }


def cover_curve(opt):
    """Greedy cover counts on one sample set for every (delta, eta) pair."""
    seed = stable_seed(opt['master_seed'], 'zipf_cover')
    points = _zipf_prior(opt).sample(RngStream(seed), opt['num_samples'])
    tasks = [(points, float(eta), float(delta), seed) for delta in opt['deltas'] for eta in opt['etas']]
    return run_trials(cover_point, tasks, opt['num_workers'], 'Covers')


def fit_inverse_square(etas, log2_counts):
    """Least-squares slope and intercept of log2 count against 1 / eta^2."""
    slope, intercept = np.polyfit(1.0 / np.asarray(etas)**2, np.asarray(log2_counts), 1)
    return float(slope), float(intercept)


def ratio_report(hi, lo, delta):
    """log2 cov(eta / sqrt 2) >= RATIO_TARGET log2 cov(eta), skipped once the finer cover saturates."""
    name = f"zipf_ratio_delta{delta:g}_eta{hi['eta']:g}"
    inputs = {'eta_hi': hi['eta'], 'eta_lo': lo['eta'], 'delta': delta, 'target': RATIO_TARGET}
    if lo['count'] > SATURATION * lo['n_samples']:
        return BoundReport.skipped(name, 'precondition-failed',
                                   f"saturated: {lo['count']} centers for {lo['n_samples']} samples", inputs)
    return BoundReport.compare(name, RATIO_TARGET * hi['log2_count'], lo['log2_count'], inputs=inputs, units='bits')


@EXPERIMENT_REGISTRY.register()
def run_zipf_cover(opt):
    """Cover counts of a Zipfian linear generative prior over an eta grid.

    A sample-centered cover can never exceed the sample count, so the ratio diagnostics
    saturate once the count approaches ``num_samples``.
    """
    table = cover_curve(opt)
    reports = []
    summary = {}
    for delta in opt['deltas']:
        curve = sorted((r for r in table if r['delta'] == delta), key=lambda r: -r['eta'])
        etas = [r['eta'] for r in curve]
        logs = [r['log2_count'] for r in curve]
        if len(curve) > 1:
            slope, intercept = fit_inverse_square(etas, logs)
            summary[f'delta={delta:g}'] = {'slope': slope, 'intercept': intercept}
        for hi, lo in zip(curve[:-1], curve[1:]):
            reports.append(
                BoundReport.compare(
                    f"cover_increases_delta{delta:g}_eta{lo['eta']:g}",
                    hi['count'] + 1,
                    lo['count'],
                    inputs={
                        'eta_hi': hi['eta'],
                        'eta_lo': lo['eta'],
                        'delta': delta
                    },
                    units='count'))
            if np.isclose(hi['eta'] / lo['eta'], np.sqrt(2), rtol=0.05) and hi['log2_count'] > 0:
                reports.append(ratio_report(hi, lo, delta))
                ratio = lo['log2_count'] / hi['log2_count']
                summary.setdefault(f'ratios_delta={delta:g}', []).append({'eta': hi['eta'], 'ratio': ratio})
    for d_lo, d_hi in zip(sorted(opt['deltas'])[:-1], sorted(opt['deltas'])[1:]):
        for eta in opt['etas']:
            count = {r['delta']: r['count'] for r in table if r['eta'] == eta}
            reports.append(
                BoundReport.compare(
                    f'cover_delta_monotone_eta{eta:g}_delta{d_hi:g}',
                    count[d_hi],
                    count[d_lo],
                    inputs={'eta': eta},
                    units='count'))
    summary['ratio_target'] = RATIO_TARGET
    header = COVER_HEADER + ['log2_count']
    series = {f'delta={d:g}': [(r['eta'], r['log2_count']) for r in table if r['delta'] == d] for d in opt['deltas']}
    series = {k: sorted(v) for k, v in series.items()}
    return ExperimentResult('zipf_cover', reports=reports, tables={'cover': (header, table)}, series=series,
                            summary=summary)
