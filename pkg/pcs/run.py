import argparse
import logging
import os
import sys
import time
from os import path as osp

from pcs.errors import ConfigurationError
from pcs.harness import EXPERIMENTS, load_options, parse_options, run_experiment
from pcs.harness.emit import emit_csv, emit_json, emit_svg_lines, emit_table
from pcs.utils import dict2str, get_root_logger
from pcs.version import __version__

BOUNDS_HEADER = ['name', 'lhs', 'rhs', 'holds', 'status', 'units', 'direction', 'note']

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BOUND_FAILED = 3


def write_outputs(result, opt):
    """Write every artifact of an experiment under ``opt['output']['dir']``; return the written paths."""
    out_dir = opt['output']['dir']
    written = []
    if result.rows or not result.tables:
        path = osp.join(out_dir, 'results.csv')
        emit_csv(result.rows, path)
        written.append(path)
    for stem, (header, rows) in sorted(result.tables.items()):
        path = osp.join(out_dir, f'{stem}.csv')
        emit_table(header, rows, path)
        written.append(path)
    if result.reports:
        path = osp.join(out_dir, 'bounds.csv')
        emit_table(BOUNDS_HEADER, [r.to_dict() for r in result.reports], path)
        written.append(path)
    path = osp.join(out_dir, 'reports.json')
    emit_json({'experiment': result.experiment, 'reports': result.reports, 'summary': result.summary}, path)
    written.append(path)
    if result.series and opt['output'].get('svg', True):
        path = osp.join(out_dir, f'{result.experiment}.svg')
        emit_svg_lines(result.series, path, title=result.experiment)
        written.append(path)
    return written


def main(argv=None):
    """Command-line entry point of the experiment harness.

    Returns 0 on success, 2 on a configuration error and 3 when a bounds_report bound fails.
    """
    parser = argparse.ArgumentParser(prog='pcs', description='Posterior-sampling compressed sensing experiments.')
    parser.add_argument('experiment', type=str, choices=sorted(EXPERIMENTS), help='Experiment to run')
    parser.add_argument('-c', '--config', type=str, default=None, help='YAML or JSON options file')
    parser.add_argument('-o', '--out', type=str, default=None, help='Output folder')
    parser.add_argument('--seed', type=int, default=None, help='Master seed')
    parser.add_argument('--trials', type=int, default=None, help='Trials per measurement count')
    parser.add_argument('--workers', type=int, default=None, help='Worker processes (capped by PCS_THREADS)')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    args = parser.parse_args(argv)

    try:
        opt = load_options(args.config) if args.config else {}
        opt = parse_options(
            opt, experiment=args.experiment, seed=args.seed, trials=args.trials, out=args.out,
            num_workers=args.workers)
    except ConfigurationError as error:
        get_root_logger().error(f'Configuration error: {error}')
        return EXIT_CONFIG

    log_file = osp.join(opt['output']['dir'], f"{opt['name']}_{time.strftime('%Y%m%d_%H%M%S')}.log")
    try:
        os.makedirs(opt['output']['dir'], exist_ok=True)
        logger = get_root_logger(log_level=logging.INFO, log_file=log_file)
    except OSError as error:
        logger = get_root_logger()
        logger.warning(f'Cannot open log file {log_file}: {error}')
    # an earlier call in this process may have initialized the logger without a level
    logger.setLevel(logging.INFO)
    logger.info(f'pcs {__version__}')
    logger.info(dict2str(opt))

    result = run_experiment(opt)
    for path in write_outputs(result, opt):
        logger.info(f'Wrote {path}')
    failed = result.failed_reports
    skipped = [r for r in result.reports if r.holds is None]
    logger.info(f'{len(result.reports)} bound reports: {len(failed)} violated, {len(skipped)} not evaluated.')
    for report in failed:
        logger.warning(f'{report.name}: {report.lhs:.6g} > {report.rhs:.6g} ({report.units}) {report.note}')
    if opt['name'] == 'bounds_report' and failed:
        return EXIT_BOUND_FAILED
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
