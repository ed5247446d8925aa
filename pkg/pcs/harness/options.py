import copy
import yaml

from pcs.errors import ConfigurationError, PcsError
from pcs.harness.methods import METHOD_PRIORS, NOISE_FLOOR_KEYS
from pcs.priors import build_prior

__all__ = ['DEFAULT_OPTIONS', 'EXPERIMENT_DEFAULTS', 'load_options', 'parse_options']

DEFAULT_OPTIONS = {
    'master_seed': 0,
    'trials': 10,
    'sigma': 0.1,
    'num_workers': 1,
    'record_runtime': False,
    'measurement': {
        'kind': 'gaussian'
    },
    'samplers': {
        'exact': {
            'noise_floor': 0.0
        },
        'langevin': {
            'num_levels': 10,
            'steps_per_level': 200,
            'kappa': 1.0,
            'step_scale': 0.05,
            'sigma_floor': 0.0
        },
        'map': {
            'step_size': 0.1,
            'iterations': 500,
            'restarts': 2
        },
        'modified_map': {
            'gamma': 0.1,
            'step_size': 0.1,
            'iterations': 500,
            'restarts': 2
        },
        'sir': {
            'particles': 2000,
            'sigma_floor': 0.0
        }
    },
    'output': {
        'dir': 'results',
        'svg': True
    }
}

EXPERIMENT_DEFAULTS = {
    'recovery_curve': {
        'methods': ['exact', 'langevin', 'map']
    },
    'mismatch': {
        'methods': ['exact'],
        'eps_factors': [0.0, 0.25, 1.0, 4.0],
        'shift_direction': None
    },
    'twoball': {
        'n': 24,
        'distance': 20.0,
        'radius': 1.0,
        'weight': 0.5,
        'sigma': 0.0,
        'm_list': [1, 2, 5, 10],
        'trials': 2000,
        'tv_matrices': 50,
        'tv_samples': 2000,
        'tv_mc_samples': 2000,
        'samplers': {
            'sir': {
                'particles': 2000,
                'sigma_floor': 0.1
            }
        }
    },
    'zipf_cover': {
        'n': 30,
        'num_samples': 10000,
        'etas': [1.7, 1.2, 0.85, 0.6, 0.42, 0.3],
        'deltas': [0.01, 0.5],
        'trials': 1
    },
    'bounds_report': {
        'num_configs': 20,
        'n': 8,
        'atoms': 4,
        'atom_radius': 1.0,
        'm_list': [8],
        'sigma': 0.1,
        'trials': 500,
        'eta': 0.1,
        'delta': 0.05,
        'tau': 0.5
    },
    'inpaint_demo': {
        'num_seeds': 20,
        'methods': ['map', 'exact'],
        'measurement': {
            'kind': 'mask'
        },
        'samplers': {
            'exact': {
                'noise_floor': 1e-10
            },
            'map': {
                'restarts': 16
            }
        }
    }
}

# experiments whose options carry an explicit prior
PRIOR_EXPERIMENTS = ('recovery_curve', 'mismatch', 'inpaint_demo')
# experiments where a prior is optional
OPTIONAL_PRIOR_EXPERIMENTS = ('zipf_cover', )


def _merge(base, update):
    out = copy.deepcopy(base)
    for key, value in (update or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_options(path):
    """Read a YAML (or JSON) options file."""
    try:
        with open(path, mode='r', encoding='utf-8') as f:
            opt = yaml.load(f, Loader=yaml.FullLoader)
    except OSError as error:
        raise ConfigurationError(f'cannot read options file {path}: {error}') from error
    except yaml.YAMLError as error:
        raise ConfigurationError(f'cannot parse options file {path}: {error}') from error
    if not isinstance(opt, dict):
        raise ConfigurationError(f'options file {path} does not hold a mapping.')
    return opt


def _check_count(opt, key, minimum=1):
    value = opt.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigurationError(f'{key} must be an integer >= {minimum}, but got {value!r}.')


def _check_sweeps(opt):
    for section in ('map', 'modified_map'):
        cfg = opt['samplers'][section]
        for key, positive in (('step_sizes', True), ('gammas', False)):
            values = cfg.get(key)
            if values is None:
                continue
            if not isinstance(values, list) or not values or any(
                    not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0 or (positive and v == 0)
                    for v in values):
                bound = '> 0' if positive else '>= 0'
                raise ConfigurationError(f'samplers.{section}.{key} must be a non-empty list of numbers {bound}, '
                                         f'got {values!r}.')
        if 'holdout' in cfg:
            holdout = cfg['holdout']
            if not isinstance(holdout, int) or isinstance(holdout, bool) or holdout < 1:
                raise ConfigurationError(f'samplers.{section}.holdout must be an integer >= 1, got {holdout!r}.')
    if opt['samplers']['map'].get('gammas') is not None:
        raise ConfigurationError('samplers.map.gammas is not used; plain MAP has no gamma to tune.')


def _check_methods(opt, prior):
    methods = opt.get('methods') or []
    if not methods:
        raise ConfigurationError('methods is empty.')
    sigma = opt['sigma']
    for method in methods:
        if method not in METHOD_PRIORS:
            raise ConfigurationError(f'unknown method {method!r}; known: {sorted(METHOD_PRIORS)}.')
        if prior.tag not in METHOD_PRIORS[method]:
            raise ConfigurationError(f'method {method!r} does not run on {prior.tag} priors.')
        if sigma == 0 and method in NOISE_FLOOR_KEYS and not (method == 'exact' and prior.tag == 'discrete_atoms'):
            section, key = NOISE_FLOOR_KEYS[method]
            if not opt['samplers'][section].get(key):
                raise ConfigurationError(f'method {method!r} needs sigma > 0 or samplers.{section}.{key} > 0.')


def parse_options(opt, experiment=None, seed=None, trials=None, out=None, num_workers=None):
    """Validate an options dict, fill defaults and apply command-line overrides.

    Args:
        opt (dict): Options as read from the file.
        experiment (str | None): Experiment name; overrides ``opt['name']``.
        seed, trials, out, num_workers: Optional overrides.

    Returns:
        dict: The completed options.

    Raises:
        ConfigurationError: on any inconsistency, before a single trial runs.
    """
    name = experiment or opt.get('name')
    if name not in EXPERIMENT_DEFAULTS:
        raise ConfigurationError(f'unknown experiment {name!r}; known: {sorted(EXPERIMENT_DEFAULTS)}.')
    opt = _merge(_merge(DEFAULT_OPTIONS, EXPERIMENT_DEFAULTS[name]), opt)
    opt['name'] = name
    if seed is not None:
        opt['master_seed'] = int(seed)
    if trials is not None:
        opt['trials'] = int(trials)
    if out is not None:
        opt['output']['dir'] = out
    if num_workers is not None:
        opt['num_workers'] = int(num_workers)

    _check_count(opt, 'trials')
    _check_count(opt, 'master_seed', minimum=0)
    _check_sweeps(opt)
    if not isinstance(opt['sigma'], (int, float)) or opt['sigma'] < 0:
        raise ConfigurationError(f"sigma must be a number >= 0, but got {opt['sigma']!r}.")
    opt['sigma'] = float(opt['sigma'])

    try:
        if name in PRIOR_EXPERIMENTS:
            if 'prior' not in opt:
                raise ConfigurationError(f'experiment {name} needs a prior.')
            prior = build_prior(opt['prior'])
            opt['n'] = prior.dim
            _check_methods(opt, prior)
        elif name in OPTIONAL_PRIOR_EXPERIMENTS and opt.get('prior'):
            opt['n'] = build_prior(opt['prior']).dim
    except PcsError as error:
        if isinstance(error, ConfigurationError):
            raise
        raise ConfigurationError(f'invalid prior: {error}') from error

    measurement = opt['measurement']
    if measurement.get('kind') not in ('gaussian', 'mask'):
        raise ConfigurationError(f"measurement.kind must be 'gaussian' or 'mask', got {measurement.get('kind')!r}.")
    if measurement.get('mask') is not None:
        mask = measurement['mask']
        if len(set(mask)) != len(mask) or min(mask) < 0 or max(mask) >= opt['n']:
            raise ConfigurationError(f"mask indices must be distinct and in [0, {opt['n']}), got {mask}.")
        opt['m_list'] = [len(mask)]

    if name != 'zipf_cover':
        m_list = opt.get('m_list')
        if not m_list or any(not isinstance(m, int) or m < 1 for m in m_list):
            raise ConfigurationError(f'm_list must be a non-empty list of positive integers, got {m_list!r}.')
        if measurement['kind'] == 'mask' and max(m_list) > opt['n']:
            raise ConfigurationError(f"mask measurements need m <= n = {opt['n']}, got m_list {m_list}.")

    if name == 'mismatch' and not opt.get('eps_factors'):
        raise ConfigurationError('mismatch needs a non-empty eps_factors list to build P from R.')
    if name == 'twoball':
        if opt['sigma'] == 0 and not opt['samplers']['sir']['sigma_floor']:
            raise ConfigurationError('twoball with sigma = 0 needs samplers.sir.sigma_floor > 0.')
    if name == 'zipf_cover':
        if not opt['etas'] or any(e <= 0 for e in opt['etas']):
            raise ConfigurationError(f"etas must be positive, got {opt['etas']!r}.")
        if any(not 0 <= d < 1 for d in opt['deltas']):
            raise ConfigurationError(f"deltas must lie in [0, 1), got {opt['deltas']!r}.")
    if name == 'bounds_report':
        _check_count(opt, 'num_configs')
        _check_count(opt, 'atoms')
    if name == 'inpaint_demo':
        _check_count(opt, 'num_seeds')
        if measurement['kind'] != 'mask':
            raise ConfigurationError('inpaint_demo needs mask measurements.')
    return opt
