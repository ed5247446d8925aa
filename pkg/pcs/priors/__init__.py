import importlib
import json
from basicsr.utils import scandir
from os import path as osp

from pcs.errors import InvalidArgumentError
from pcs.priors.base import PRIOR_REGISTRY, Prior
from pcs.utils import get_root_logger

__all__ = [
    'Prior', 'PRIOR_REGISTRY', 'PRIOR_TYPES', 'build_prior', 'sample', 'log_density', 'smoothed_score',
    'support_radius', 'shift_prior', 'prior_to_json', 'prior_from_json'
]

# automatically scan and import prior modules for registry
# scan all the files that end with '_prior.py' under the priors folder
prior_folder = osp.dirname(osp.abspath(__file__))
prior_filenames = sorted(osp.splitext(osp.basename(v))[0] for v in scandir(prior_folder) if v.endswith('_prior.py'))
# import all the prior modules
_prior_modules = [importlib.import_module(f'pcs.priors.{file_name}') for file_name in prior_filenames]

# JSON type tag -> prior class
PRIOR_TYPES = {PRIOR_REGISTRY.get(name).tag: PRIOR_REGISTRY.get(name) for name in sorted(PRIOR_REGISTRY.keys())}
globals().update({cls.__name__: cls for cls in PRIOR_TYPES.values()})
__all__ += [cls.__name__ for cls in PRIOR_TYPES.values()]


def build_prior(spec):
    """Build a prior from its dictionary form ``{'type': tag, ...}``."""
    if isinstance(spec, Prior):
        return spec
    if not isinstance(spec, dict) or 'type' not in spec:
        raise InvalidArgumentError(f"a prior spec is a dict with a 'type' key, but got {spec!r}.")
    if spec['type'] not in PRIOR_TYPES:
        raise InvalidArgumentError(f"unknown prior type {spec['type']!r}; known: {sorted(PRIOR_TYPES)}.")
    return PRIOR_TYPES[spec['type']].from_dict(spec)


def sample(prior, rng, num=None):
    return prior.sample(rng, num)


def log_density(prior, x, s=0.0):
    if not hasattr(prior, 'log_density'):
        raise InvalidArgumentError(f'{prior.tag} priors have no log density.')
    return prior.log_density(x, s) if s else prior.log_density(x)


def smoothed_score(prior, x, s=0.0):
    if s < 0:
        raise InvalidArgumentError(f'smoothing scale must be >= 0, but got {s}.')
    if not hasattr(prior, 'smoothed_score'):
        raise InvalidArgumentError(f'{prior.tag} priors have no smoothed score.')
    return prior.smoothed_score(x, s)


def support_radius(prior):
    radius = prior.support_radius()
    if not prior.exact_support:
        get_root_logger().debug(f'support radius {radius:.4g} of a {prior.tag} prior holds 1 - 1e-6 of the mass.')
    return radius


def shift_prior(prior, v):
    """Translate every component by ``v``; W_inf between the two priors is ||v||."""
    return prior.shift(v)


def prior_to_json(prior):
    return json.dumps(prior.to_dict())


def prior_from_json(text):
    return build_prior(json.loads(text))
