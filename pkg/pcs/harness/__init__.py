import importlib
from basicsr.utils import scandir
from os import path as osp

from pcs.harness.options import load_options, parse_options
from pcs.harness.registry import ENTRY_PREFIX, EXPERIMENT_REGISTRY

__all__ = ['EXPERIMENTS', 'EXPERIMENT_REGISTRY', 'load_options', 'parse_options', 'run_experiment']

# automatically scan and import experiment modules for registry
# scan all the files that end with '_experiment.py' under the harness folder
harness_folder = osp.dirname(osp.abspath(__file__))
experiment_filenames = sorted(
    osp.splitext(osp.basename(v))[0] for v in scandir(harness_folder) if v.endswith('_experiment.py'))
# import all the experiment modules
_experiment_modules = [importlib.import_module(f'pcs.harness.{file_name}') for file_name in experiment_filenames]

EXPERIMENTS = tuple(sorted(key[len(ENTRY_PREFIX):] for key in EXPERIMENT_REGISTRY.keys()))


def run_experiment(opt):
    """Run the experiment named by ``opt['name']`` on parsed options."""
    return EXPERIMENT_REGISTRY.get(f"{ENTRY_PREFIX}{opt['name']}")(opt)
