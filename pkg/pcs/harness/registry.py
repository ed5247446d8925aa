from basicsr.utils.registry import Registry

__all__ = ['EXPERIMENT_REGISTRY', 'ENTRY_PREFIX']

# entry points are registered under their function name, run_<experiment>
EXPERIMENT_REGISTRY = Registry('experiment')
ENTRY_PREFIX = 'run_'
