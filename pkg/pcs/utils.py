import logging
import os
from basicsr.utils import get_root_logger as basicsr_root_logger
from basicsr.utils.options import dict2str

__all__ = ['LOGGER_NAME', 'dict2str', 'get_root_logger', 'get_num_workers']

LOGGER_NAME = 'pcs'


def get_root_logger(log_level=logging.INFO, log_file=None):
    """The ``pcs`` logger.

    basicsr sets the level and attaches the file handler only on the first call for a name, so
    the entry script makes that call once the output folder is known.
    """
    return basicsr_root_logger(logger_name=LOGGER_NAME, log_level=log_level, log_file=log_file)


def get_num_workers(requested=None):
    """Number of worker processes for trial loops.

    ``PCS_THREADS`` caps the count; ``requested`` may lower it further.
    """
    num = os.cpu_count() or 1
    env = os.environ.get('PCS_THREADS')
    if env:
        try:
            num = min(num, max(1, int(env)))
        except ValueError:
            get_root_logger().warning(f'Ignoring PCS_THREADS={env!r}: not an integer.')
    if requested is not None:
        num = min(num, max(1, int(requested)))
    return num
