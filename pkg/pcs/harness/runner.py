import time
import torch
from multiprocessing import Pool
from tqdm import tqdm

from pcs.numeric import stable_seed
from pcs.utils import get_num_workers

__all__ = ['trial_seed', 'run_trials', 'Timer']


def trial_seed(master_seed, experiment, m, trial):
    """Seed of one trial; depends only on the tuple, never on execution order."""
    return stable_seed(master_seed, experiment, m, trial)


def _init_worker():
    # one BLAS / torch thread per process
    torch.set_num_threads(1)


def run_trials(worker, tasks, num_workers=1, desc='Trials'):
    """Run ``worker(*task)`` for every task and return the results in task order.

    With more than one worker the tasks go to a process pool, and a progress bar advances as they
    complete.
    """
    num_workers = get_num_workers(num_workers)
    pbar = tqdm(total=len(tasks), unit='trial', desc=desc)
    if num_workers <= 1 or len(tasks) <= 1:
        results = []
        for task in tasks:
            results.append(worker(*task))
            pbar.update(1)
    else:
        pool = Pool(num_workers, initializer=_init_worker)
        handles = [pool.apply_async(worker, args=task, callback=lambda arg: pbar.update(1)) for task in tasks]
        pool.close()
        pool.join()
        results = [h.get() for h in handles]
    pbar.close()
    return results


class Timer():
    """Wall-clock milliseconds, or always 0 when runtimes are not recorded."""

    def __init__(self, enabled):
        self.enabled = enabled
        self.start = None

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed_ms = (time.perf_counter() - self.start) * 1e3 if self.enabled else 0.0
        return False
