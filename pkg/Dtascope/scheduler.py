import logging
import os
from typing import Any, Callable, List, Optional, Sequence

from joblib import Parallel, delayed
from threadpoolctl import threadpool_limits

from .app.config import Config

logger = logging.getLogger(__name__)


def resolve_n_jobs(n_jobs: Optional[int] = None) -> int:
    """Explicit value first, then DTA_THREADS, then the number of logical cores."""
    if n_jobs is None:
        n_jobs = Config.DTA_THREADS
    if n_jobs is None or n_jobs <= 0:
        n_jobs = os.cpu_count() or 1
    return int(n_jobs)


def _single_threaded(func: Callable, args: Sequence[Any]):
    # one BLAS thread per worker; the fits themselves are the unit of parallelism
    with threadpool_limits(limits=1):
        return func(*args)


def run_parallel(func: Callable, tasks: Sequence[Sequence[Any]], n_jobs: Optional[int] = None) -> List[Any]:
    """
    Run func(*args) for every args tuple in `tasks`. Results come back in task
    order regardless of which worker finishes first.
    """
    tasks = list(tasks)
    if not tasks:
        return []
    workers = min(resolve_n_jobs(n_jobs), len(tasks))
    logger.debug("Scheduling %d tasks on %d workers", len(tasks), workers)
    if workers == 1:
        return [_single_threaded(func, args) for args in tasks]
    return Parallel(n_jobs=workers)(delayed(_single_threaded)(func, args) for args in tasks)
