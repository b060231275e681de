import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from utils.constants import THREADS_ENV

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Parsed lazily so tests and subcommands can set the env var first
_worker_count: Optional[int] = None


def get_worker_count() -> int:
    global _worker_count
    if _worker_count is None:
        raw = os.getenv(THREADS_ENV)
        if not raw:
            _worker_count = 1
            return _worker_count

        try:
            _worker_count = max(1, int(raw))
            logger.info(f"Parallelism capped at {_worker_count} workers")
        except ValueError:
            logger.warning(f"Environment variable {THREADS_ENV}={raw!r} is not an integer, running serially")
            _worker_count = 1

    return _worker_count


def reset_worker_count():
    global _worker_count
    _worker_count = None


def map_ordered(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Apply func to every item, in parallel when allowed, results in input order"""
    items = list(items)
    workers = min(get_worker_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
