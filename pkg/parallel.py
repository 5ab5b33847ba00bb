"""Order-preserving fan-out of independent work items over worker processes."""

from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
import logging
from typing import Any, TypeVar


logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

# Read-only data shared by every work item of the running parallel_map.
_context: Any = None


def _install_context(context: Any) -> None:
    global _context
    _context = context


def worker_context() -> Any:
    """Return the context handed to the parallel_map running this item."""
    if _context is None:
        raise RuntimeError('no worker context is installed')
    return _context


def parallel_map(
    function: Callable[[T], R],
    items: Iterable[T],
    jobs: int = 1,
    context: Any = None,
) -> list[R]:
    """Apply a function to every item and return the results in item order.

    With jobs == 1 everything runs in this process. Otherwise the items are
    spread over a process pool; the function and items must be picklable.
    The context is sent to each worker once, when it starts, and is read
    back with worker_context(). Results never depend on the number of
    workers.
    """
    if jobs < 1:
        raise ValueError('jobs must be a positive integer')
    work = list(items)
    if jobs == 1 or len(work) < 2:
        previous = _context
        _install_context(context)
        try:
            return [function(item) for item in work]
        finally:
            _install_context(previous)
    workers = min(jobs, len(work))
    logger.debug(
        'spreading %d work items over %d processes', len(work), workers,
    )
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_install_context,
        initargs=(context,),
    ) as executor:
        return list(executor.map(function, work))
