from __future__ import annotations

import asyncio
import functools
import logging
from asyncio import Semaphore
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Awaitable, Callable, Iterable, List, Optional, Sequence, TypeVar

import psutil

__all__ = (
    "bounded_gather",
    "default_worker_count",
    "map_bounded",
)

log = logging.getLogger("phaselab.utils")

_T = TypeVar("_T")
_S = TypeVar("_S")


async def _sem_wrapper(sem, task):
    async with sem:
        return await task


def bounded_gather(
    *coros_or_futures,
    return_exceptions: bool = False,
    limit: int = 4,
    semaphore: Optional[Semaphore] = None,
) -> Awaitable[List[Any]]:
    """
    A semaphore-bounded wrapper to :meth:`asyncio.gather`.

    Results come back in the order the awaitables were given.

    Parameters
    ----------
    *coros_or_futures
        The awaitables to run in a bounded concurrent fashion.
    return_exceptions : bool
        If true, gather exceptions in the result list instead of raising.
    limit : Optional[`int`]
        The maximum number of concurrent tasks. Used when no ``semaphore``
        is passed.
    semaphore : Optional[:class:`asyncio.Semaphore`]
        The semaphore to use for bounding tasks. If `None`, create one
        using ``limit``.

    Raises
    ------
    TypeError
        When invalid parameters are passed
    """
    if semaphore is None:
        if not isinstance(limit, int) or limit <= 0:
            raise TypeError("limit must be an int > 0")

        semaphore = Semaphore(limit)

    tasks = (_sem_wrapper(semaphore, task) for task in coros_or_futures)

    return asyncio.gather(*tasks, return_exceptions=return_exceptions)


def default_worker_count() -> int:
    # physical cores; numpy releases the GIL inside the larger kernels only
    return psutil.cpu_count(logical=False) or 1


async def _run_in_executor(executor: ThreadPoolExecutor, func: Callable[[_S], _T], item: _S) -> _T:
    loop = asyncio.get_running_loop()
    return await loop.run_in_executor(executor, func, item)


async def _map_in_executor(
    func: Callable[[_S], _T], items: Sequence[_S], limit: int
) -> List[_T]:
    # the coroutines only submit their job once bounded_gather lets them run
    with ThreadPoolExecutor(max_workers=limit) as executor:
        coros = [_run_in_executor(executor, func, item) for item in items]
        return await bounded_gather(*coros, limit=limit)


def map_bounded(
    func: Callable[[_S], _T], items: Iterable[_S], *, workers: Optional[int] = None
) -> List[_T]:
    """Apply ``func`` to every item with at most ``workers`` running at once.

    The output order always matches ``items``. With one worker the items
    are processed inline, which keeps tracebacks simple.
    """
    items = list(items)
    limit = workers if workers is not None else default_worker_count()
    if not isinstance(limit, int) or limit <= 0:
        raise TypeError("workers must be an int > 0")
    if limit == 1 or len(items) <= 1:
        return [func(item) for item in items]
    log.debug("Fanning out %d tasks over %d workers", len(items), limit)
    return asyncio.run(_map_in_executor(func, items, limit))
