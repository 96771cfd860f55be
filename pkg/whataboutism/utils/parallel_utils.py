import concurrent.futures
import logging
import os

logger = logging.getLogger(__name__)


def resolve_workers(workers, num_tasks):
    """Determines how many threads to use for `num_tasks` independent tasks.

    Parameters
    ----------
    workers : int or None
        Requested number of workers. ``None`` means one per CPU.
    num_tasks : int
        Number of tasks that will be submitted.

    Returns
    -------
    int
        At least one and never more than `num_tasks`.
    """
    if workers is None:
        num_cpus = os.cpu_count()
        workers = 1 if num_cpus is None else num_cpus
    return max(1, min(int(workers), num_tasks))


def ordered_map(func, items, workers=None):
    """Applies `func` to every item, possibly on several threads.

    Results are returned in the order of `items`, never in completion
    order, so aggregates built from them do not depend on `workers`.

    Parameters
    ----------
    func : callable
        Function of a single argument.
    items : iterable
        Arguments for `func`.
    workers : int or None
        Number of threads; see `resolve_workers`.

    Returns
    -------
    list
        ``[func(item) for item in items]``.
    """
    items = list(items)
    if not items:
        return []

    num_threads = resolve_workers(workers, len(items))
    if num_threads == 1:
        return [func(item) for item in items]

    logger.debug('Running %d task(s) on %d thread(s)', len(items), num_threads)
    with concurrent.futures.ThreadPoolExecutor(
            max_workers=num_threads
    ) as executor:
        return list(executor.map(func, items))
