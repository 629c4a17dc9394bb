"""
Ordered parallel map
Thread-pool map whose results come back in input order, so reductions over them are reproducible
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply func to every item, possibly on several threads

    Args:
        func: Pure function
        items: Inputs
        threads: Worker count, defaults to config.ANISODROP_THREADS

    Returns:
        List of results in input order
    """
    items = list(items)
    workers = min(threads or config.ANISODROP_THREADS, len(items))
    if workers <= 1:
        return [func(item) for item in items]
    logger.debug("ordered_map: %d items on %d threads", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
