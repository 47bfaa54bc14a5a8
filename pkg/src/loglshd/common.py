import hashlib
from collections.abc import Callable, Iterable, Sized
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from tqdm.auto import tqdm
from tqdm.contrib.logging import logging_redirect_tqdm

T = TypeVar('T')
R = TypeVar('R')


def derive_seed(
    seed: int,
    stage: str,
) -> int:
    """stage-specific sub-seed, stable across platforms and Python versions"""
    digest = hashlib.blake2b(
        seed.to_bytes(8, 'little', signed=True),
        key=stage.encode('utf-8'),
        digest_size=4,
    ).digest()
    return int.from_bytes(digest, 'little', signed=False)


def map_ordered(
    func: Callable[[T], R],
    items: Iterable[T],
    threads: int = 1,
    progress: bool = False,
    desc: str | None = None,
) -> list[R]:
    """apply a function to all items, optionally in a thread pool; the results
    keep the input order regardless of the number of threads"""
    total = len(items) if isinstance(items, Sized) else None
    with logging_redirect_tqdm():
        if threads <= 1:
            bar = tqdm(items, total=total, desc=desc, disable=not progress)
            return [func(item) for item in bar]
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = executor.map(func, items)
            return list(tqdm(results, total=total, desc=desc, disable=not progress))
