"""Deterministic blocked parallelism for dense kernels.

Multi-threaded BLAS may split a single GEMM differently depending on the
thread count, which changes floating-point summation order and therefore the
last bits of the result. Everything here instead partitions work into blocks
of a fixed size, runs each block on single-threaded BLAS, and combines
partial results in block order. Outputs are then bit-identical for any
worker count; only wall time changes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Sequence, TypeVar

import numpy as np
from threadpoolctl import threadpool_limits

THREADS_ENV = "BLI_THREADS"

# Fixed block sizes. These are part of the numerical behaviour: changing them
# can change results in the last bit, so they are constants, not parameters.
ROW_BLOCK = 8192

T = TypeVar("T")


def resolve_threads(threads: int | None = None) -> int:
    """Resolve a worker count: explicit argument, then $BLI_THREADS, then CPUs."""
    if threads is not None:
        if threads < 1:
            raise ValueError("thread count must be at least 1")
        return int(threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be at least 1, got {value}")
        return value
    return os.cpu_count() or 1


def iter_blocks(n: int, block: int) -> Iterator[tuple[int, int]]:
    for start in range(0, n, block):
        yield start, min(start + block, n)


def run_blocks(
    fn: Callable[[int, int], T],
    n_items: int,
    block: int,
    threads: int | None = None,
) -> list[T]:
    """Run fn(start, stop) over fixed blocks, results in block order.

    Workers must write only to disjoint output regions (or return partials
    for the caller to combine in order).
    """
    spans = list(iter_blocks(n_items, block))
    if not spans:
        return []
    workers = min(resolve_threads(threads), len(spans))
    with threadpool_limits(limits=1):
        if workers == 1:
            return [fn(start, stop) for start, stop in spans]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda span: fn(*span), spans))


def matmul_rows(a: np.ndarray, b: np.ndarray, threads: int | None = None) -> np.ndarray:
    """a @ b computed by fixed row blocks of a."""
    out = np.empty((a.shape[0], b.shape[1]), dtype=np.result_type(a, b))

    def work(start: int, stop: int) -> None:
        out[start:stop] = a[start:stop] @ b

    run_blocks(work, a.shape[0], ROW_BLOCK, threads)
    return out


def gram(a: np.ndarray, threads: int | None = None) -> np.ndarray:
    """a.T @ a as an ordered sum of per-block Gram matrices."""
    parts = run_blocks(lambda s, e: a[s:e].T @ a[s:e], a.shape[0], ROW_BLOCK, threads)
    total = np.zeros((a.shape[1], a.shape[1]), dtype=np.float64)
    for part in parts:
        total += part
    return total


def cross_gram(a: np.ndarray, b: np.ndarray, threads: int | None = None) -> np.ndarray:
    """a.T @ b as an ordered sum of per-row-block partial products."""
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row counts differ: {a.shape[0]} vs {b.shape[0]}")
    parts = run_blocks(lambda s, e: a[s:e].T @ b[s:e], a.shape[0], ROW_BLOCK, threads)
    total = np.zeros((a.shape[1], b.shape[1]), dtype=np.float64)
    for part in parts:
        total += part
    return total


def ordered_sum(parts: Sequence[np.ndarray], shape: tuple[int, ...]) -> np.ndarray:
    """Sum arrays in the given order into a fresh float64 accumulator."""
    total = np.zeros(shape, dtype=np.float64)
    for part in parts:
        total += part
    return total
