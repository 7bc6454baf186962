from __future__ import annotations

import math
import os
import platform
import random
import sys
from fractions import Fraction
from importlib import metadata
from multiprocessing import Pool

import gmpy2
import numpy as np
import tqdm

THREADS_ENV = "ORDSUM_THREADS"


def provide_determinism(seed=42):
    """Seeds every random source ordsum draws from and returns a private generator."""
    random.seed(seed)
    np.random.seed(seed)
    return random.Random(seed)


def worker_count():
    """Number of worker processes, from ``ORDSUM_THREADS`` or the available cores."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def chunk_ranges(lo, hi, n_chunks):
    """Splits the closed range [lo, hi] into at most ``n_chunks`` consecutive closed ranges."""
    if hi < lo:
        return []
    n_chunks = max(1, min(n_chunks, hi - lo + 1))
    size = -(-(hi - lo + 1) // n_chunks)
    return [(start, min(start + size - 1, hi)) for start in range(lo, hi + 1, size)]


def parallel_map(fn, chunks, workers=None, desc=None, verbose=False):
    """Applies ``fn`` to every chunk, in order.

    :param fn: Picklable top-level function taking one chunk
    :type fn: callable
    :param chunks: Work items, typically ``(lo, hi, ...)`` tuples
    :type chunks: list
    :param workers: Number of processes, defaults to ``worker_count()``
    :type workers: int, optional
    :param desc: Progress bar label
    :type desc: str, optional
    :param verbose: If True, shows a tqdm progress bar
    :type verbose: bool, optional
    :return: Results in chunk order, so merges are deterministic
    :rtype: list
    """
    workers = worker_count() if workers is None else workers
    results = []
    with tqdm.tqdm(total=len(chunks), desc=desc, disable=not verbose, file=sys.stderr) as progress_bar:
        if workers <= 1 or len(chunks) <= 1:
            for chunk in chunks:
                results.append(fn(chunk))
                progress_bar.update(1)
        else:
            with Pool(processes=min(workers, len(chunks))) as pool:
                for result in pool.imap(fn, chunks):
                    results.append(result)
                    progress_bar.update(1)
    return results


def exact_sum(buckets):
    """Exact value of sum(numerator / denominator) over a ``{denominator: numerator}`` mapping.

    Summing over a common denominator keeps the cost linear in the number of
    buckets instead of paying a gcd per term.
    """
    if not buckets:
        return Fraction(0)
    common = math.lcm(*buckets)
    total = sum(num * (common // den) for den, num in buckets.items())
    return Fraction(total, common)


def merge_buckets(target, source):
    for key, value in source.items():
        target[key] = target.get(key, 0) + value
    return target


def print_environment_info(file=sys.stderr):
    """
    Prints the versions and worker settings a result depends on.
    Include the printout when reporting a wrong or slow result.
    """

    print("Environment information:", file=file)

    print(f"System: {platform.system()} {platform.release()}", file=file)
    print(f"Python: {platform.python_version()}", file=file)

    try:
        print(f"ordsum: {metadata.version('ordsum')}", file=file)
    except metadata.PackageNotFoundError:
        print("ordsum: not installed, running from source", file=file)
    print(f"gmpy2: {gmpy2.version()} ({gmpy2.mp_version()})", file=file)
    print(f"numpy: {np.__version__}", file=file)

    raw = os.environ.get(THREADS_ENV)
    print(f"{THREADS_ENV}: {raw if raw else 'unset'}", file=file)
    try:
        print(f"Workers: {worker_count()}", file=file)
    except ValueError as e:
        print(f"Workers: invalid ({e})", file=file)
