"""Fan independent Monte Carlo runs out to worker processes."""

from concurrent.futures import ProcessPoolExecutor

import numpy as np


def _chunk_worker(func, indices):
    return [func(i) for i in indices]


def map_runs(func, n_runs: int, workers: int = 1, chunk_size: int = 256) -> list:
    """Evaluate ``func(run_index)`` for every run, results in run-index order.

    ``func`` must be picklable when ``workers > 1``.
    """
    if workers <= 1 or n_runs < 2 * chunk_size:
        return [func(i) for i in range(n_runs)]
    chunks = [range(s, min(s + chunk_size, n_runs)) for s in range(0, n_runs, chunk_size)]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for part in ex.map(_chunk_worker, [func] * len(chunks), chunks):
            out.extend(part)
    return out


def mean_and_stderr(values) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values)))
