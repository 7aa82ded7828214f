from fractions import Fraction
from functools import lru_cache
from math import ceil

import numpy as np

# recovers the decimal the caller typed (0.1 -> 1/10) before exact comparison
_MAX_DENOMINATOR = 10**9


def as_rational(x: float) -> Fraction:
    return Fraction(x).limit_denominator(_MAX_DENOMINATOR)


@lru_cache(maxsize=4096)
def max_active(k: int, t_h: float) -> int:
    """Largest active-neighbour count that is still strictly below ``t_h * k``.

    Returns -1 when no count qualifies (``t_h * k <= 0``).
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    bound = as_rational(t_h) * k
    if bound <= 0:
        return -1
    return ceil(bound) - 1


def max_active_table(max_degree: int, t_h: float) -> np.ndarray:
    return np.array([max_active(k, t_h) for k in range(max_degree + 1)], dtype=np.int64)
