"""
Paired sign-flip Monte Carlo permutation test over per-step APR series
"""

import logging

import numpy as np

from ..errors import UsageError

logger = logging.getLogger(__name__)


def permutation_test(apr_series_a, apr_series_b, n_perm: int = 10_000, seed: int = 0) -> float:
    """Two-sided p-value for the mean per-step difference.

    Each step's difference keeps or flips its sign with probability 1/2;
    p = (1 + #{|permuted mean| >= |observed mean|}) / (1 + n_perm).
    Steps where either series is NaN are dropped pairwise.
    """
    a = np.asarray(apr_series_a, dtype=np.float64)
    b = np.asarray(apr_series_b, dtype=np.float64)
    if a.shape != b.shape:
        raise UsageError(f"series have different shapes {a.shape} and {b.shape}")
    if n_perm < 1:
        raise UsageError(f"n_perm must be positive, got {n_perm}")

    keep = np.isfinite(a) & np.isfinite(b)
    diff = a[keep] - b[keep]
    if diff.size == 0:
        raise UsageError("no step has a defined value in both series")

    observed = abs(diff.mean())
    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=(n_perm, diff.size))
    permuted = np.abs((signs * diff).mean(axis=1))
    exceed = int(np.sum(permuted >= observed))
    p_value = (1 + exceed) / (1 + n_perm)

    logger.debug(
        f"[METRICS] permutation test: observed |mean diff|={observed:.6f}, "
        f"{exceed}/{n_perm} permutations at least as extreme, p={p_value:.6f}"
    )
    return float(p_value)
