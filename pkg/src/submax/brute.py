"""Exhaustive ground truth for small instances."""
import numpy as np

from .setfn import TABLE_MAX_N, SizeError, int_to_mask


def brute_force_opt(f, P):
    """argmax of f(S) over sets with 1_S in P.

    Ties go to the smallest bitmask (bit u is element u).  Returns
    ``(mask, value)``.
    """
    if f.n > TABLE_MAX_N:
        raise SizeError(f"brute-force OPT limited to n <= {TABLE_MAX_N} (got {f.n})")
    if P.n != f.n:
        raise ValueError("function and constraint disagree on n")
    vals = f.table()
    feas = P.feasible_table()
    masked = np.where(feas, vals, -np.inf)
    best = int(np.argmax(masked))
    return int_to_mask(best, f.n), float(vals[best])
