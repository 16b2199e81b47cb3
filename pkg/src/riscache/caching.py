"""Zipf popularity, probabilistic content placement and backhaul cost."""

import numpy as np

from .validation import check_real_array

BUDGET_TOL = 1e-9


def zipf_popularity(F, eps):
    """Request probabilities b_f proportional to f^(-eps), f = 1..F."""
    if F < 1:
        raise ValueError("F must be >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    w = np.arange(1, F + 1, dtype=float) ** (-float(eps))
    return w / w.sum()


def _check_budget(S0, F):
    if S0 < 0:
        raise ValueError(f"cache size S0 must be >= 0, got {S0}")
    if S0 > F:
        raise ValueError(f"cache size S0={S0} exceeds the number of files F={F}")


def optimize_placement(b, S0):
    """Minimize sum_f (1 - c_f) b_f over the box and the cache budget.

    The objective is linear, so filling the cache in order of popularity is
    optimal: whole files first, then the fractional remainder. Ties keep the
    lower file index first.
    """
    b = check_real_array(b, ndim=1, name="b")
    F = b.size
    _check_budget(S0, F)
    order = np.argsort(-b, kind="stable")
    c_sorted = np.clip(S0 - np.arange(F), 0.0, 1.0)
    c = np.empty(F)
    c[order] = c_sorted
    return c


def urc_placement(F, S0):
    """Uniform random caching: every file cached with probability S0 / F."""
    _check_budget(S0, F)
    return np.full(F, S0 / F)


def fppc_placement(b, S0):
    """Popularity-proportional caching probabilities.

    c_f is proportional to b_f and scaled to the budget S0; files whose
    probability would exceed one are capped and the excess is redistributed
    over the remaining files until nothing exceeds one.
    """
    b = check_real_array(b, ndim=1, name="b")
    F = b.size
    _check_budget(S0, F)
    c = np.zeros(F)
    capped = np.zeros(F, dtype=bool)
    budget = float(S0)
    for _ in range(F + 1):
        free = ~capped
        mass = b[free].sum()
        if budget <= 0 or not free.any():
            break
        if mass <= 0:
            c[free] = budget / free.sum()
        else:
            c[free] = budget * b[free] / mass
        over = free & (c > 1.0)
        if not over.any():
            break
        c[over] = 1.0
        capped |= over
        budget = S0 - capped.sum()
    return np.clip(c, 0.0, 1.0)


def backhaul_cost(c, b, rate_targets):
    """Expected backhaul rate sum_f sum_k (1 - c_f) b_f R_k0 in bit/s.

    ``b`` must be a probability vector. The uncached mass is evaluated as
    (1 - c_1) + sum_f (c_1 - c_f) b_f, which equals sum_f (1 - c_f) b_f when
    sum_f b_f = 1 and makes a constant placement cost exactly
    (1 - c) sum_k R_k0 whatever the popularity.
    """
    c = check_real_array(c, ndim=1, name="c")
    b = check_real_array(b, ndim=1, name="b")
    if c.shape != b.shape:
        raise ValueError(f"placement and popularity differ in length: {c.size} vs {b.size}")
    if abs(b.sum() - 1.0) > 1e-9:
        raise ValueError(f"popularity must sum to one, got {b.sum()}")
    rates = np.atleast_1d(np.asarray(rate_targets, dtype=float))
    ref = c[0] if c.size else 0.0
    return float(((1.0 - ref) + np.dot(ref - c, b)) * rates.sum())


def placement_objective(c, b):
    """Uncached request mass sum_f (1 - c_f) b_f."""
    return float(np.dot(1.0 - np.asarray(c), np.asarray(b)))


def check_placement(c, S0):
    """Raise if ``c`` violates the box or the cache budget."""
    c = np.asarray(c)
    if np.any(c < 0) or np.any(c > 1):
        raise ValueError("placement probabilities must lie in [0, 1]")
    if c.sum() > S0 + BUDGET_TOL:
        raise ValueError(f"placement uses {c.sum()} > S0={S0}")
    return c


PLACEMENTS = {
    "oc": lambda b, S0: optimize_placement(b, S0),
    "fppc": lambda b, S0: fppc_placement(b, S0),
    "urc": lambda b, S0: urc_placement(len(b), S0),
    "none": lambda b, S0: np.zeros(len(b)),
}


def make_placement(strategy, b, S0):
    """Dispatch on a caching strategy name (oc, fppc, urc or none)."""
    try:
        fn = PLACEMENTS[strategy]
    except KeyError:
        raise ValueError(f"unknown caching strategy {strategy!r}") from None
    return fn(b, S0)
