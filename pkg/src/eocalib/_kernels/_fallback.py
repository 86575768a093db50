"""Pure-numpy implementations of the hot kernels.

Semantics are identical to the compiled backend in ``_core``; reductions
follow the same left-to-right order so results agree to rounding error.
"""

import numpy as np


def km_curve(z, delta, t):
    """Product-limit scan over the distinct observed times up to ``t``.

    At each distinct time the at-risk count includes every subject whose
    follow-up reaches that time; events at a tied time are processed
    before censorings leave the risk set.

    Returns ``(times, at_risk, events, survival, greenwood_var,
    degenerate)`` where the first three arrays cover the distinct event
    times (times with at least one event) up to ``t``.  ``greenwood_var``
    is NaN and ``degenerate`` True when the survival estimate reaches
    zero, where the variance sum has a vanishing denominator.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    delta = np.ascontiguousarray(delta, dtype=np.int8)
    n = z.shape[0]

    sub = z <= t
    zs = z[sub]
    ds = delta[sub]
    order = np.argsort(zs, kind="stable")
    zs = zs[order]
    ds = ds[order]

    if zs.shape[0] == 0:
        empty_f = np.empty(0, dtype=np.float64)
        empty_i = np.empty(0, dtype=np.int64)
        return empty_f, empty_i, empty_i, 1.0, 0.0, False

    _, first = np.unique(zs, return_index=True)
    group_sizes = np.diff(np.append(first, zs.shape[0]))
    d_counts = np.add.reduceat(ds.astype(np.int64), first)
    at_risk = n - np.concatenate(([0], np.cumsum(group_sizes)[:-1]))

    ev = d_counts > 0
    times = zs[first][ev]
    risk = at_risk[ev]
    events = d_counts[ev]

    if events.shape[0] == 0:
        return times, risk, events, 1.0, 0.0, False

    degenerate = bool(np.any(events == risk))
    factors = 1.0 - events / risk
    survival = float(np.cumprod(factors)[-1])
    if degenerate:
        survival = 0.0
        greenwood = float("nan")
    else:
        terms = events / (risk * (risk - events))
        greenwood = survival * survival * float(np.cumsum(terms)[-1])
    return times, risk, events, survival, greenwood, degenerate


def calibration_sums(z, delta, e_t0, e_z, t0):
    """Partition counts and expected-risk sums in one pass.

    ``e_t0`` and ``e_z`` hold each subject's predicted risk at the horizon
    and at their own follow-up time.  Returns ``(n_ks, n_uks, o_ks,
    e_full, e_ks, e_uks, e_m1, e_m2)``.
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    delta = np.ascontiguousarray(delta, dtype=np.int8)
    e_t0 = np.ascontiguousarray(e_t0, dtype=np.float64)
    e_z = np.ascontiguousarray(e_z, dtype=np.float64)

    unknown = (delta == 0) & (z < t0)
    n_uks = int(np.count_nonzero(unknown))
    n_ks = z.shape[0] - n_uks
    o_ks = int(np.count_nonzero((delta == 1) & (z <= t0)))

    e_full = float(np.sum(e_t0))
    e_uks = float(np.sum(e_t0[unknown]))
    e_ks = float(np.sum(e_t0[~unknown]))
    e_m1 = float(np.sum(np.where(z < t0, e_z, e_t0)))
    e_m2 = float(np.sum(np.where(unknown, e_z, e_t0)))
    return n_ks, n_uks, o_ks, e_full, e_ks, e_uks, e_m1, e_m2
