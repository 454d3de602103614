"""Jitted inner loops for the long-horizon solvers.

These kernels trade the fixed summation order of the reference
recursions for speed; they back the long-run average-cost bracketing and
the event simulator, never the finite-horizon tables that other modules
compare against each other.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def span_loop(v, lam, d, mu_sum, h_star, stay, tau, span_tol, max_steps):
    """Relative value iteration with running span bounds.

    One sweep applies the damped backup ``(1-tau)*T(v) + tau*v`` and
    records the min/max one-step difference; the running extremes bracket
    the optimal per-epoch cost of the damped chain.  ``v`` is shifted so
    ``v[0] == 0`` after every sweep, which keeps magnitudes bounded
    without changing differences.

    Returns ``(v, lo, hi, steps, converged)``.
    """
    m = v.shape[0] - 1
    k = lam.shape[0]
    one = 1.0 - tau
    lo = -1.0e300
    hi = 1.0e300
    steps = 0
    new = np.empty(m + 1)
    while steps < max_steps:
        dmin = 1.0e300
        dmax = -1.0e300
        for y in range(m + 1):
            acc = 0.0
            for j in range(k):
                rej = v[y] + d[j]
                if y > 0 and v[y - 1] < rej:
                    acc += lam[j] * v[y - 1]
                else:
                    acc += lam[j] * rej
            rep = v[y]
            if y < m and v[y + 1] < rep:
                rep = v[y + 1]
            acc += mu_sum * rep
            acc += h_star * y
            acc += stay * v[y]
            nv = one * acc + tau * v[y]
            diff = nv - v[y]
            if diff < dmin:
                dmin = diff
            if diff > dmax:
                dmax = diff
            new[y] = nv
        if dmin > lo:
            lo = dmin
        if dmax < hi:
            hi = dmax
        base = new[0]
        for y in range(m + 1):
            v[y] = new[y] - base
        steps += 1
        if hi - lo <= span_tol:
            return v, lo, hi, steps, True
    return v, lo, hi, steps, False


@njit(cache=True)
def rate_spread_loop(v, lam, d, mu_sum, h_star, stay, gamma, target, max_steps):
    """Iterate the exact (undamped) backup until the per-time-unit rate
    ``gamma * v[y] / t`` agrees across start states within ``target``.

    The state-to-state spread of the value table stays bounded while the
    horizon grows, so the spread of the rate decays like ``1/t``.  Values
    are shifted each sweep (spread is shift-invariant) to keep floats
    small.

    Returns ``(steps, spread, converged)``.
    """
    m = v.shape[0] - 1
    k = lam.shape[0]
    new = np.empty(m + 1)
    t = 0
    spread = 1.0e300
    while t < max_steps:
        for y in range(m + 1):
            acc = 0.0
            for j in range(k):
                rej = v[y] + d[j]
                if y > 0 and v[y - 1] < rej:
                    acc += lam[j] * v[y - 1]
                else:
                    acc += lam[j] * rej
            rep = v[y]
            if y < m and v[y + 1] < rep:
                rep = v[y + 1]
            acc += mu_sum * rep
            acc += h_star * y
            acc += stay * v[y]
            new[y] = acc
        t += 1
        vmin = new[0]
        vmax = new[0]
        for y in range(m + 1):
            if new[y] < vmin:
                vmin = new[y]
            if new[y] > vmax:
                vmax = new[y]
            v[y] = new[y]
        spread = gamma * (vmax - vmin) / t
        if spread <= target:
            return t, spread, True
        for y in range(m + 1):
            v[y] = v[y] - vmin
    return t, spread, False


@njit(cache=True)
def simulate_loop(u_time, u_event, lam, d, mu, accept, repair, h, y0,
                  warmup, n_batches):
    """Continuous-time event loop under a fixed stationary policy.

    ``u_time`` and ``u_event`` supply one uniform each per event (inversion
    sampling for the exponential clock, then event selection).  Holding
    cost accrues at the pre-transition state.  Events before ``warmup``
    are discarded; the rest fall into ``n_batches`` contiguous batches.

    Returns ``(batch_cost, batch_time)``.
    """
    n_events = u_time.shape[0]
    k = lam.shape[0]
    lam_total = 0.0
    for j in range(k):
        lam_total += lam[j]
    batch_cost = np.zeros(n_batches)
    batch_time = np.zeros(n_batches)
    span = n_events - warmup
    y = y0
    for e in range(n_events):
        up_rate = 0.0
        for j in range(k):
            if repair[y, j] == 1:
                up_rate += mu[j]
        total = lam_total + up_rate
        dt = -np.log(u_time[e]) / total
        cost = h * y * dt
        w = u_event[e] * total
        if w < lam_total:
            acc = 0.0
            who = k - 1
            for j in range(k):
                acc += lam[j]
                if w < acc:
                    who = j
                    break
            if accept[y, who] == 1 and y > 0:
                y -= 1
            else:
                cost += d[who]
        else:
            y += 1
        if e >= warmup:
            b = (e - warmup) * n_batches // span
            batch_cost[b] += cost
            batch_time[b] += dt
    return batch_cost, batch_time
