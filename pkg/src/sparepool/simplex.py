"""Dense two-phase simplex for small linear programs.

Minimizes ``c @ z`` over free variables ``z`` subject to
``a_ub @ z <= b_ub`` and ``a_eq @ z = b_eq``.  Free variables are split
into positive and negative parts internally; phase 1 drives artificial
variables out of the basis.  Entering columns follow Dantzig's rule and
fall back to Bland's rule after a run of degenerate pivots, so the method
terminates.

Kept dependency-free on purpose: the exact rational vertex path in
:mod:`sparepool.core` provides an independent cross-check in tests.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import LPError

_BLAND_AFTER = 25


class LPSolution(NamedTuple):
    x: np.ndarray
    objective: float


def _pivot(tableau, basis, row, col):
    tableau[row] /= tableau[row, col]
    pivot_row = tableau[row]
    for r in range(tableau.shape[0]):
        if r != row:
            factor = tableau[r, col]
            if factor != 0.0:
                tableau[r] -= factor * pivot_row
    if basis is not None and row < len(basis):
        basis[row] = col


def _iterate(tableau, basis, allowed, tol, max_pivots):
    """Pivot until the objective row has no improving column.

    Returns normally on optimality, raises :class:`LPError` when the
    problem is unbounded in the allowed columns or the pivot cap is hit.
    """
    m = tableau.shape[0] - 1
    degenerate_run = 0
    for _ in range(max_pivots):
        obj = tableau[-1]
        if degenerate_run >= _BLAND_AFTER:
            col = -1
            for j in allowed:
                if obj[j] < -tol:
                    col = j
                    break
        else:
            col = -1
            best = -tol
            for j in allowed:
                if obj[j] < best:
                    best = obj[j]
                    col = j
        if col < 0:
            return
        row = -1
        best_ratio = np.inf
        for r in range(m):
            coeff = tableau[r, col]
            if coeff > tol:
                ratio = tableau[r, -1] / coeff
                if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12 and row >= 0
                        and basis[r] < basis[row]):
                    best_ratio = ratio
                    row = r
        if row < 0:
            raise LPError("linear program is unbounded")
        degenerate_run = degenerate_run + 1 if best_ratio <= tol else 0
        _pivot(tableau, basis, row, col)
    raise LPError("simplex pivot cap exceeded")


def solve_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None, *,
             tol: float = 1e-9, max_pivots: int | None = None) -> LPSolution:
    c = np.asarray(c, dtype=float)
    nv = c.shape[0]
    a_ub = np.zeros((0, nv)) if a_ub is None else np.asarray(a_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    a_eq = np.zeros((0, nv)) if a_eq is None else np.asarray(a_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq
    if m == 0:
        raise LPError("no constraints: problem is unbounded or trivial")

    # Columns: zp (nv) | zm (nv) | slacks (m_ub) | artificials (appended).
    n_struct = 2 * nv + m_ub
    body = np.zeros((m, n_struct))
    rhs = np.concatenate([b_ub, b_eq])
    body[:m_ub, :nv] = a_ub
    body[:m_ub, nv:2 * nv] = -a_ub
    body[m_ub:, :nv] = a_eq
    body[m_ub:, nv:2 * nv] = -a_eq
    for i in range(m_ub):
        body[i, 2 * nv + i] = 1.0

    flipped = rhs < 0
    body[flipped] *= -1.0
    rhs = np.abs(rhs)

    # Slack columns start basic only on inequality rows that kept b >= 0;
    # every other row gets an artificial.
    art_rows = [i for i in range(m) if i >= m_ub or flipped[i]]
    n_art = len(art_rows)
    n_cols = n_struct + n_art
    tableau = np.zeros((m + 1, n_cols + 1))
    tableau[:m, :n_struct] = body
    tableau[:m, -1] = rhs
    basis = [-1] * m
    for j, r in enumerate(art_rows):
        tableau[r, n_struct + j] = 1.0
        basis[r] = n_struct + j
    for i in range(m_ub):
        if not flipped[i]:
            basis[i] = 2 * nv + i

    if max_pivots is None:
        max_pivots = 1000 + 50 * (m + n_cols)

    if n_art:
        # Phase 1: minimize the artificial total.
        tableau[-1] = 0.0
        for j in range(n_art):
            tableau[-1, n_struct + j] = 1.0
        for r in art_rows:
            tableau[-1] -= tableau[r]
        _iterate(tableau, basis, range(n_cols), tol, max_pivots)
        if -tableau[-1, -1] > 1e-7 * (1.0 + np.abs(rhs).max()):
            raise LPError("linear program is infeasible")
        # Drive leftover zero-level artificials out of the basis.
        drop_rows = []
        for r in range(m):
            if basis[r] >= n_struct:
                col = -1
                for j in range(n_struct):
                    if abs(tableau[r, j]) > tol:
                        col = j
                        break
                if col >= 0:
                    _pivot(tableau, basis, r, col)
                else:
                    drop_rows.append(r)
        if drop_rows:
            keep = [r for r in range(m) if r not in drop_rows]
            tableau = tableau[keep + [m]]
            basis = [basis[r] for r in keep]
            m = len(basis)

    # Phase 2 with the real objective, artificial columns barred.
    c_std = np.zeros(n_cols)
    c_std[:nv] = c
    c_std[nv:2 * nv] = -c
    tableau[-1, :] = 0.0
    tableau[-1, :n_cols] = c_std
    for r in range(m):
        cb = c_std[basis[r]]
        if cb != 0.0:
            tableau[-1] -= cb * tableau[r]
    _iterate(tableau, basis, range(n_struct), tol, max_pivots)

    x_std = np.zeros(n_cols)
    for r in range(m):
        x_std[basis[r]] = tableau[r, -1]
    x = x_std[:nv] - x_std[nv:2 * nv]
    return LPSolution(x=x, objective=float(c @ x))
