"""Core membership machinery for cost games.

A family of coalitions is *balanced* when per-coalition weights exist
that give every player a total weight of exactly one; the game has a
nonempty core exactly when every minimal balanced family satisfies the
weighted cost inequality against the grand coalition.  This module
enumerates the minimal balanced families with exact rational weights,
evaluates those inequalities, and independently decides core
non-emptiness through a least-core linear program, so the two verdicts
can be cross-checked on every game.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from . import simplex
from .errors import SizeCapError, ValidationError
from .game import CharacteristicGame, coalition_label, members_of

MAX_ENUM_PLAYERS = 5
MAX_EXACT_PLAYERS = 3
GAP_SAFETY = 10.0


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Unique exact solution of a rational linear system, else ``None``.

    Gauss-Jordan over ``Fraction``; returns ``None`` both for
    inconsistent and for underdetermined systems, which is the acceptance
    test the balanced-family search needs.
    """
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    aug = [list(row) + [rhs[i]] for i, row in enumerate(rows)]
    pivot_row_of = [-1] * n_cols
    row = 0
    for col in range(n_cols):
        pivot = next((r for r in range(row, n_rows) if aug[r][col] != 0), None)
        if pivot is None:
            return None  # free column: no unique solution
        aug[row], aug[pivot] = aug[pivot], aug[row]
        scale = aug[row][col]
        aug[row] = [v / scale for v in aug[row]]
        for r in range(n_rows):
            if r != row and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[row])]
        pivot_row_of[col] = row
        row += 1
        if row == n_rows:
            if col + 1 < n_cols:
                return None  # more unknowns than independent equations
            break
    for r in range(row, n_rows):
        if aug[r][n_cols] != 0:
            return None  # inconsistent
    return [aug[pivot_row_of[col]][n_cols] for col in range(n_cols)]


@dataclass(frozen=True)
class BalancedCollection:
    """A minimal balanced family with its unique exact weights.

    ``kappa`` are the rational weights summing to one over each player;
    ``alpha`` is the least positive integer clearing all denominators and
    ``weights`` the resulting integers ``kappa * alpha``.
    """

    n: int
    sets: tuple[int, ...]
    kappa: tuple[Fraction, ...]
    alpha: int
    weights: tuple[int, ...]

    def __post_init__(self):
        if len(self.sets) != len(self.kappa) or len(self.sets) != len(self.weights):
            raise ValidationError("sets, kappa and weights must align")
        for pid in range(1, self.n + 1):
            total = sum(k for mask, k in zip(self.sets, self.kappa) if mask >> (pid - 1) & 1)
            if total != 1:
                raise ValidationError(f"weights of player {pid} sum to {total}, not 1")
        if any(k <= 0 for k in self.kappa):
            raise ValidationError("kappa must be strictly positive")
        lcm = 1
        for k in self.kappa:
            lcm = lcm * k.denominator // math.gcd(lcm, k.denominator)
        if self.alpha != lcm:
            raise ValidationError("alpha must be the least common denominator of kappa")
        if any(w != k * self.alpha for w, k in zip(self.weights, self.kappa)):
            raise ValidationError("weights must equal kappa * alpha")

    def coalitions(self) -> tuple[tuple[int, ...], ...]:
        return tuple(members_of(mask) for mask in self.sets)

    def labels(self) -> tuple[str, ...]:
        return tuple(coalition_label(mask) for mask in self.sets)


@lru_cache(maxsize=None)
def enumerate_minimal_balanced(n: int) -> tuple[BalancedCollection, ...]:
    """All minimal balanced families of coalitions over ``n`` players.

    Candidates are the coalition families with at most ``n`` members (a
    minimal balanced family never needs more, its incidence vectors being
    linearly independent).  A candidate is accepted when its incidence
    system has a unique, strictly positive rational solution; uniqueness
    already rules out balanced proper subfamilies, and the explicit
    subset check below is a cheap guard on that argument.
    """
    if isinstance(n, bool) or not isinstance(n, int):
        raise ValidationError("n must be an integer")
    if not 1 <= n <= MAX_ENUM_PLAYERS:
        raise SizeCapError(
            f"minimal balanced enumeration supports 1..{MAX_ENUM_PLAYERS} players, got {n}")
    full = (1 << n) - 1
    one = Fraction(1)
    found: list[BalancedCollection] = []
    accepted_sets: list[frozenset[int]] = []
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(1, full + 1), size):
            union = 0
            for mask in combo:
                union |= mask
            if union != full:
                continue
            cset = frozenset(combo)
            if any(prev < cset for prev in accepted_sets):
                continue
            rows = [[one if mask >> i & 1 else Fraction(0) for mask in combo]
                    for i in range(n)]
            kappa = _solve_exact(rows, [one] * n)
            if kappa is None or any(k <= 0 for k in kappa):
                continue
            alpha = 1
            for k in kappa:
                alpha = alpha * k.denominator // math.gcd(alpha, k.denominator)
            weights = tuple(int(k * alpha) for k in kappa)
            found.append(BalancedCollection(
                n=n, sets=combo, kappa=tuple(kappa), alpha=alpha, weights=weights))
            accepted_sets.append(cset)
    return tuple(found)


@dataclass(frozen=True)
class BalancednessRow:
    collection: BalancedCollection
    lhs: float
    rhs: float
    slack: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class BalancednessReport:
    rows: tuple[BalancednessRow, ...]
    balanced: bool
    tightest_slack: float

    def failing(self) -> tuple[BalancednessRow, ...]:
        return tuple(row for row in self.rows if not row.passed)

    def to_document(self) -> dict:
        return {
            "balanced": self.balanced,
            "tightest_slack": self.tightest_slack,
            "collections": [
                {
                    "coalitions": list(row.collection.labels()),
                    "weights": list(row.collection.weights),
                    "alpha": row.collection.alpha,
                    "lhs": row.lhs,
                    "rhs": row.rhs,
                    "slack": row.slack,
                    "tolerance": row.tolerance,
                    "pass": row.passed,
                }
                for row in self.rows
            ],
        }


def check_balancedness(game: CharacteristicGame, tol: float | None = None) -> BalancednessReport:
    """Evaluate the weighted cost inequality for every minimal balanced family.

    A family passes when ``sum weights * cost(S) >= alpha * cost(N)`` up
    to its tolerance.  When the game carries certification gaps the
    default tolerance propagates them (times a safety factor of 10);
    otherwise it is 1e-9.
    """
    collections = enumerate_minimal_balanced(game.n)
    grand = game.grand_mask
    rows = []
    tightest = np.inf
    for coll in collections:
        lhs = 0.0
        for mask, weight in zip(coll.sets, coll.weights):
            lhs += weight * game.cost_mask(mask)
        rhs = coll.alpha * game.cost_mask(grand)
        slack = lhs - rhs
        if tol is not None:
            tolerance = tol
        elif game.gaps is not None:
            propagated = sum(w * game.gap_mask(mask) for mask, w in zip(coll.sets, coll.weights))
            propagated += coll.alpha * game.gap_mask(grand)
            tolerance = GAP_SAFETY * propagated + 1e-12
        else:
            tolerance = 1e-9
        rows.append(BalancednessRow(
            collection=coll, lhs=lhs, rhs=rhs, slack=slack,
            tolerance=tolerance, passed=slack >= -tolerance))
        tightest = min(tightest, slack)
    return BalancednessReport(
        rows=tuple(rows),
        balanced=all(row.passed for row in rows),
        tightest_slack=float(tightest),
    )


class LeastCoreResult(NamedTuple):
    epsilon: float
    allocation: np.ndarray


def least_core(game: CharacteristicGame) -> LeastCoreResult:
    """Smallest uniform relaxation that admits a stable allocation.

    Solves ``min eps`` subject to ``x(S) <= cost(S) + eps`` for every
    proper nonempty coalition and ``x(N) = cost(N)``.  The core is
    nonempty exactly when the optimum is ``<= 0``.  A single-player game
    has no proper coalition constraints; it reports ``eps = 0`` with the
    trivial allocation.
    """
    n = game.n
    grand = game.grand_mask
    if n == 1:
        return LeastCoreResult(0.0, np.array([game.cost_mask(grand)]))
    masks = [mask for mask in range(1, grand)]
    a_ub = np.zeros((len(masks), n + 1))
    b_ub = np.zeros(len(masks))
    for r, mask in enumerate(masks):
        for i in range(n):
            if mask >> i & 1:
                a_ub[r, i] = 1.0
        a_ub[r, n] = -1.0
        b_ub[r] = game.cost_mask(mask)
    a_eq = np.zeros((1, n + 1))
    a_eq[0, :n] = 1.0
    b_eq = np.array([game.cost_mask(grand)])
    c = np.zeros(n + 1)
    c[n] = 1.0
    solution = simplex.solve_lp(c, a_ub, b_ub, a_eq, b_eq)
    return LeastCoreResult(float(solution.x[n]), solution.x[:n].copy())


def least_core_exact(game: CharacteristicGame) -> tuple[Fraction, tuple[Fraction, ...]]:
    """Rational vertex enumeration of the least-core program (n <= 3).

    The feasible set is pointed, so the optimum sits on a vertex where
    the efficiency equality and ``n`` coalition constraints are active.
    Enumerating those candidate bases over exact rationals gives a
    float-free cross-check of :func:`least_core`.
    """
    n = game.n
    if n > MAX_EXACT_PLAYERS:
        raise SizeCapError(
            f"exact least core supports up to {MAX_EXACT_PLAYERS} players, got {n}")
    grand = game.grand_mask
    cost = {mask: Fraction(game.cost_mask(mask)) for mask in range(1, grand + 1)}
    if n == 1:
        return Fraction(0), (cost[grand],)
    masks = list(range(1, grand))
    best: tuple[Fraction, tuple[Fraction, ...]] | None = None
    eq_row = [Fraction(1)] * n + [Fraction(0)]
    for combo in itertools.combinations(masks, n):
        rows = [eq_row]
        rhs = [cost[grand]]
        for mask in combo:
            rows.append([Fraction(1 if mask >> i & 1 else 0) for i in range(n)]
                        + [Fraction(-1)])
            rhs.append(cost[mask])
        point = _solve_exact(rows, rhs)
        if point is None:
            continue
        x, eps = point[:n], point[n]
        if any(sum(x[i] for i in range(n) if mask >> i & 1) > cost[mask] + eps
               for mask in masks):
            continue
        if best is None or eps < best[0]:
            best = (eps, tuple(x))
    if best is None:
        raise ValidationError("no feasible vertex found")  # cannot happen for finite games
    return best


class CoreMembership(NamedTuple):
    ok: bool
    efficient: bool
    violators: tuple[tuple[int, ...], ...]


def in_core(game: CharacteristicGame, allocation: Iterable[float],
            tol: float = 1e-9) -> CoreMembership:
    """Check efficiency and coalition rationality of an allocation.

    ``ok`` requires the allocation to pay out exactly the grand-coalition
    cost (within ``tol``) and to charge no coalition more than it could
    secure on its own (within ``tol``); ``violators`` lists the
    overcharged coalitions.
    """
    x = np.asarray(list(allocation), dtype=float)
    if x.shape != (game.n,):
        raise ValidationError(f"allocation must have {game.n} entries")
    efficient = abs(float(x.sum()) - game.cost_mask(game.grand_mask)) <= tol
    violators = []
    for mask in range(1, game.grand_mask):
        total = sum(x[i] for i in range(game.n) if mask >> i & 1)
        if total > game.cost_mask(mask) + tol:
            violators.append(members_of(mask))
    return CoreMembership(
        ok=efficient and not violators,
        efficient=efficient,
        violators=tuple(violators),
    )
