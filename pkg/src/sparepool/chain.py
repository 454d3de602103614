"""Finite-horizon verification that weighted coalition costs dominate the
grand coalition.

For a minimal balanced family the target inequality
``sum_S weight_S * cost(S) >= alpha * cost(N)`` is checked here not on
limits but on the finite-horizon tables that converge to them, through a
chain of intermediate recursions:

1. copy       - one labeled copy of each coalition per unit of weight;
2. combine    - a product-state recursion over all copies whose table is
                exactly the sum of the per-copy tables;
3. relax      - demands and returns may touch any copy's stock (at most
                ``alpha`` parts per event), which can only lower cost;
4. anonymize  - with pooled withdrawals only the total stock matters, so
                the relaxed table collapses to one dimension, a chain
                with batches of size ``alpha``;
5. uncopy     - the aggregate table is convex and block-linear in the
                total stock, hence equals ``alpha`` times the grand
                coalition's table at multiples of ``alpha``.

:func:`verify_chain` materializes every table up to a horizon and checks
each link (equalities to 1e-9, inequalities to 1e-12), giving a numeric
replay of why pooling games admit stable cost allocations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .core import BalancedCollection
from .errors import SizeCapError, ValidationError
from .game import members_of
from .mdp import ValueTable, average_cost, value_iterate
from .situation import SparePartsSituation, coalition_capacity, normalize

STATE_CAP = 2_000_000
TOL_EQUALITY = 1e-9
TOL_INEQUALITY = 1e-12
ACTION_SAMPLE = 256


@dataclass(frozen=True)
class LabeledCoalition:
    """One weighted copy of a coalition, with the coalition's capacity."""

    members: tuple[int, ...]
    copy_index: int
    capacity: int


@dataclass(frozen=True)
class LabeledCoalitionSet:
    """All copies induced by a balanced family, in (coalition, copy) order."""

    entries: tuple[LabeledCoalition, ...]
    alpha: int
    n: int

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(entry.capacity + 1 for entry in self.entries)

    def total_capacity(self) -> int:
        return int(sum(entry.capacity for entry in self.entries))


def labeled_coalitions(situation: SparePartsSituation,
                       collection: BalancedCollection) -> LabeledCoalitionSet:
    """Expand a balanced family into weight-many labeled copies per set."""
    if situation.n != collection.n:
        raise ValidationError("collection and situation player counts differ")
    entries = []
    for mask, weight in zip(collection.sets, collection.weights):
        members = members_of(mask)
        capacity = coalition_capacity(situation, members)
        for k in range(1, weight + 1):
            entries.append(LabeledCoalition(members=members, copy_index=k,
                                            capacity=capacity))
    return LabeledCoalitionSet(entries=tuple(entries), alpha=collection.alpha,
                               n=situation.n)


def _check_state_cap(dims):
    states = 1
    for d in dims:
        states *= d
    if states > STATE_CAP:
        raise SizeCapError(
            f"product state space has {states} states, above the cap of {STATE_CAP}")
    return states


def _norm1(dims) -> np.ndarray:
    return np.indices(dims).sum(axis=0).astype(float)


def _minus_shift(values, shift):
    """``out[r] = values[r - shift]`` where feasible, +inf elsewhere."""
    out = np.full(values.shape, np.inf)
    dst = tuple(slice(s, None) for s in shift)
    src = tuple(slice(None, n - s) for n, s in zip(values.shape, shift))
    out[dst] = values[src]
    return out


def _plus_shift(values, shift):
    out = np.full(values.shape, np.inf)
    dst = tuple(slice(None, n - s) for n, s in zip(values.shape, shift))
    src = tuple(slice(s, None) for s in shift)
    out[dst] = values[src]
    return out


@dataclass(frozen=True)
class ProductValueTable:
    """Value tables over the product of per-copy stock levels."""

    family: str
    labeled: LabeledCoalitionSet
    values: np.ndarray

    def __post_init__(self):
        if np.any(self.values[0] != 0.0):
            raise ValidationError("values at horizon 0 must be exactly 0")
        self.values.setflags(write=False)

    @property
    def horizon(self) -> int:
        return self.values.shape[0] - 1

    def at(self, t: int) -> np.ndarray:
        return self.values[t]


def _player_copy_axes(labeled: LabeledCoalitionSet):
    axes = {pid: [] for pid in range(1, labeled.n + 1)}
    for axis, entry in enumerate(labeled.entries):
        for pid in entry.members:
            axes[pid].append(axis)
    return axes


def _coupled_moves(labeled: LabeledCoalitionSet):
    """Per player, the 0/1 withdrawal (or return) vectors over its copies."""
    axes = _player_copy_axes(labeled)
    k = len(labeled.entries)
    moves = {}
    for pid, own in axes.items():
        vectors = []
        for bits in itertools.product((0, 1), repeat=len(own)):
            shift = [0] * k
            for axis, bit in zip(own, bits):
                shift[axis] = bit
            vectors.append(tuple(shift))
        moves[pid] = vectors
    return moves


def _pooled_moves(labeled: LabeledCoalitionSet):
    """All withdrawal (or return) vectors with at most ``alpha`` parts total."""
    alpha = labeled.alpha
    ranges = [range(min(alpha, entry.capacity) + 1) for entry in labeled.entries]
    return [vec for vec in itertools.product(*ranges) if sum(vec) <= alpha]


def combined_value(situation: SparePartsSituation, collection: BalancedCollection,
                   horizon: int) -> ProductValueTable:
    """Product-state recursion that carries every copy's own dynamics.

    Each player's demand event withdraws at most one part from each copy
    the player belongs to and pays the downtime cost once per missing
    withdrawal out of ``alpha``; returns work the same way on repair
    events.  Summation runs in player id order with holding cost last,
    the same order as the per-coalition recursion, so the copy-sum
    identity can be checked at tight tolerances.
    """
    if horizon < 0:
        raise ValidationError("horizon must be >= 0")
    labeled = labeled_coalitions(situation, collection)
    dims = labeled.dims
    _check_state_cap(dims)
    rates = normalize(situation)
    d = situation.downtime_costs()
    alpha = labeled.alpha
    norm1 = _norm1(dims)
    moves = _coupled_moves(labeled)

    table = np.zeros((horizon + 1,) + dims)
    for t in range(horizon):
        v = table[t]
        acc = np.zeros(dims)
        for pid in range(1, labeled.n + 1):
            best_dem = None
            best_rep = None
            for shift in moves[pid]:
                taken = sum(shift)
                dem = float(alpha - taken) * d[pid - 1] + _minus_shift(v, shift)
                best_dem = dem if best_dem is None else np.minimum(best_dem, dem)
                rep = _plus_shift(v, shift)
                best_rep = rep if best_rep is None else np.minimum(best_rep, rep)
            acc += rates.lambda_star[pid - 1] * best_dem
            acc += rates.mu_star[pid - 1] * best_rep
        acc += rates.h_star * norm1
        table[t + 1] = acc
    return ProductValueTable(family="combined", labeled=labeled, values=table)


def relaxed_value(situation: SparePartsSituation, collection: BalancedCollection,
                  horizon: int) -> ProductValueTable:
    """Same recursion with pooled moves: an event may touch any copies.

    The move set no longer depends on which player the event belongs to,
    only on the state; up to ``alpha`` parts move per event.
    """
    if horizon < 0:
        raise ValidationError("horizon must be >= 0")
    labeled = labeled_coalitions(situation, collection)
    dims = labeled.dims
    _check_state_cap(dims)
    rates = normalize(situation)
    d = situation.downtime_costs()
    alpha = labeled.alpha
    norm1 = _norm1(dims)
    pooled = _pooled_moves(labeled)
    takens = [sum(vec) for vec in pooled]

    table = np.zeros((horizon + 1,) + dims)
    for t in range(horizon):
        v = table[t]
        shifted_down = [_minus_shift(v, vec) for vec in pooled]
        shifted_up = [_plus_shift(v, vec) for vec in pooled]
        best_rep = shifted_up[0]
        for arr in shifted_up[1:]:
            best_rep = np.minimum(best_rep, arr)
        acc = np.zeros(dims)
        for pid in range(1, labeled.n + 1):
            best_dem = None
            for taken, shifted in zip(takens, shifted_down):
                dem = float(alpha - taken) * d[pid - 1] + shifted
                best_dem = dem if best_dem is None else np.minimum(best_dem, dem)
            acc += rates.lambda_star[pid - 1] * best_dem
            acc += rates.mu_star[pid - 1] * best_rep
        acc += rates.h_star * norm1
        table[t + 1] = acc
    return ProductValueTable(family="relaxed", labeled=labeled, values=table)


def anonymized_value(situation: SparePartsSituation, collection: BalancedCollection,
                     horizon: int) -> ValueTable:
    """One-dimensional recursion over total stock with batched events.

    Demands arrive in batches of size ``alpha`` (each part short of the
    batch pays the downtime cost); repair completions return up to
    ``alpha`` parts at once.  Total stock runs over
    ``0..alpha * C_N``.
    """
    if horizon < 0:
        raise ValidationError("horizon must be >= 0")
    labeled = labeled_coalitions(situation, collection)
    rates = normalize(situation)
    d = situation.downtime_costs()
    alpha = labeled.alpha
    size = labeled.total_capacity() + 1
    levels = np.arange(size, dtype=float)

    table = np.zeros((horizon + 1, size))
    for t in range(horizon):
        v = table[t]
        down_shifts = []
        up_shifts = []
        for move in range(alpha + 1):
            down = np.full(size, np.inf)
            down[move:] = v[:size - move]
            down_shifts.append(down)
            up = np.full(size, np.inf)
            up[:size - move] = v[move:]
            up_shifts.append(up)
        best_rep = up_shifts[0]
        for arr in up_shifts[1:]:
            best_rep = np.minimum(best_rep, arr)
        acc = np.zeros(size)
        for pid in range(1, labeled.n + 1):
            best_dem = None
            for move in range(alpha + 1):
                dem = float(alpha - move) * d[pid - 1] + down_shifts[move]
                best_dem = dem if best_dem is None else np.minimum(best_dem, dem)
            acc += rates.lambda_star[pid - 1] * best_dem
            acc += rates.mu_star[pid - 1] * best_rep
        acc += rates.h_star * levels
        table[t + 1] = acc
    return ValueTable(family="anonymized", members=tuple(range(1, situation.n + 1)),
                      values=table)


@dataclass(frozen=True)
class LemmaCheck:
    """Outcome of one link of the chain over all checked horizons."""

    check: str
    t_max: int
    max_violation: float
    passed: bool
    witness: dict | None = None

    def to_document(self) -> dict:
        return {
            "id": self.check,
            "t_max": self.t_max,
            "max_violation": self.max_violation,
            "pass": self.passed,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class LemmaReport:
    collection: BalancedCollection
    horizon: int
    checks: tuple[LemmaCheck, ...]
    rate_drift: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> LemmaCheck:
        for entry in self.checks:
            if entry.check == name:
                return entry
        raise KeyError(name)

    def to_document(self) -> dict:
        return {
            "collection": {
                "coalitions": list(self.collection.labels()),
                "weights": list(self.collection.weights),
                "alpha": self.collection.alpha,
            },
            "horizon": self.horizon,
            "checks": [check.to_document() for check in self.checks],
            "rate_drift": dict(self.rate_drift),
            "pass": self.passed,
        }


class _Tracker:
    """Largest violation seen, with the first state that attains it."""

    def __init__(self):
        self.value = 0.0
        self.witness = None

    def scan(self, violations: np.ndarray, t: int):
        worst = float(violations.max()) if violations.size else 0.0
        if worst > self.value:
            flat = int(np.argmax(violations))
            state = np.unravel_index(flat, violations.shape)
            self.value = worst
            self.witness = {"t": t, "state": [int(s) for s in state]}


def _sample_states(dims, limit, seed):
    total = 1
    for d in dims:
        total *= d
    if total <= limit:
        flats = np.arange(total)
    else:
        flats = np.random.default_rng(seed).choice(total, size=limit, replace=False)
    return [tuple(int(i) for i in np.unravel_index(flat, dims)) for flat in flats]


def _action_inclusion_violations(labeled, dims, limit, seed):
    """Count coupled moves that the pooled move set would not admit.

    Coupled moves are feasible per copy by construction, so the
    substantive membership condition is the total-move budget ``alpha``.
    """
    axes = _player_copy_axes(labeled)
    alpha = labeled.alpha
    caps = [entry.capacity for entry in labeled.entries]
    bad = 0
    for state in _sample_states(dims, limit, seed):
        for own in axes.values():
            down_options = [(0, 1) if state[axis] >= 1 else (0,) for axis in own]
            for bits in itertools.product(*down_options):
                if sum(bits) > alpha:
                    bad += 1
            up_options = [(0, 1) if state[axis] < caps[axis] else (0,) for axis in own]
            for bits in itertools.product(*up_options):
                if sum(bits) > alpha:
                    bad += 1
    return bad


def verify_chain(situation: SparePartsSituation, collection: BalancedCollection,
                 horizon: int, tol_equality: float = TOL_EQUALITY,
                 tol_inequality: float = TOL_INEQUALITY,
                 action_sample: int = ACTION_SAMPLE,
                 sample_seed: int = 0) -> LemmaReport:
    """Check every link of the copy/combine/relax/anonymize/uncopy chain.

    Equality links (``combine``, ``anonymize``, ``uncopy``,
    ``block_linearity``) must hold within ``tol_equality`` at every state
    and horizon ``t <= horizon``; inequality links (``relaxation_bound``,
    ``convexity``, ``conclusion``) must not be violated by more than
    ``tol_inequality``.  The report also carries the drift between the
    end-of-horizon rates and the certified long-run costs, which shrinks
    like ``1/horizon`` and is informational.
    """
    labeled = labeled_coalitions(situation, collection)
    dims = labeled.dims
    _check_state_cap(dims)
    rates = normalize(situation)
    alpha = collection.alpha
    grand = tuple(range(1, situation.n + 1))

    coalition_tables = {mask: value_iterate(situation, members_of(mask), horizon)
                        for mask in collection.sets}
    grand_table = value_iterate(situation, grand, horizon)
    combined = combined_value(situation, collection, horizon)
    relaxed = relaxed_value(situation, collection, horizon)
    aggregate = anonymized_value(situation, collection, horizon)

    entry_axes = []
    for axis, entry in enumerate(labeled.entries):
        shape = [1] * len(dims)
        shape[axis] = dims[axis]
        entry_axes.append((axis, tuple(shape)))
    masks_per_entry = []
    for entry in labeled.entries:
        mask = 0
        for pid in entry.members:
            mask |= 1 << (pid - 1)
        masks_per_entry.append(mask)

    norm1_idx = np.indices(dims).sum(axis=0)
    top_state = tuple(entry.capacity for entry in labeled.entries)
    total_cap = labeled.total_capacity()
    multiples = np.arange(0, total_cap + 1, alpha)

    combine = _Tracker()
    relax_bound = _Tracker()
    anonymize = _Tracker()
    convexity = _Tracker()
    block_linearity = _Tracker()
    uncopy = _Tracker()
    conclusion = _Tracker()

    for t in range(horizon + 1):
        copies_sum = np.zeros(dims)
        for (axis, shape), mask in zip(entry_axes, masks_per_entry):
            copies_sum = copies_sum + coalition_tables[mask].at(t).reshape(shape)
        combine.scan(np.abs(copies_sum - combined.at(t)), t)
        relax_bound.scan(relaxed.at(t) - combined.at(t), t)
        anonymize.scan(np.abs(relaxed.at(t) - aggregate.at(t)[norm1_idx]), t)
        agg = aggregate.at(t)
        if agg.shape[0] >= 3:
            convexity.scan(2.0 * agg[1:-1] - agg[:-2] - agg[2:], t)
        if alpha >= 2:
            # Second differences inside each block of alpha consecutive levels.
            inner = []
            for start in range(0, total_cap, alpha):
                seg = agg[start:start + alpha + 1]
                inner.append(np.abs(seg[:-2] + seg[2:] - 2.0 * seg[1:-1]))
            block_linearity.scan(np.concatenate(inner), t)
        uncopy.scan(np.abs(agg[multiples] - alpha * grand_table.at(t)), t)
        lhs = float(copies_sum[top_state])
        rhs = alpha * float(grand_table.at(t)[-1])
        conclusion.scan(np.array([rhs - lhs]), t)

    inclusion_bad = _action_inclusion_violations(labeled, dims, action_sample, sample_seed)

    checks = (
        LemmaCheck("combine", horizon, combine.value,
                   combine.value <= tol_equality, combine.witness),
        LemmaCheck("action_inclusion", horizon, float(inclusion_bad),
                   inclusion_bad == 0, None),
        LemmaCheck("relaxation_bound", horizon, relax_bound.value,
                   relax_bound.value <= tol_inequality, relax_bound.witness),
        LemmaCheck("anonymize", horizon, anonymize.value,
                   anonymize.value <= tol_equality, anonymize.witness),
        LemmaCheck("convexity", horizon, convexity.value,
                   convexity.value <= tol_inequality, convexity.witness),
        LemmaCheck("block_linearity", horizon, block_linearity.value,
                   block_linearity.value <= tol_equality, block_linearity.witness),
        LemmaCheck("uncopy", horizon, uncopy.value,
                   uncopy.value <= tol_equality, uncopy.witness),
        LemmaCheck("conclusion", horizon, conclusion.value,
                   conclusion.value <= tol_inequality, conclusion.witness),
    )

    rate_drift: dict[str, float] = {}
    if horizon >= 1:
        weighted = 0.0
        top_sum = 0.0
        for mask, weight in zip(collection.sets, collection.weights):
            weighted += weight * average_cost(situation, members_of(mask)).cost_per_time_unit
            top_sum += weight * float(coalition_tables[mask].at(horizon)[-1])
        grand_cost = average_cost(situation, grand).cost_per_time_unit
        rate_drift = {
            "weighted_coalitions": abs(rates.gamma * top_sum / horizon - weighted),
            "grand_coalition": abs(
                rates.gamma * alpha * float(grand_table.at(horizon)[-1]) / horizon
                - alpha * grand_cost),
        }

    return LemmaReport(collection=collection, horizon=horizon, checks=checks,
                       rate_drift=rate_drift)


class ConvexMinCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def midpoint_convex_min(f: Sequence[float], a: int, b: int, c: int, d: int) -> ConvexMinCheck:
    """Verified two-window minimum inequality for a discretely convex sequence.

    For convex ``f`` and windows ``x in a..b``, ``y in a+c..b+d`` with
    ``c, d in {0, 2}`` the paired minimum satisfies
    ``min f(x) + f(y) >= 2 * min f(z)`` for ``z`` in the midpoint window
    ``a+c/2 .. b+d/2``.  Both sides are evaluated exhaustively and
    returned alongside the verdict.
    """
    values = np.asarray(list(f), dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValidationError("f must be a nonempty sequence")
    if c not in (0, 2) or d not in (0, 2):
        raise ValidationError("c and d must be 0 or 2")
    if not (isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer))):
        raise ValidationError("a and b must be integers")
    if a < 0 or a > b:
        raise ValidationError("need 0 <= a <= b")
    if a + c > b + d:
        raise ValidationError("need a + c <= b + d")
    if b + d >= values.size:
        raise ValidationError("windows exceed the range of f")
    second = values[:-2] + values[2:] - 2.0 * values[1:-1]
    if second.size and second.min() < 0:
        raise ValidationError("f is not discretely convex")
    # The two windows are independent, so the paired minimum splits.
    lhs = float(values[a:b + 1].min() + values[a + c:b + d + 1].min())
    rhs = float(2.0 * values[a + c // 2:b + d // 2 + 1].min())
    return ConvexMinCheck(lhs=lhs, rhs=rhs, holds=lhs >= rhs)
