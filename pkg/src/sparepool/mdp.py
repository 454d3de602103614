"""Per-coalition accept/repair inventory control as a uniformized MDP.

A coalition pools its members' storage into one stock level ``y`` ranging
over ``0..C_S``.  Each uniformized epoch carries at most one event: a
demand at some member (accept it from stock or reject it and pay that
member's downtime cost), a repair completion (return a part to stock or
leave it out), or a fictitious self-loop.  Holding cost accrues on the
stock carried through the epoch.

Two solvers live here.  :func:`value_iterate` propagates the exact
finite-horizon recursion and is the building block the verification
chain compares against, so its summation order is pinned down (players in
id order, demand before repair, holding and carry-over terms last).
:func:`average_cost` brackets the optimal long-run cost per epoch with
value-iteration span bounds, extracts the greedy stationary policy, and
certifies it against the exact birth-death evaluation from
:mod:`sparepool.oracle`.

Every solve is a pure function of its inputs; distinct coalitions may be
solved in parallel with no shared state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import NonConvergenceError, SizeCapError, ValidationError
from .situation import (
    NormalizedRates,
    SparePartsSituation,
    coalition_capacity,
    normalize,
    validate_coalition,
)

MAX_STOCK = 10_000
DEFAULT_TOL = 1e-9
DEFAULT_DAMPING = 0.01
DEFAULT_STEP_CAP = 10 ** 6


def state_space(situation: SparePartsSituation, coalition: Iterable[int]) -> range:
    """Stock levels a coalition can hold: the contiguous range 0..C_S."""
    return range(coalition_capacity(situation, coalition) + 1)


@dataclass(frozen=True)
class ActionProfile:
    """Per-member accept (demand) and repair (return) indicator bits.

    Bit ``k`` refers to the k-th coalition member in id order.  Accepting
    is impossible at zero stock and repairing is impossible at full stock;
    :func:`stage_cost` and :func:`transition` reject profiles that violate
    those boundary rules.
    """

    accept: tuple[int, ...]
    repair: tuple[int, ...]

    def __post_init__(self):
        accept = tuple(int(b) for b in self.accept)
        repair = tuple(int(b) for b in self.repair)
        if len(accept) != len(repair):
            raise ValidationError("accept and repair must have the same length")
        if any(b not in (0, 1) for b in accept + repair):
            raise ValidationError("action bits must be 0 or 1")
        object.__setattr__(self, "accept", accept)
        object.__setattr__(self, "repair", repair)


def _check_feasible(action: ActionProfile, y: int, cap: int, k: int) -> None:
    if len(action.accept) != k:
        raise ValidationError(f"action profile has {len(action.accept)} members, coalition has {k}")
    if not 0 <= y <= cap:
        raise ValidationError(f"state {y} outside 0..{cap}")
    if y == 0 and any(action.accept):
        raise ValidationError("infeasible action at boundary state: accept forced off at y=0")
    if y == cap and any(action.repair):
        raise ValidationError("infeasible action at boundary state: repair forced off at full stock")


def stage_cost(situation: SparePartsSituation, coalition: Iterable[int], y: int,
               action: ActionProfile, rates: NormalizedRates | None = None) -> float:
    """Expected cost collected over one epoch started in state ``y``.

    Rejected demands charge the owner's downtime cost weighted by the
    per-epoch demand probability; stock carried charges holding cost.
    """
    members = validate_coalition(situation, coalition)
    rates = rates or normalize(situation)
    cap = coalition_capacity(situation, members)
    _check_feasible(action, y, cap, len(members))
    cost = 0.0
    for k, pid in enumerate(members):
        cost += rates.lambda_star[pid - 1] * (1 - action.accept[k]) * situation.players[pid - 1].downtime_cost
    return cost + rates.h_star * y


def transition(situation: SparePartsSituation, coalition: Iterable[int], y: int,
               action: ActionProfile, rates: NormalizedRates | None = None) -> np.ndarray:
    """One-epoch transition distribution over states 0..C_S.

    Accepted demands move one part down, active repairs move one part up,
    and the remaining probability is a self-loop, so the masses sum to one
    by construction.
    """
    members = validate_coalition(situation, coalition)
    rates = rates or normalize(situation)
    cap = coalition_capacity(situation, members)
    _check_feasible(action, y, cap, len(members))
    dist = np.zeros(cap + 1)
    down = 0.0
    up = 0.0
    for k, pid in enumerate(members):
        down += rates.lambda_star[pid - 1] * action.accept[k]
        up += rates.mu_star[pid - 1] * action.repair[k]
    if y > 0:
        dist[y - 1] = down
    if y < cap:
        dist[y + 1] = up
    dist[y] = 1.0 - down - up
    return dist


@dataclass(frozen=True)
class ValueTable:
    """Stack of finite-horizon value tables, one row per horizon.

    ``values[t]`` holds the optimal expected cost over ``t`` epochs from
    each start state; row 0 is identically zero.  ``family`` names which
    recursion produced the stack (``"coalition"`` here; the verification
    chain adds product-state and aggregate families).
    """

    family: str
    members: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim < 2:
            raise ValidationError("values must have a horizon axis")
        if np.any(self.values[0] != 0.0):
            raise ValidationError("values at horizon 0 must be exactly 0")
        self.values.setflags(write=False)

    @property
    def horizon(self) -> int:
        return self.values.shape[0] - 1

    def at(self, t: int) -> np.ndarray:
        return self.values[t]


def _coalition_arrays(situation, members, rates):
    idx = [pid - 1 for pid in members]
    lam = rates.lambda_star[idx].copy()
    mu = rates.mu_star[idx].copy()
    d = np.array([situation.players[i].downtime_cost for i in idx])
    stay = rates.stay_mass(members)
    return lam, mu, d, stay


def _backup(values, lam, mu, d, h_star, stay, ys):
    """One exact sweep of the finite-horizon recursion.

    Summation order is fixed so tables computed here stay comparable,
    addend for addend, with the product-state recursions in
    :mod:`sparepool.chain`.
    """
    m = values.shape[0] - 1
    if m >= 1:
        rep = values.copy()
        np.minimum(values[:-1], values[1:], out=rep[:-1])
    else:
        rep = values
    out = np.zeros_like(values)
    for k in range(lam.shape[0]):
        dem = values + d[k]
        if m >= 1:
            np.minimum(dem[1:], values[:-1], out=dem[1:])
        out += lam[k] * dem
        out += mu[k] * rep
    out += h_star * ys
    out += stay * values
    return out


def value_iterate(situation: SparePartsSituation, coalition: Iterable[int],
                  horizon: int) -> ValueTable:
    """Exact finite-horizon tables for a coalition, horizons 0..``horizon``.

    Each step takes, per member, the cheaper of rejecting a demand (pay
    the downtime cost, keep the stock) and accepting it (spend a part),
    plus the cheaper of returning a repaired part and leaving it out, then
    adds holding cost and the self-loop carry-over.
    """
    members = validate_coalition(situation, coalition)
    if horizon < 0:
        raise ValidationError("horizon must be >= 0")
    cap = coalition_capacity(situation, members)
    if cap > MAX_STOCK:
        raise SizeCapError(f"state space 0..{cap} exceeds the cap of {MAX_STOCK}")
    rates = normalize(situation)
    lam, mu, d, stay = _coalition_arrays(situation, members, rates)
    ys = np.arange(cap + 1, dtype=float)
    table = np.zeros((horizon + 1, cap + 1))
    for t in range(horizon):
        table[t + 1] = _backup(table[t], lam, mu, d, rates.h_star, stay, ys)
    return ValueTable(family="coalition", members=members, values=table)


@dataclass(frozen=True)
class StationaryPolicy:
    """Accept/repair bits per state and member, in id order per member."""

    members: tuple[int, ...]
    accept: np.ndarray
    repair: np.ndarray

    def __post_init__(self):
        accept = np.asarray(self.accept, dtype=np.uint8)
        repair = np.asarray(self.repair, dtype=np.uint8)
        if accept.shape != repair.shape or accept.ndim != 2:
            raise ValidationError("accept and repair must be matching 2-d arrays")
        if accept.shape[1] != len(self.members):
            raise ValidationError("policy width must match the member count")
        if np.any(accept > 1) or np.any(repair > 1):
            raise ValidationError("policy bits must be 0 or 1")
        if np.any(accept[0]):
            raise ValidationError("accept forced off at y=0")
        if np.any(repair[-1]):
            raise ValidationError("repair forced off at full stock")
        accept.setflags(write=False)
        repair.setflags(write=False)
        object.__setattr__(self, "accept", accept)
        object.__setattr__(self, "repair", repair)
        object.__setattr__(self, "members", tuple(int(i) for i in self.members))

    @property
    def n_states(self) -> int:
        return self.accept.shape[0]

    def action_at(self, y: int) -> ActionProfile:
        return ActionProfile(accept=tuple(self.accept[y]), repair=tuple(self.repair[y]))


def _greedy(members, values, d):
    """Minimizing actions of the one-step backup, larger moves preferred.

    On ties the policy accepts rather than rejects and repairs rather
    than idles, matching the reference always-move policy that keeps the
    chain irreducible.
    """
    m = values.shape[0] - 1
    k = len(members)
    accept = np.zeros((m + 1, k), dtype=np.uint8)
    repair = np.zeros((m + 1, k), dtype=np.uint8)
    if m >= 1:
        for j in range(k):
            accept[1:, j] = values[:-1] <= values[1:] + d[j]
            repair[:-1, j] = values[1:] <= values[:-1]
    return StationaryPolicy(members=members, accept=accept, repair=repair)


def extract_policy(situation: SparePartsSituation, coalition: Iterable[int],
                   table: ValueTable | np.ndarray) -> StationaryPolicy:
    """Greedy stationary policy read off a value table's final horizon."""
    members = validate_coalition(situation, coalition)
    values = table.values[-1] if isinstance(table, ValueTable) else np.asarray(table, dtype=float)
    rates = normalize(situation)
    _, _, d, _ = _coalition_arrays(situation, members, rates)
    if values.shape[0] != coalition_capacity(situation, members) + 1:
        raise ValidationError("table does not match the coalition state space")
    return _greedy(members, values, d)


@dataclass(frozen=True)
class AverageCostResult:
    """Certified long-run solve of one coalition.

    ``cost_per_time_unit`` is the exact long-run average cost of
    ``policy`` (computed by closed-form chain evaluation), and
    ``certified_gap`` bounds how far that sits above the optimum:
    optimum >= cost_per_time_unit - certified_gap.  ``cost_per_epoch``
    is the same quantity on the uniformized epoch clock.
    """

    members: tuple[int, ...]
    cost_per_time_unit: float
    cost_per_epoch: float
    certified_gap: float
    policy: StationaryPolicy
    steps: int
    lower_bound: float

    def __post_init__(self):
        if self.certified_gap < 0:
            raise ValidationError("certified_gap must be >= 0")


def average_cost(situation: SparePartsSituation, coalition: Iterable[int],
                 tol: float = DEFAULT_TOL, max_steps: int = DEFAULT_STEP_CAP,
                 damping: float = DEFAULT_DAMPING) -> AverageCostResult:
    """Optimal long-run average cost of a coalition, certified within ``tol``.

    Runs damped relative value iteration (damping keeps the iteration
    aperiodic; on the time-unit clock it only rescales the epoch length,
    so averages per time unit are unchanged).  The running min/max of the
    one-step differences brackets the optimum; the greedy policy is then
    evaluated exactly on its birth-death chain and accepted once its cost
    is within ``tol`` of the bracket's lower end.
    """
    from . import _kernels, oracle

    members = validate_coalition(situation, coalition)
    if not tol > 0:
        raise ValidationError("tol must be > 0")
    if not 0.0 <= damping < 1.0:
        raise ValidationError("damping must be in [0, 1)")
    cap = coalition_capacity(situation, members)
    if cap > MAX_STOCK:
        raise SizeCapError(f"state space 0..{cap} exceeds the cap of {MAX_STOCK}")
    rates = normalize(situation)
    lam, mu, d, stay = _coalition_arrays(situation, members, rates)
    mu_sum = float(np.sum(mu))
    per_time = rates.gamma / (1.0 - damping)

    v = np.zeros(cap + 1)
    lo = -np.inf
    hi = np.inf
    steps_left = int(max_steps)
    total_steps = 0
    span_target = max(tol / per_time, 1e-16)
    while True:
        v, step_lo, step_hi, used, reached = _kernels.span_loop(
            v, lam, d, mu_sum, rates.h_star, stay, damping, span_target, steps_left)
        total_steps += used
        steps_left -= used
        lo = max(lo, step_lo)
        hi = min(hi, step_hi)
        policy = _greedy(members, v, d)
        exact = oracle.exact_policy_cost(situation, members, policy)
        lower = per_time * lo
        gap = exact - lower
        if gap <= tol:
            return AverageCostResult(
                members=members,
                cost_per_time_unit=exact,
                cost_per_epoch=exact / rates.gamma,
                certified_gap=max(gap, 0.0),
                policy=policy,
                steps=total_steps,
                lower_bound=lower,
            )
        if steps_left <= 0 or not reached:
            raise NonConvergenceError(
                f"no certificate within {max_steps} steps: achieved span "
                f"{per_time * (hi - lo):.3e}, policy gap {gap:.3e} per time unit",
                span=per_time * (hi - lo), gap=gap)
        span_target = max(span_target * 0.1, 1e-16)


def state_independence_spread(situation: SparePartsSituation, coalition: Iterable[int],
                              target: float = 1e-6,
                              max_steps: int = 200_000_000) -> tuple[int, float]:
    """Iterate the exact recursion until the long-run rate loses its
    start-state dependence.

    Returns ``(horizon, spread)`` where ``spread`` is the largest
    difference across start states of ``gamma * V_t(y) / t`` at the
    terminal horizon, guaranteed ``<= target``.
    """
    from . import _kernels

    members = validate_coalition(situation, coalition)
    if not target > 0:
        raise ValidationError("target must be > 0")
    cap = coalition_capacity(situation, members)
    if cap > MAX_STOCK:
        raise SizeCapError(f"state space 0..{cap} exceeds the cap of {MAX_STOCK}")
    rates = normalize(situation)
    lam, mu, d, stay = _coalition_arrays(situation, members, rates)
    v = np.zeros(cap + 1)
    steps, spread, reached = _kernels.rate_spread_loop(
        v, lam, d, float(np.sum(mu)), rates.h_star, stay, rates.gamma,
        target, int(max_steps))
    if not reached:
        raise NonConvergenceError(
            f"rate spread {spread:.3e} above target after {steps} steps",
            span=spread)
    return steps, spread
