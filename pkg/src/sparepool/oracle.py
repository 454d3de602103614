"""Independent ground truth for the MDP solvers.

Three engines that share no code with value iteration: exact stationary
analysis of the birth-death chain a stationary policy induces, brute
force over all stationary deterministic policies for tiny instances, and
a continuous-time discrete-event simulator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ReducibleChainError, SizeCapError, ValidationError
from .mdp import StationaryPolicy
from .situation import SparePartsSituation, coalition_capacity, validate_coalition

BRUTE_FORCE_CAP = 10 ** 7
MIN_EVENTS = 10 ** 4
N_BATCHES = 20
# Student-t 97.5% quantile at N_BATCHES - 1 = 19 degrees of freedom.
T_CRIT_95 = 2.093024054408263


@dataclass(frozen=True)
class BirthDeathChain:
    """Nearest-neighbour chain on 0..m with per-state up/down rates.

    ``up[y]`` moves y -> y+1 (the entry at the top state is ignored) and
    ``down[y]`` moves y -> y-1 (the entry at 0 is ignored).
    """

    up: np.ndarray
    down: np.ndarray

    def __post_init__(self):
        up = np.asarray(self.up, dtype=float)
        down = np.asarray(self.down, dtype=float)
        if up.shape != down.shape or up.ndim != 1 or up.shape[0] == 0:
            raise ValidationError("up and down must be matching nonempty 1-d arrays")
        if np.any(~np.isfinite(up)) or np.any(~np.isfinite(down)):
            raise ValidationError("rates must be finite")
        if np.any(up < 0) or np.any(down < 0):
            raise ValidationError("rates must be >= 0")
        up.setflags(write=False)
        down.setflags(write=False)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)

    @property
    def top(self) -> int:
        return self.up.shape[0] - 1


def stationary_distribution(chain: BirthDeathChain) -> np.ndarray:
    """Stationary probabilities via detailed balance.

    Requires irreducibility over the full range: every up rate below the
    top and every down rate above the bottom must be positive.  Callers
    holding a reducible chain should restrict to a closed communicating
    range first.
    """
    m = chain.top
    if m == 0:
        return np.ones(1)
    if np.any(chain.up[:m] <= 0) or np.any(chain.down[1:] <= 0):
        raise ReducibleChainError(
            "chain is reducible on 0..%d; restrict to a closed communicating range" % m)
    # Log-space cumulated detailed-balance ratios avoid overflow on long chains.
    log_w = np.zeros(m + 1)
    log_w[1:] = np.cumsum(np.log(chain.up[:m]) - np.log(chain.down[1:]))
    w = np.exp(log_w - log_w.max())
    return w / w.sum()


def _policy_rates(situation, members, policy):
    if tuple(policy.members) != tuple(members):
        raise ValidationError("policy members do not match the coalition")
    cap = coalition_capacity(situation, members)
    if policy.n_states != cap + 1:
        raise ValidationError("policy does not match the coalition state space")
    idx = [pid - 1 for pid in members]
    lam = situation.arrival_rates()[idx]
    mu = situation.repair_rates()[idx]
    d = situation.downtime_costs()[idx]
    accept = policy.accept.astype(float)
    repair = policy.repair.astype(float)
    down = accept @ lam
    up = repair @ mu
    reject_cost = (1.0 - accept) @ (lam * d)
    return lam, mu, d, down, up, reject_cost, cap


def exact_policy_cost(situation: SparePartsSituation, coalition: Iterable[int],
                      policy: StationaryPolicy) -> float:
    """Exact long-run average cost per time unit of a stationary policy.

    The policy induces a birth-death chain with up rate ``sum mu_i a_i^+``
    and down rate ``sum lambda_i a_i^-``.  If the chain is reducible the
    evaluation restricts to the closed communicating range the process
    enters from full stock, the start state of the pooled system.
    """
    members = validate_coalition(situation, coalition)
    _, _, _, down, up, reject_cost, cap = _policy_rates(situation, members, policy)
    lo = cap
    while lo > 0 and down[lo] > 0:
        lo -= 1
    hi = lo
    while hi < cap and up[hi] > 0:
        hi += 1
    pi = stationary_distribution(BirthDeathChain(up[lo:hi + 1].copy(), down[lo:hi + 1].copy()))
    levels = np.arange(lo, hi + 1, dtype=float)
    return float(pi @ (reject_cost[lo:hi + 1] + situation.holding_cost * levels))


def _state_choices(y, cap, k):
    accepts = [(0,) * k] if y == 0 else list(itertools.product((0, 1), repeat=k))
    repairs = [(0,) * k] if y == cap else list(itertools.product((0, 1), repeat=k))
    return [(a, r) for a in accepts for r in repairs]


def enumerate_policies(situation: SparePartsSituation, coalition: Iterable[int]):
    """Yield every feasible stationary deterministic policy."""
    members = validate_coalition(situation, coalition)
    cap = coalition_capacity(situation, members)
    k = len(members)
    if 4.0 ** (k * (cap + 1)) > BRUTE_FORCE_CAP:
        raise SizeCapError(
            f"policy space 4^({k}*{cap + 1}) exceeds the enumeration cap")
    per_state = [_state_choices(y, cap, k) for y in range(cap + 1)]
    for assignment in itertools.product(*per_state):
        accept = np.array([a for a, _ in assignment], dtype=np.uint8)
        repair = np.array([r for _, r in assignment], dtype=np.uint8)
        yield StationaryPolicy(members=members, accept=accept, repair=repair)


def brute_force_optimum(situation: SparePartsSituation, coalition: Iterable[int]) -> float:
    """Minimum exact cost over all stationary deterministic policies."""
    best = np.inf
    for policy in enumerate_policies(situation, coalition):
        cost = exact_policy_cost(situation, coalition, policy)
        if cost < best:
            best = cost
    return float(best)


@dataclass(frozen=True)
class SimulationResult:
    """Batch-means estimate of long-run cost per time unit."""

    estimate: float
    half_width: float
    events: int
    seed: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValidationError("half_width must be > 0")

    def covers(self, value: float) -> bool:
        return abs(self.estimate - value) <= self.half_width

    def to_document(self) -> dict:
        return {
            "estimate": self.estimate,
            "half_width": self.half_width,
            "events": self.events,
            "seed": self.seed,
        }


def simulate(situation: SparePartsSituation, coalition: Iterable[int],
             policy: StationaryPolicy, min_events: int = 10 ** 6,
             seed: int = 0) -> SimulationResult:
    """Simulate the continuous-time chain under ``policy`` from full stock.

    Demands arrive per member at their failure rates whether or not they
    are accepted; repair completions occur at the summed active repair
    rates.  Exponential clocks are drawn by inversion from a PCG64 stream,
    so a seed pins the run down exactly.  The first 1% of events warm the
    chain up; the remainder form 20 batches whose per-batch cost rates
    give a 95% confidence half-width.
    """
    from . import _kernels

    members = validate_coalition(situation, coalition)
    events = int(min_events)
    if events < MIN_EVENTS:
        raise ValidationError(f"min_events must be >= {MIN_EVENTS}")
    _, _, _, _, _, _, cap = _policy_rates(situation, members, policy)
    idx = [pid - 1 for pid in members]
    lam = situation.arrival_rates()[idx]
    mu = situation.repair_rates()[idx]
    d = situation.downtime_costs()[idx]

    rng = np.random.default_rng(seed)
    u_time = 1.0 - rng.random(events)  # in (0, 1], safe under log
    u_event = rng.random(events)
    warmup = events // 100
    batch_cost, batch_time = _kernels.simulate_loop(
        u_time, u_event, lam, d, mu, policy.accept, policy.repair,
        situation.holding_cost, cap, warmup, N_BATCHES)
    estimate = float(batch_cost.sum() / batch_time.sum())
    ratios = batch_cost / batch_time
    half_width = float(T_CRIT_95 * ratios.std(ddof=1) / np.sqrt(N_BATCHES))
    return SimulationResult(estimate=estimate, half_width=half_width,
                            events=events, seed=int(seed))
