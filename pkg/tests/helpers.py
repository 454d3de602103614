"""Shared instance builders and independent reference computations.

The reference recursions here are deliberately scalar and dict-based so
they share no code path with the vectorized solvers they check.
"""

import json

import numpy as np

from sparepool import CharacteristicGame, PlayerSpec, SparePartsSituation
from sparepool.core import enumerate_minimal_balanced


def canonical_situation() -> SparePartsSituation:
    return SparePartsSituation(
        players=(
            PlayerSpec(id=1, capacity=1, downtime_cost=4.0, arrival_rate=0.5, repair_rate=1.0),
            PlayerSpec(id=2, capacity=2, downtime_cost=2.0, arrival_rate=1.0, repair_rate=1.5),
        ),
        holding_cost=0.3,
    )


CANONICAL_DOCUMENT = json.dumps({
    "players": [
        {"id": 1, "capacity": 1, "downtime_cost": 4, "arrival_rate": 0.5, "repair_rate": 1.0},
        {"id": 2, "capacity": 2, "downtime_cost": 2, "arrival_rate": 1.0, "repair_rate": 1.5},
    ],
    "holding_cost": 0.3,
})


def single_player(capacity=1, downtime=4.0, arrival=1.0, repair=1.0, holding=0.0):
    return SparePartsSituation(
        players=(PlayerSpec(id=1, capacity=capacity, downtime_cost=downtime,
                            arrival_rate=arrival, repair_rate=repair),),
        holding_cost=holding,
    )


def random_situation(rng, n, cap_total=None, cap_each=3, h_low=0.0, h_high=1.0):
    """Random instance with moderate rates; capacities capped per player
    and optionally in total."""
    caps = []
    budget = cap_total
    for _ in range(n):
        top = cap_each if budget is None else min(cap_each, budget)
        cap = int(rng.integers(0, top + 1))
        caps.append(cap)
        if budget is not None:
            budget -= cap
    players = tuple(
        PlayerSpec(
            id=i + 1,
            capacity=caps[i],
            downtime_cost=float(rng.uniform(0.5, 4.0)),
            arrival_rate=float(rng.uniform(0.3, 1.5)),
            repair_rate=float(rng.uniform(0.3, 1.5)),
        )
        for i in range(n)
    )
    return SparePartsSituation(players=players, holding_cost=float(rng.uniform(h_low, h_high)))


def reference_tables(situation, members, horizon):
    """Scalar re-evaluation of the finite-horizon recursion.

    Returns a list of dicts, one per horizon, mapping state to value.
    """
    members = sorted(members)
    gamma = sum(p.arrival_rate + p.repair_rate for p in situation.players)
    m = sum(situation.players[i - 1].capacity for i in members)
    h = situation.holding_cost / gamma
    inside = sum(situation.players[i - 1].arrival_rate + situation.players[i - 1].repair_rate
                 for i in members)
    stay = 1.0 - inside / gamma
    tables = [{y: 0.0 for y in range(m + 1)}]
    for _ in range(horizon):
        prev = tables[-1]
        cur = {}
        for y in range(m + 1):
            total = 0.0
            for i in members:
                p = situation.players[i - 1]
                lam = p.arrival_rate / gamma
                mu = p.repair_rate / gamma
                reject = prev[y] + p.downtime_cost
                demand = reject if y == 0 else min(reject, prev[y - 1])
                repair = prev[y] if y == m else min(prev[y], prev[y + 1])
                total += lam * demand + mu * repair
            total += h * y + stay * prev[y]
            cur[y] = total
        tables.append(cur)
    return tables


def fake_unbalanced_game(rng, n, margin=0.5) -> CharacteristicGame:
    """Game whose grand-coalition cost clearly exceeds the best weighted
    cover, so both stability tests must reject it."""
    grand = (1 << n) - 1
    costs = {}
    for mask in range(1, grand + 1):
        size = bin(mask).count("1")
        costs[mask] = float(rng.uniform(0.5, 3.0)) * size
    tight = min(
        sum(float(k) * costs[mask] for k, mask in zip(coll.kappa, coll.sets))
        for coll in enumerate_minimal_balanced(n)
        if coll.sets != (grand,)
    )
    costs[grand] = tight + margin
    return CharacteristicGame(n=n, costs=costs)


def min_max_stage_cost(situation, members):
    """Extremes of the per-epoch stage cost over states and feasible actions."""
    from sparepool import normalize, coalition_capacity

    rates = normalize(situation)
    members = sorted(members)
    cap = coalition_capacity(situation, members)
    lows = []
    highs = []
    for y in range(cap + 1):
        base = rates.h_star * y
        worst = base + sum(rates.lambda_star[i - 1] * situation.players[i - 1].downtime_cost
                           for i in members)
        best = base if y > 0 else worst
        lows.append(min(best, worst))
        highs.append(max(best, worst))
    return min(lows), max(highs)


def random_policy(rng, situation, members):
    from sparepool import StationaryPolicy, coalition_capacity

    members = tuple(sorted(members))
    cap = coalition_capacity(situation, members)
    k = len(members)
    accept = rng.integers(0, 2, size=(cap + 1, k)).astype(np.uint8)
    repair = rng.integers(0, 2, size=(cap + 1, k)).astype(np.uint8)
    accept[0] = 0
    repair[cap] = 0
    return StationaryPolicy(members=members, accept=accept, repair=repair)
