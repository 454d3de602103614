"""Players, rates, and capacities of a pooled spare-parts system.

A situation bundles per-player data (storage capacity, downtime cost per
stockout, failure arrival rate, repair rate) with the holding cost shared
by everyone.  Solvers consume situations through the normalized per-epoch
event probabilities produced by :func:`normalize`: dividing every rate by
the total event rate turns the continuous-time dynamics into a
discrete-time chain in which each epoch carries at most one event.

All objects here are immutable after construction and safe to share
across parallel workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParseError, ValidationError

_ROOT_KEYS = {"players", "holding_cost"}
_PLAYER_KEYS = {"id", "capacity", "downtime_cost", "arrival_rate", "repair_rate"}
_RATE_FIELDS = ("downtime_cost", "arrival_rate", "repair_rate")


@dataclass(frozen=True)
class PlayerSpec:
    """One service provider: storage capacity, stockout cost, event rates."""

    id: int
    capacity: int
    downtime_cost: float
    arrival_rate: float
    repair_rate: float

    def __post_init__(self):
        if isinstance(self.id, bool) or not isinstance(self.id, (int, np.integer)):
            raise ValidationError("player id must be an integer")
        object.__setattr__(self, "id", int(self.id))

        cap = self.capacity
        if isinstance(cap, bool):
            raise ValidationError(f"player {self.id}: capacity must be an integer >= 0")
        if isinstance(cap, float) and cap.is_integer():
            cap = int(cap)
        if not isinstance(cap, (int, np.integer)):
            raise ValidationError(f"player {self.id}: capacity must be an integer >= 0")
        cap = int(cap)
        if cap < 0:
            raise ValidationError(f"player {self.id}: capacity must be an integer >= 0")
        object.__setattr__(self, "capacity", cap)

        for field in _RATE_FIELDS:
            value = getattr(self, field)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
                raise ValidationError(f"player {self.id}: {field} must be a number")
            value = float(value)
            if not math.isfinite(value):
                raise ValidationError(f"player {self.id}: {field} must be finite")
            object.__setattr__(self, field, value)
        if not self.downtime_cost > 0:
            raise ValidationError(f"player {self.id}: downtime_cost must be > 0")
        if not self.arrival_rate > 0:
            raise ValidationError(f"player {self.id}: arrival_rate must be > 0")
        if not self.repair_rate > 0:
            raise ValidationError(f"player {self.id}: repair_rate must be > 0")


@dataclass(frozen=True)
class SparePartsSituation:
    """Immutable, validated model: players in id order plus the holding cost.

    Player ids must be the consecutive integers ``1..n`` so that they can
    double as array offsets throughout the solvers.  The holding cost may
    be any finite real (negative values are legal and merely flagged by
    :func:`validation_warnings`); all solver math is sign-agnostic.
    """

    players: tuple[PlayerSpec, ...]
    holding_cost: float

    def __post_init__(self):
        players = tuple(self.players)
        if not players:
            raise ValidationError("at least one player is required")
        seen: set[int] = set()
        for p in players:
            if not isinstance(p, PlayerSpec):
                raise ValidationError("players must be PlayerSpec instances")
            if p.id in seen:
                raise ValidationError(f"duplicate id {p.id}")
            seen.add(p.id)
        if seen != set(range(1, len(players) + 1)):
            raise ValidationError("player ids must be the consecutive integers 1..n")
        object.__setattr__(self, "players", tuple(sorted(players, key=lambda p: p.id)))

        h = self.holding_cost
        if isinstance(h, bool) or not isinstance(h, (int, float, np.integer, np.floating)):
            raise ValidationError("holding_cost must be a number")
        h = float(h)
        if not math.isfinite(h):
            raise ValidationError("holding_cost must be finite")
        object.__setattr__(self, "holding_cost", h)

    @property
    def n(self) -> int:
        return len(self.players)

    def player(self, player_id: int) -> PlayerSpec:
        return self.players[player_id - 1]

    def arrival_rates(self) -> np.ndarray:
        return np.array([p.arrival_rate for p in self.players])

    def repair_rates(self) -> np.ndarray:
        return np.array([p.repair_rate for p in self.players])

    def downtime_costs(self) -> np.ndarray:
        return np.array([p.downtime_cost for p in self.players])

    def capacities(self) -> np.ndarray:
        return np.array([p.capacity for p in self.players], dtype=np.int64)


@dataclass(frozen=True)
class NormalizedRates:
    """Per-epoch event probabilities of the uniformized chain.

    ``gamma`` is the total event rate summed over all players; dividing
    the per-player rates and the holding cost by it yields probabilities
    and per-epoch costs.  The probabilities sum to one over the full
    player set, which is what licenses treating one epoch as one discrete
    step.
    """

    gamma: float
    lambda_star: np.ndarray
    mu_star: np.ndarray
    h_star: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValidationError("gamma must be > 0")
        self.lambda_star.setflags(write=False)
        self.mu_star.setflags(write=False)
        total = 0.0
        for k in range(self.lambda_star.shape[0]):
            total += self.lambda_star[k] + self.mu_star[k]
        if abs(total - 1.0) > 1e-12:
            raise ValidationError("normalized rates must sum to 1 within 1e-12")

    def stay_mass(self, members: tuple[int, ...]) -> float:
        """Self-loop probability of a coalition's epoch, summed over the
        complement in id order.

        Computing the complement sum directly (instead of ``1 - sum``)
        makes the mass exactly 0.0 for the grand coalition, which keeps
        finite-horizon tables comparable across modules at tight
        tolerances.
        """
        inside = set(members)
        mass = 0.0
        for pid in range(1, self.lambda_star.shape[0] + 1):
            if pid not in inside:
                mass += self.lambda_star[pid - 1] + self.mu_star[pid - 1]
        return mass


def normalize(situation: SparePartsSituation) -> NormalizedRates:
    """Uniformize: divide all rates by the total event rate.

    The total rate is independent of any coalition, so tables built for
    different coalitions of the same situation live on a common epoch
    clock.
    """
    gamma = 0.0
    for p in situation.players:
        gamma += p.arrival_rate + p.repair_rate
    lambda_star = situation.arrival_rates() / gamma
    mu_star = situation.repair_rates() / gamma
    return NormalizedRates(
        gamma=gamma,
        lambda_star=lambda_star,
        mu_star=mu_star,
        h_star=situation.holding_cost / gamma,
    )


def validate_coalition(situation: SparePartsSituation, coalition: Iterable[int]) -> tuple[int, ...]:
    """Return the coalition as a sorted tuple of valid player ids."""
    members = sorted(set(coalition))
    if not members:
        raise ValidationError("coalition must be nonempty")
    for pid in members:
        if isinstance(pid, bool) or not isinstance(pid, (int, np.integer)):
            raise ValidationError("coalition members must be integers")
        if not 1 <= pid <= situation.n:
            raise ValidationError(f"unknown player id {pid}")
    return tuple(int(pid) for pid in members)


def coalition_capacity(situation: SparePartsSituation, coalition: Iterable[int]) -> int:
    """Pooled storage capacity: the sum of the members' capacities."""
    members = validate_coalition(situation, coalition)
    return int(sum(situation.players[pid - 1].capacity for pid in members))


def validation_warnings(situation: SparePartsSituation) -> list[str]:
    """Non-fatal observations about a valid situation."""
    warnings = []
    if situation.holding_cost < 0:
        warnings.append(
            "holding_cost is negative; parts earn money while stored and "
            "the solvers treat that sign-agnostically"
        )
    return warnings


def _require_number(value, where: str):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where} must be a number in integer or decimal notation")
    return value


def parse_situation(text: str) -> SparePartsSituation:
    """Parse and validate a model document.

    The document is a JSON object ``{"players": [...], "holding_cost": x}``
    where each player object carries exactly the keys ``id``, ``capacity``,
    ``downtime_cost``, ``arrival_rate`` and ``repair_rate``.  Unknown keys
    are rejected.  Structural problems raise :class:`ParseError`; violated
    model invariants raise :class:`ValidationError` naming the player and
    field.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed model document: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("model document root must be an object")
    unknown = set(doc) - _ROOT_KEYS
    if unknown:
        raise ParseError(f"unknown key(s) in model document: {sorted(unknown)}")
    missing = _ROOT_KEYS - set(doc)
    if missing:
        raise ParseError(f"missing key(s) in model document: {sorted(missing)}")

    players_doc = doc["players"]
    if not isinstance(players_doc, list) or not players_doc:
        raise ParseError("players must be a nonempty array")
    specs = []
    for pos, entry in enumerate(players_doc):
        where = f"players[{pos}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where} must be an object")
        unknown = set(entry) - _PLAYER_KEYS
        if unknown:
            raise ParseError(f"{where}: unknown key(s) {sorted(unknown)}")
        missing = _PLAYER_KEYS - set(entry)
        if missing:
            raise ParseError(f"{where}: missing key(s) {sorted(missing)}")
        for key in _PLAYER_KEYS:
            _require_number(entry[key], f"{where}.{key}")
        specs.append(PlayerSpec(
            id=entry["id"],
            capacity=entry["capacity"],
            downtime_cost=entry["downtime_cost"],
            arrival_rate=entry["arrival_rate"],
            repair_rate=entry["repair_rate"],
        ))

    holding = _require_number(doc["holding_cost"], "holding_cost")
    return SparePartsSituation(players=tuple(specs), holding_cost=float(holding))


def situation_to_document(situation: SparePartsSituation) -> dict:
    """Inverse of :func:`parse_situation` (players already in id order)."""
    return {
        "players": [
            {
                "id": p.id,
                "capacity": p.capacity,
                "downtime_cost": p.downtime_cost,
                "arrival_rate": p.arrival_rate,
                "repair_rate": p.repair_rate,
            }
            for p in situation.players
        ],
        "holding_cost": situation.holding_cost,
    }
