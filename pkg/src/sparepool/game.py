"""Characteristic-function games assembled from per-coalition solves.

Coalitions are encoded as bitmasks over player indices (player ``i``
owns bit ``i - 1``), which makes subset iteration and serialization
cheap.  Public accessors take iterables of player ids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import NonConvergenceError, ParseError, SizeCapError, ValidationError
from .mdp import average_cost
from .situation import SparePartsSituation, validate_coalition

MAX_PLAYERS = 12


def mask_of(members: Iterable[int]) -> int:
    mask = 0
    for pid in members:
        mask |= 1 << (pid - 1)
    return mask


def members_of(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def coalition_label(mask: int) -> str:
    return ",".join(str(pid) for pid in members_of(mask))


@dataclass(frozen=True)
class CharacteristicGame:
    """Cost of every nonempty coalition of ``n`` players.

    ``costs`` maps coalition bitmasks to long-run cost per time unit; the
    empty coalition is 0 by convention and not stored.  ``gaps`` carries
    the per-coalition certification gaps when the game came out of the
    solver, so downstream feasibility tolerances can be justified.
    """

    n: int
    costs: Mapping[int, float]
    gaps: Mapping[int, float] | None = None

    def __post_init__(self):
        if not 1 <= self.n:
            raise ValidationError("n must be >= 1")
        expected = set(range(1, 1 << self.n))
        if set(self.costs) != expected:
            raise ValidationError("costs must cover every nonempty coalition")
        for mask, value in self.costs.items():
            if not math.isfinite(value):
                raise ValidationError(f"cost of {{{coalition_label(mask)}}} must be finite")
        if self.gaps is not None and set(self.gaps) != expected:
            raise ValidationError("gaps must cover every nonempty coalition")

    def cost(self, members: Iterable[int]) -> float:
        return self.cost_mask(mask_of(members))

    def cost_mask(self, mask: int) -> float:
        if not 1 <= mask < (1 << self.n):
            raise ValidationError(f"invalid coalition mask {mask}")
        return self.costs[mask]

    def gap_mask(self, mask: int) -> float:
        if self.gaps is None:
            return 0.0
        return self.gaps[mask]

    @property
    def grand_mask(self) -> int:
        return (1 << self.n) - 1

    def to_document(self) -> dict:
        doc = {
            "n": self.n,
            "costs": {coalition_label(mask): cost for mask, cost in sorted(self.costs.items())},
        }
        if self.gaps is not None:
            doc["gaps"] = {coalition_label(mask): gap for mask, gap in sorted(self.gaps.items())}
        return doc


def game_from_document(doc: dict | str) -> CharacteristicGame:
    """Parse a game report document (inverse of ``to_document``)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed game document: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("game document root must be an object")
    unknown = set(doc) - {"n", "costs", "gaps"}
    if unknown:
        raise ParseError(f"unknown key(s) in game document: {sorted(unknown)}")
    if "n" not in doc or "costs" not in doc:
        raise ParseError("game document needs 'n' and 'costs'")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParseError("'n' must be a positive integer")

    def parse_block(block, name):
        if not isinstance(block, dict):
            raise ParseError(f"'{name}' must be an object")
        out = {}
        for label, value in block.items():
            try:
                members = [int(part) for part in label.split(",")]
            except ValueError:
                raise ParseError(f"bad coalition label {label!r}") from None
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParseError(f"{name}[{label!r}] must be a number")
            if any(not 1 <= pid <= n for pid in members):
                raise ParseError(f"coalition label {label!r} out of range for n={n}")
            out[mask_of(members)] = float(value)
        return out

    costs = parse_block(doc["costs"], "costs")
    gaps = parse_block(doc["gaps"], "gaps") if "gaps" in doc else None
    return CharacteristicGame(n=n, costs=costs, gaps=gaps)


def build_game(situation: SparePartsSituation, tol: float = 1e-9) -> CharacteristicGame:
    """Solve every nonempty coalition and assemble the game.

    Solves are independent pure functions; they run here sequentially in
    bitmask order so the result is reproducible.
    """
    n = situation.n
    if n > MAX_PLAYERS:
        raise SizeCapError(
            f"game enumeration is capped at {MAX_PLAYERS} players (2^n solves); got n={n}")
    costs: dict[int, float] = {}
    gaps: dict[int, float] = {}
    for mask in range(1, 1 << n):
        members = members_of(mask)
        try:
            result = average_cost(situation, members, tol=tol)
        except NonConvergenceError as exc:
            raise NonConvergenceError(
                f"coalition {{{coalition_label(mask)}}}: {exc}",
                span=exc.span, gap=exc.gap) from exc
        costs[mask] = result.cost_per_time_unit
        gaps[mask] = result.certified_gap
    return CharacteristicGame(n=n, costs=costs, gaps=gaps)


@dataclass(frozen=True)
class SubadditivityViolation:
    left: tuple[int, ...]
    right: tuple[int, ...]
    excess: float


@dataclass(frozen=True)
class SubadditivityReport:
    tol: float
    violations: tuple[SubadditivityViolation, ...] = field(default=())

    @property
    def subadditive(self) -> bool:
        return not self.violations


def is_subadditive(game: CharacteristicGame, tol: float = 1e-9) -> SubadditivityReport:
    """List all disjoint pairs whose merge costs more than going alone.

    Pooling should make merges (weakly) cheaper, so the violation list is
    expected to be empty for solver-built games; it is a diagnostic for
    hand-built ones.
    """
    violations = []
    for s in range(1, 1 << game.n):
        for t in range(s + 1, 1 << game.n):
            if s & t:
                continue
            excess = game.cost_mask(s | t) - game.cost_mask(s) - game.cost_mask(t)
            if excess > tol:
                violations.append(SubadditivityViolation(
                    left=members_of(s), right=members_of(t), excess=excess))
    return SubadditivityReport(tol=tol, violations=tuple(violations))
