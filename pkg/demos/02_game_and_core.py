"""Assemble the cost game and test whether full pooling is stable.

Solving every nonempty coalition yields a characteristic-function game.
Stability of the grand coalition is decided twice, by independent
methods: the weighted-family inequalities with exact rational weights,
and a least-core linear program.  The two verdicts must agree; as a
foil, a hand-built game with an inflated grand-coalition cost shows both
tests rejecting.
"""

from pathlib import Path

import numpy as np

import sparepool as sp
from sparepool.game import coalition_label

DATA = Path(__file__).parent / "data" / "canonical.json"


def main():
    situation = sp.parse_situation(DATA.read_text())
    game = sp.build_game(situation, tol=1e-9)

    print("coalition costs per time unit (with certification gaps):")
    for mask in sorted(game.costs):
        print(f"  {{{coalition_label(mask)}}}: {game.cost_mask(mask):.9f}"
              f"  (gap {game.gap_mask(mask):.1e})")

    report = sp.is_subadditive(game)
    print(f"\nsubadditive: {report.subadditive} "
          f"(merging disjoint coalitions never costs extra)")

    balance = sp.check_balancedness(game)
    print(f"\nweighted-family inequalities (balanced: {balance.balanced}):")
    for row in balance.rows:
        sets = " | ".join(row.collection.labels())
        print(f"  {{{sets}}}: weighted cost {row.lhs:.6f} vs "
              f"{row.rhs:.6f}, slack {row.slack:+.6f}")

    eps, allocation = sp.least_core(game)
    print(f"\nleast-core epsilon {eps:+.6f} "
          f"(<= 0 means some allocation satisfies every coalition)")
    print(f"allocation {np.round(allocation, 6).tolist()}, "
          f"in core: {sp.in_core(game, allocation, tol=1e-7).ok}")

    # A game that cannot be stable: the grand coalition is priced above
    # the cheapest weighted cover of the players.
    fake = sp.CharacteristicGame(n=2, costs={1: 1.0, 2: 1.0, 3: 3.0})
    fake_balance = sp.check_balancedness(fake)
    fake_eps, _ = sp.least_core(fake)
    failing = fake_balance.failing()[0]
    print(f"\nfake game {{1: 1, 2: 1, 12: 3}}: balanced={fake_balance.balanced}, "
          f"least-core epsilon {fake_eps:+.3f}")
    print(f"  failing family {{{' | '.join(failing.collection.labels())}}} "
          f"covers the players for {failing.lhs:.1f} < {failing.rhs:.1f}")


if __name__ == "__main__":
    main()
