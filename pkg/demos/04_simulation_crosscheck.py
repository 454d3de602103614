"""Check the solver against a continuous-time event simulation.

The certified policy from the MDP solve drives a discrete-event
simulation of the physical system: exponential failure and repair
clocks, emergency leases on rejected demands, holding cost accrued on
carried stock.  Batch-means confidence intervals from seeded runs should
cover the exact long-run cost; a handful of seeds here, a 100-seed
coverage study in the acceptance suite.
"""

from pathlib import Path

import sparepool as sp

DATA = Path(__file__).parent / "data" / "canonical.json"


def main():
    situation = sp.parse_situation(DATA.read_text())
    members = (1, 2)
    solved = sp.average_cost(situation, members, tol=1e-9)
    print(f"certified long-run cost {solved.cost_per_time_unit:.9f} per time unit")

    print("\nseeded simulation runs (1e6 events each):")
    covered = 0
    for seed in range(5):
        run = sp.simulate(situation, members, solved.policy,
                          min_events=10 ** 6, seed=seed)
        hit = run.covers(solved.cost_per_time_unit)
        covered += hit
        print(f"  seed {seed}: estimate {run.estimate:.6f} "
              f"+/- {run.half_width:.6f}  covers exact: {hit}")
    print(f"covered on {covered}/5 seeds")

    rerun = sp.simulate(situation, members, solved.policy,
                        min_events=10 ** 6, seed=0)
    first = sp.simulate(situation, members, solved.policy,
                        min_events=10 ** 6, seed=0)
    print(f"\nsame seed twice gives identical estimates: {rerun == first}")


if __name__ == "__main__":
    main()
