import pytest


@pytest.fixture(scope="session", autouse=True)
def _warm_jit_kernels():
    """Compile (or load from cache) the jitted kernels once, before any
    timed acceptance window starts."""
    from sparepool import average_cost, simulate, state_independence_spread
    from sparepool.situation import PlayerSpec, SparePartsSituation

    s = SparePartsSituation(players=(PlayerSpec(1, 1, 1.0, 1.0, 1.0),),
                            holding_cost=0.1)
    result = average_cost(s, [1])
    state_independence_spread(s, [1], target=1e-2)
    simulate(s, [1], result.policy, min_events=10 ** 4, seed=0)
