import numpy as np
import pytest

from sparepool import (
    BirthDeathChain,
    ReducibleChainError,
    SizeCapError,
    StationaryPolicy,
    ValidationError,
    average_cost,
    brute_force_optimum,
    enumerate_policies,
    exact_policy_cost,
    simulate,
    stationary_distribution,
)

from helpers import canonical_situation, random_situation, single_player


class TestStationaryDistribution:
    def test_two_state_symmetric(self):
        pi = stationary_distribution(BirthDeathChain(up=np.ones(2), down=np.ones(2)))
        assert pi.tolist() == [0.5, 0.5]

    def test_three_state_detailed_balance(self):
        chain = BirthDeathChain(up=np.ones(3), down=np.full(3, 2.0))
        pi = stationary_distribution(chain)
        np.testing.assert_allclose(pi, [4 / 7, 2 / 7, 1 / 7], atol=1e-15)

    def test_equal_rates_are_uniform(self):
        chain = BirthDeathChain(up=np.full(5, 1.3), down=np.full(5, 1.3))
        pi = stationary_distribution(chain)
        np.testing.assert_allclose(pi, np.full(5, 0.2), atol=1e-15)

    def test_reducible_chain_rejected(self):
        up = np.array([1.0, 0.0, 1.0, 1.0])
        with pytest.raises(ReducibleChainError):
            stationary_distribution(BirthDeathChain(up=up, down=np.ones(4)))

    def test_sums_to_one_and_balances(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m = int(rng.integers(1, 40))
            chain = BirthDeathChain(up=rng.uniform(0.1, 5.0, m + 1),
                                    down=rng.uniform(0.1, 5.0, m + 1))
            pi = stationary_distribution(chain)
            assert abs(pi.sum() - 1.0) <= 1e-14
            flow = pi[:-1] * chain.up[:-1] - pi[1:] * chain.down[1:]
            assert np.abs(flow).max() <= 1e-12

    def test_single_state(self):
        pi = stationary_distribution(BirthDeathChain(up=np.zeros(1), down=np.zeros(1)))
        assert pi.tolist() == [1.0]


class TestExactPolicyCost:
    def test_zero_capacity_forced_policy(self):
        s = single_player(capacity=0, downtime=4.0, arrival=0.5, repair=1.0, holding=0.3)
        policy = StationaryPolicy(members=(1,), accept=np.zeros((1, 1), np.uint8),
                                  repair=np.zeros((1, 1), np.uint8))
        assert exact_policy_cost(s, [1], policy) == 0.5 * 4.0

    def test_always_move_two_state(self):
        s = single_player(capacity=1, downtime=4.0, arrival=1.0, repair=1.0, holding=0.0)
        policy = StationaryPolicy(members=(1,), accept=np.array([[0], [1]], np.uint8),
                                  repair=np.array([[1], [0]], np.uint8))
        assert exact_policy_cost(s, [1], policy) == pytest.approx(2.0, abs=1e-15)

    def test_reducible_policy_settles_at_the_bottom(self):
        # Accept but never repair: from full stock the chain drains to 0
        # and stays, so only the emergency stream is ever paid.
        s = single_player(capacity=1, downtime=4.0, arrival=1.0, repair=1.0, holding=100.0)
        policy = StationaryPolicy(members=(1,), accept=np.array([[0], [1]], np.uint8),
                                  repair=np.array([[0], [0]], np.uint8))
        assert exact_policy_cost(s, [1], policy) == pytest.approx(4.0, abs=1e-15)

    def test_absorbing_at_top_when_idle(self):
        # Reject and never repair: the chain never leaves full stock.
        s = single_player(capacity=2, downtime=4.0, arrival=1.0, repair=1.0, holding=0.5)
        policy = StationaryPolicy(members=(1,), accept=np.zeros((3, 1), np.uint8),
                                  repair=np.zeros((3, 1), np.uint8))
        assert exact_policy_cost(s, [1], policy) == pytest.approx(4.0 + 0.5 * 2, abs=1e-15)

    def test_matches_certified_solution_on_canonical_instance(self):
        s = canonical_situation()
        result = average_cost(s, [1, 2])
        cost = exact_policy_cost(s, [1, 2], result.policy)
        assert cost == pytest.approx(result.cost_per_time_unit, abs=result.certified_gap + 1e-12)

    def test_policy_member_mismatch(self):
        s = canonical_situation()
        policy = StationaryPolicy(members=(1,), accept=np.zeros((2, 1), np.uint8),
                                  repair=np.zeros((2, 1), np.uint8))
        with pytest.raises(ValidationError):
            exact_policy_cost(s, [1, 2], policy)


class TestBruteForce:
    def test_free_holding_two_state(self):
        s = single_player(capacity=1, downtime=4.0, arrival=1.0, repair=1.0, holding=0.0)
        assert brute_force_optimum(s, [1]) == pytest.approx(2.0, abs=1e-15)

    def test_heavy_holding_never_repairs(self):
        s = single_player(capacity=1, downtime=4.0, arrival=1.0, repair=1.0, holding=100.0)
        assert brute_force_optimum(s, [1]) == pytest.approx(4.0, abs=1e-15)

    def test_every_policy_at_least_optimal(self):
        s = single_player(capacity=2, downtime=3.0, arrival=0.8, repair=1.2, holding=0.4)
        best = brute_force_optimum(s, [1])
        costs = [exact_policy_cost(s, [1], p) for p in enumerate_policies(s, [1])]
        assert min(costs) == best
        assert all(c >= best for c in costs)

    def test_agrees_with_certified_solver(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            s = random_situation(rng, n=2, cap_total=3)
            members = (1, 2)
            assert average_cost(s, members).cost_per_time_unit == pytest.approx(
                brute_force_optimum(s, members), abs=1e-6)

    def test_size_cap(self):
        s = single_player(capacity=30)
        with pytest.raises(SizeCapError):
            brute_force_optimum(s, [1])


class TestSimulate:
    def test_zero_capacity_covers_closed_form(self):
        s = single_player(capacity=0, downtime=4.0, arrival=0.5, repair=1.0, holding=0.0)
        policy = StationaryPolicy(members=(1,), accept=np.zeros((1, 1), np.uint8),
                                  repair=np.zeros((1, 1), np.uint8))
        result = simulate(s, [1], policy, min_events=10 ** 5, seed=1)
        assert result.covers(2.0)

    def test_covers_exact_value(self):
        s = single_player(capacity=1, downtime=4.0, arrival=1.0, repair=1.0, holding=0.0)
        policy = average_cost(s, [1]).policy
        result = simulate(s, [1], policy, min_events=10 ** 6, seed=2024)
        assert result.covers(2.0)

    def test_seeded_runs_are_identical(self):
        s = canonical_situation()
        policy = average_cost(s, [1, 2]).policy
        a = simulate(s, [1, 2], policy, min_events=10 ** 4, seed=9)
        b = simulate(s, [1, 2], policy, min_events=10 ** 4, seed=9)
        assert a == b

    def test_event_minimum_enforced(self):
        s = canonical_situation()
        policy = average_cost(s, [1, 2]).policy
        with pytest.raises(ValidationError, match="min_events"):
            simulate(s, [1, 2], policy, min_events=10)

    def test_document_round_trip(self):
        import json

        s = canonical_situation()
        policy = average_cost(s, [1, 2]).policy
        result = simulate(s, [1, 2], policy, min_events=10 ** 4, seed=5)
        doc = json.loads(json.dumps(result.to_document()))
        assert doc["estimate"] == result.estimate
        assert doc["half_width"] == result.half_width
        assert doc["events"] == result.events
        assert doc["seed"] == result.seed
