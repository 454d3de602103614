import numpy as np
import pytest

from sparepool import (
    ActionProfile,
    NonConvergenceError,
    SizeCapError,
    ValidationError,
    average_cost,
    brute_force_optimum,
    exact_policy_cost,
    extract_policy,
    normalize,
    stage_cost,
    state_independence_spread,
    state_space,
    transition,
    value_iterate,
)
from sparepool.situation import PlayerSpec, SparePartsSituation

from helpers import (
    canonical_situation,
    min_max_stage_cost,
    random_policy,
    random_situation,
    reference_tables,
    single_player,
)


class TestStageCost:
    def test_forced_reject_at_zero(self):
        s = canonical_situation()
        a = ActionProfile(accept=(0,), repair=(1,))
        assert stage_cost(s, [1], 0, a) == pytest.approx(0.125 * 4.0, abs=1e-15)

    def test_accept_pays_holding_only(self):
        s = canonical_situation()
        a = ActionProfile(accept=(1,), repair=(0,))
        assert stage_cost(s, [1], 1, a) == pytest.approx(0.075, abs=1e-15)

    def test_two_players_both_accept(self):
        s = canonical_situation()
        a = ActionProfile(accept=(1, 1), repair=(1, 1))
        assert stage_cost(s, [1, 2], 2, a) == pytest.approx(0.15, abs=1e-15)

    def test_infeasible_accept_at_zero(self):
        s = canonical_situation()
        with pytest.raises(ValidationError, match="boundary"):
            stage_cost(s, [1], 0, ActionProfile(accept=(1,), repair=(0,)))

    def test_infeasible_repair_at_full(self):
        s = canonical_situation()
        with pytest.raises(ValidationError, match="boundary"):
            stage_cost(s, [1], 1, ActionProfile(accept=(1,), repair=(1,)))


class TestTransition:
    def test_accept_at_full_stock(self):
        s = canonical_situation()
        dist = transition(s, [1], 1, ActionProfile(accept=(1,), repair=(0,)))
        assert dist.tolist() == [0.125, 0.875]

    def test_repair_at_zero(self):
        s = canonical_situation()
        dist = transition(s, [1], 0, ActionProfile(accept=(0,), repair=(1,)))
        assert dist.tolist() == [0.75, 0.25]

    def test_distribution_sums_to_one(self):
        rng = np.random.default_rng(3)
        s = canonical_situation()
        cap = 3
        for _ in range(50):
            y = int(rng.integers(0, cap + 1))
            accept = tuple(int(b) if y > 0 else 0 for b in rng.integers(0, 2, 2))
            repair = tuple(int(b) if y < cap else 0 for b in rng.integers(0, 2, 2))
            dist = transition(s, [1, 2], y, ActionProfile(accept=accept, repair=repair))
            assert abs(dist.sum() - 1.0) <= 1e-12
            assert np.all(dist >= 0)


class TestValueIterate:
    def test_state_space(self):
        assert list(state_space(canonical_situation(), [1, 2])) == [0, 1, 2, 3]

    def test_horizon_zero_is_all_zero(self):
        table = value_iterate(canonical_situation(), [1, 2], 0)
        assert table.horizon == 0
        assert np.all(table.at(0) == 0.0)

    def test_one_step_values(self):
        table = value_iterate(canonical_situation(), [1], 1)
        assert table.at(1).tolist() == [0.5, 0.075]

    def test_two_step_values_frozen(self):
        # Recomputed by the standalone scalar recursion in helpers and
        # frozen here.
        table = value_iterate(canonical_situation(), [1], 2)
        assert table.at(2).tolist() == [0.89375, 0.203125]

    @pytest.mark.parametrize("members", [(1,), (2,), (1, 2)])
    def test_matches_reference_recursion(self, members):
        s = canonical_situation()
        horizon = 25
        table = value_iterate(s, members, horizon)
        reference = reference_tables(s, members, horizon)
        for t in range(horizon + 1):
            got = table.at(t)
            for y, expected in reference[t].items():
                assert got[y] == pytest.approx(expected, abs=1e-12)

    def test_difference_within_stage_cost_bounds(self):
        s = canonical_situation()
        members = (1, 2)
        low, high = min_max_stage_cost(s, members)
        table = value_iterate(s, members, 60)
        diffs = np.diff(table.values, axis=0)
        assert diffs.min() >= low - 1e-12
        assert diffs.max() <= high + 1e-12

    def test_span_nonincreasing_on_fixed_instances(self):
        # Regression property on fixed instances, not a theorem: the
        # one-step difference span shrinks monotonically here.
        for s, members in [(canonical_situation(), (1,)),
                           (canonical_situation(), (2,)),
                           (single_player(2, 3.0, 0.7, 1.1, 0.2), (1,))]:
            table = value_iterate(s, members, 80)
            diffs = np.diff(table.values, axis=0)
            spans = diffs.max(axis=1) - diffs.min(axis=1)
            assert np.all(np.diff(spans) <= 1e-12)

    def test_capacity_cap(self):
        with pytest.raises(SizeCapError):
            value_iterate(single_player(capacity=20000), [1], 1)


class TestAverageCost:
    def test_zero_capacity_closed_form_exact(self):
        s = single_player(capacity=0, downtime=4.0, arrival=0.5, repair=1.0, holding=0.3)
        result = average_cost(s, [1])
        assert result.cost_per_time_unit == 0.5 * 4.0
        assert result.certified_gap <= 1e-9

    def test_always_move_instance(self):
        # lam = mu, no holding cost: accept and repair everywhere is
        # optimal and the chain splits time evenly between the two states.
        s = single_player(capacity=1, downtime=4.0, arrival=1.0, repair=1.0, holding=0.0)
        result = average_cost(s, [1])
        assert result.cost_per_time_unit == pytest.approx(2.0, abs=1e-8)

    def test_epoch_and_time_unit_scales_agree(self):
        s = canonical_situation()
        rates = normalize(s)
        result = average_cost(s, [1, 2])
        assert result.cost_per_time_unit == pytest.approx(
            rates.gamma * result.cost_per_epoch, rel=1e-12)

    def test_certified_gap_bounds_policy_suboptimality(self):
        s = canonical_situation()
        result = average_cost(s, [1, 2], tol=1e-9)
        exact = exact_policy_cost(s, [1, 2], result.policy)
        assert exact == result.cost_per_time_unit
        assert result.certified_gap <= 1e-9
        assert result.lower_bound <= result.cost_per_time_unit

    def test_cost_upper_bound(self):
        # Long-run cost never beats rejecting everything at peak stock:
        # lam_S * max d + h * C_S per time unit bounds it from above.
        rng = np.random.default_rng(17)
        for _ in range(10):
            s = random_situation(rng, n=int(rng.integers(1, 3)), cap_total=3)
            members = tuple(range(1, s.n + 1))
            result = average_cost(s, members)
            lam_total = sum(p.arrival_rate for p in s.players)
            bound = lam_total * max(p.downtime_cost for p in s.players)
            bound += s.holding_cost * sum(p.capacity for p in s.players)
            assert result.cost_per_time_unit <= bound + 1e-9

    def test_monotone_under_capacity_relaxation(self):
        rng = np.random.default_rng(29)
        for _ in range(5):
            d = float(rng.uniform(1, 4))
            lam = float(rng.uniform(0.3, 1.5))
            mu = float(rng.uniform(0.3, 1.5))
            h = float(rng.uniform(0.0, 0.5))
            costs = [average_cost(single_player(c, d, lam, mu, h), [1]).cost_per_time_unit
                     for c in range(4)]
            for small, big in zip(costs, costs[1:]):
                assert big <= small + 1e-8

    def test_fixed_policies_never_beat_it(self):
        rng = np.random.default_rng(41)
        s = canonical_situation()
        result = average_cost(s, [1, 2], tol=1e-9)
        for _ in range(30):
            policy = random_policy(rng, s, (1, 2))
            assert exact_policy_cost(s, [1, 2], policy) >= result.cost_per_time_unit - 1e-9

    def test_negative_holding_cost_is_legal(self):
        # Holding cost may be any real; with a negative one the optimal
        # long-run cost can itself go negative.
        s = SparePartsSituation(
            players=(PlayerSpec(1, 1, 4.0, 0.5, 1.0), PlayerSpec(2, 2, 2.0, 1.0, 1.5)),
            holding_cost=-0.2)
        for members in [(1,), (2,), (1, 2)]:
            result = average_cost(s, members)
            assert result.cost_per_time_unit == pytest.approx(
                brute_force_optimum(s, members), abs=1e-6)
        assert average_cost(s, (1, 2)).cost_per_time_unit < 0

    def test_nonconvergence_reports_span(self):
        s = canonical_situation()
        with pytest.raises(NonConvergenceError) as info:
            average_cost(s, [1, 2], tol=1e-15, max_steps=5)
        assert info.value.span is not None

    def test_invalid_tolerance(self):
        with pytest.raises(ValidationError):
            average_cost(canonical_situation(), [1], tol=0.0)


class TestExtractPolicy:
    def test_zero_capacity_forced_reject(self):
        s = single_player(capacity=0, downtime=4.0, arrival=0.5, repair=1.0)
        table = value_iterate(s, [1], 10)
        policy = extract_policy(s, [1], table)
        assert policy.accept.tolist() == [[0]]
        assert policy.repair.tolist() == [[0]]

    def test_always_move_when_holding_is_free(self):
        s = single_player(capacity=1, downtime=4.0, arrival=1.0, repair=1.0, holding=0.0)
        result = average_cost(s, [1])
        assert result.policy.accept.tolist() == [[0], [1]]
        assert result.policy.repair.tolist() == [[1], [0]]
        assert brute_force_optimum(s, [1]) == pytest.approx(
            result.cost_per_time_unit, abs=1e-9)

    def test_heavy_holding_cost_disables_repair(self):
        s = single_player(capacity=1, downtime=4.0, arrival=1.0, repair=1.0, holding=100.0)
        result = average_cost(s, [1])
        assert not result.policy.repair.any()
        assert result.cost_per_time_unit == pytest.approx(4.0, abs=1e-9)


class TestStateIndependence:
    def test_spread_reaches_target(self):
        s = canonical_situation()
        steps, spread = state_independence_spread(s, [1], target=1e-4)
        assert spread <= 1e-4
        assert steps >= 1

    def test_spread_cap(self):
        with pytest.raises(NonConvergenceError):
            state_independence_spread(canonical_situation(), [1, 2],
                                      target=1e-12, max_steps=100)
