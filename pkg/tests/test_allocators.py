"""Strategy-level tests: hand-traced instances, enumeration oracles, fuzzing."""

import math

import numpy as np
import pytest

from multiband_alloc.allocators import (
    HIGH_SNR,
    LOW_SNR,
    MAX_SELECT,
    OPTIMAL,
    STRATEGY_ORDER,
    Allocation,
    allocate,
    enumerate_partitions,
    exact_sum_rate,
    high_snr_allocate,
    high_snr_cost_matrix,
    linear_approx_rate,
    log_approx_rate,
    low_snr_allocate,
    low_snr_cost_matrix,
    max_select_allocate,
    optimal_allocate,
    partition_count,
    validate_allocation,
)
from multiband_alloc.assignment import solve_assignment
from multiband_alloc.channel import (
    ChannelParams,
    realization_from_squared_gains,
    sample_realization,
    trial_rng,
)
from multiband_alloc.errors import GuardError, InfeasibleError, ValidationError
from multiband_alloc.power import water_fill

LOG2_5 = math.log2(5.0)
LOG2_3 = math.log2(3.0)


def unit_params(num_links=2, num_subchannels=4, budgets=None):
    """K x N setup with B/N = 1 and N0 = 1 so H equals the squared gain."""
    if budgets is None:
        budgets = (1.0,) * num_links
    return ChannelParams(
        num_links=num_links,
        num_subchannels=num_subchannels,
        total_bandwidth=float(num_subchannels),
        noise_psd=1.0,
        shadow_prob=0.0,
        power_budgets=budgets,
    )


def inject(params, gains):
    return realization_from_squared_gains(params, np.asarray(gains, dtype=float))


class TestAllocationType:
    def test_normalizes_fields(self):
        alloc = Allocation(
            subchannels_of_link=[[1, 0], [2, 3]],
            powers=[[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.5, 0.5]],
            strategy_tag=LOW_SNR,
        )
        assert alloc.subchannels_of_link == ((1, 0), (2, 3))
        assert isinstance(alloc.powers, np.ndarray)
        with pytest.raises(ValueError):
            alloc.powers[0, 0] = 2.0


class TestValidateAllocation:
    def make(self, sets, powers):
        return Allocation(subchannels_of_link=sets, powers=powers, strategy_tag=OPTIMAL)

    def test_accepts_valid(self):
        params = unit_params()
        powers = np.zeros((2, 4))
        powers[0, 0] = 1.0
        validate_allocation(params, self.make(((0, 1), (2, 3)), powers))

    @pytest.mark.parametrize(
        "sets,power_edit,message",
        [
            (((0, 1),), None, "2 entries"),
            (((0,), (1, 2)), None, "quota"),
            (((0, 9), (1, 2)), None, "out of range"),
            (((0, 1), (1, 2)), None, "more than one link"),
            (((0, 1), (2, 3)), ("shape",), "shape"),
            (((0, 1), (2, 3)), (0, 0, -1.0), "negative power"),
            (((0, 1), (2, 3)), (0, 2, 0.5), "unassigned"),
            (((0, 1), (2, 3)), (0, 0, 5.0), "exceeds budget"),
        ],
    )
    def test_names_first_violation(self, sets, power_edit, message):
        params = unit_params()
        if power_edit == ("shape",):
            powers = np.zeros((2, 3))
        else:
            powers = np.zeros((2, 4))
            if power_edit is not None:
                k, n, val = power_edit
                powers[k, n] = val
        with pytest.raises(ValidationError, match=message):
            validate_allocation(params, self.make(sets, powers))


class TestExactSumRate:
    def test_all_zero_powers_give_zero_rate(self):
        params = unit_params()
        chan = inject(params, np.ones((2, 4)))
        alloc = Allocation(((0, 1), (2, 3)), np.zeros((2, 4)), OPTIMAL)
        report = exact_sum_rate(params, chan, alloc)
        assert report.total_rate == 0.0
        assert report.per_link_rate == (0.0, 0.0)

    def test_unit_case(self):
        params = unit_params(num_links=1, num_subchannels=1, budgets=(1.0,))
        chan = inject(params, [[1.0]])
        alloc = Allocation(((0,),), [[1.0]], OPTIMAL)
        assert exact_sum_rate(params, chan, alloc).total_rate == 1.0

    def test_total_is_sum_of_links(self):
        params = unit_params()
        chan = sample_realization(params, trial_rng(3, 0))
        alloc = optimal_allocate(params, chan)
        report = exact_sum_rate(params, chan, alloc)
        acc = 0.0
        for r in report.per_link_rate:
            acc += r
        assert report.total_rate == acc
        assert all(r >= 0 for r in report.per_link_rate)


class TestLowSnr:
    def test_hand_traced_example(self):
        params = unit_params()
        chan = inject(params, [[4.0, 1.0, 1.0, 1.0], [3.0, 2.0, 1.0, 1.0]])
        assert solve_assignment(low_snr_cost_matrix(params, chan)).objective_value == 6.0
        alloc = low_snr_allocate(params, chan)
        assert alloc.powers[0, 0] == 1.0
        assert alloc.powers[1, 1] == 1.0
        assert alloc.powers.sum() == 2.0
        # Fill rule: link 0 takes channel 2 (tie with 3 breaks low), link 1 takes 3.
        assert alloc.subchannels_of_link == ((0, 2), (1, 3))
        total = exact_sum_rate(params, chan, alloc).total_rate
        assert total == pytest.approx(LOG2_5 + LOG2_3, abs=1e-12)

    def test_single_link_powers_global_argmax(self):
        params = unit_params(num_links=1, budgets=(2.0,))
        chan = inject(params, [[0.3, 0.9, 2.5, 0.1]])
        alloc = low_snr_allocate(params, chan)
        assert alloc.powers[0, 2] == 2.0
        assert alloc.subchannels_of_link == ((0, 1, 2, 3),)

    def test_budget_scales_cost_matrix(self):
        params = unit_params(budgets=(2.0, 0.5))
        chan = inject(params, [[1.0, 3.0, 1.0, 1.0], [1.0, 1.0, 4.0, 1.0]])
        cost = low_snr_cost_matrix(params, chan)
        assert cost.values[0, 1] == 6.0
        assert cost.values[1, 2] == 2.0

    def test_all_zero_row_still_allocates(self):
        params = unit_params()
        chan = inject(params, [[0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 3.0, 4.0]])
        alloc = low_snr_allocate(params, chan)
        validate_allocation(params, alloc)
        assert exact_sum_rate(params, chan, alloc).per_link_rate[0] == 0.0


class TestHighSnr:
    def test_hand_traced_example(self):
        params = unit_params(budgets=(2.0, 2.0))
        chan = inject(params, [[4.0, 3.0, 1.0, 1.0], [1.0, 1.0, 4.0, 3.0]])
        alloc = high_snr_allocate(params, chan)
        assert alloc.subchannels_of_link == ((0, 1), (2, 3))
        assert np.array_equal(
            alloc.powers,
            [[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]],
        )
        total = exact_sum_rate(params, chan, alloc).total_rate
        assert total == pytest.approx(2 * (LOG2_5 + 2.0), abs=1e-12)

    def test_all_equal_gains_any_partition_same_rate(self):
        params = unit_params(budgets=(2.0, 2.0))
        chan = inject(params, np.full((2, 4), 3.0))
        alloc = high_snr_allocate(params, chan)
        validate_allocation(params, alloc)
        total = exact_sum_rate(params, chan, alloc).total_rate
        assert total == pytest.approx(4 * math.log2(4.0), abs=1e-12)

    def test_zero_gain_cells_forbidden(self):
        params = unit_params()
        gains = np.array([[0.0, 0.0, 2.0, 3.0], [5.0, 4.0, 3.0, 2.0]])
        chan = inject(params, gains)
        alloc = high_snr_allocate(params, chan)
        assert alloc.subchannels_of_link[0] == (2, 3)

    def test_short_link_raises_with_link_id(self):
        params = unit_params()
        gains = np.array([[0.0, 0.0, 0.0, 3.0], [5.0, 4.0, 3.0, 2.0]])
        chan = inject(params, gains)
        with pytest.raises(InfeasibleError, match="link 0"):
            high_snr_allocate(params, chan)

    def test_single_link_pair(self):
        params = unit_params(num_links=1, num_subchannels=2, budgets=(3.0,))
        chan = inject(params, [[1.0, 2.0]])
        alloc = high_snr_allocate(params, chan)
        assert alloc.subchannels_of_link == ((0, 1),)
        assert np.array_equal(alloc.powers, [[1.5, 1.5]])

    def test_partition_maximizes_log_gain_sum(self):
        # Argmax-level check against full partition enumeration.
        rng = np.random.default_rng(4321)
        for _ in range(30):
            params = unit_params(budgets=(2.0, 2.0))
            chan = inject(params, rng.exponential(1.0, size=(2, 4)))
            alloc = high_snr_allocate(params, chan)
            lh = np.log(chan.normalized_gains)
            achieved = sum(lh[k, list(s)].sum() for k, s in enumerate(alloc.subchannels_of_link))
            best = max(
                sum(lh[k, list(s)].sum() for k, s in enumerate(cand))
                for cand in enumerate_partitions(4, 2)
            )
            assert achieved >= best - 1e-9


class TestPartitionEnumeration:
    @pytest.mark.parametrize(
        "n,k,count",
        [(4, 2, 6), (8, 2, 70), (16, 2, 12870), (6, 3, 90), (5, 2, 30), (4, 1, 1)],
    )
    def test_count_matches_multinomial(self, n, k, count):
        assert partition_count(n, k) == count
        if count <= 500:
            assert len(list(enumerate_partitions(n, k))) == count

    def test_lexicographic_order_and_disjointness(self):
        parts = list(enumerate_partitions(4, 2))
        assert parts[0] == ((0, 1), (2, 3))
        assert parts[-1] == ((2, 3), (0, 1))
        assert parts == sorted(parts)
        for cand in parts:
            flat = [n for s in cand for n in s]
            assert len(flat) == len(set(flat)) == 4

    def test_surplus_left_out(self):
        for cand in enumerate_partitions(5, 2):
            flat = [n for s in cand for n in s]
            assert len(flat) == 4


class TestOptimal:
    def test_guard_trips_with_counts_in_message(self):
        params = unit_params(num_links=2, num_subchannels=8)
        chan = inject(params, np.ones((2, 8)))
        with pytest.raises(GuardError, match="70"):
            optimal_allocate(params, chan, partition_guard=10)

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(909)
        params = unit_params(budgets=(1.5, 0.7))
        for _ in range(25):
            chan = inject(params, rng.exponential(1.0, size=(2, 4)))
            alloc = optimal_allocate(params, chan)
            total = exact_sum_rate(params, chan, alloc).total_rate
            h = chan.normalized_gains
            best = -math.inf
            for cand in enumerate_partitions(4, 2):
                rate = 0.0
                for k, subset in enumerate(cand):
                    powers = water_fill(h[k, list(subset)], params.power_budgets[k]).powers
                    rate += np.log2(1.0 + powers * h[k, list(subset)]).sum()
                best = max(best, rate)
            assert total == pytest.approx(best, rel=1e-12, abs=1e-9)

    def test_all_equal_gains_ties_high_snr(self):
        params = unit_params(budgets=(2.0, 2.0))
        chan = inject(params, np.full((2, 4), 1.7))
        opt = exact_sum_rate(params, chan, optimal_allocate(params, chan)).total_rate
        high = exact_sum_rate(params, chan, high_snr_allocate(params, chan)).total_rate
        assert opt == pytest.approx(high, rel=1e-12)

    def test_zero_gain_link_gets_zero_power(self):
        params = unit_params()
        chan = inject(params, [[0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 3.0, 4.0]])
        alloc = optimal_allocate(params, chan)
        validate_allocation(params, alloc)
        assert (alloc.powers[0] == 0).all()


class TestMaxSelect:
    def test_hand_traced_greedy_walk(self):
        params = unit_params()
        chan = inject(params, [[4.0, 1.0, 1.0, 1.0], [3.0, 2.0, 1.0, 1.0]])
        alloc = max_select_allocate(params, chan)
        assert alloc.subchannels_of_link == ((0, 2), (1, 3))

    def test_single_link_takes_everything(self):
        params = unit_params(num_links=1, budgets=(1.0,))
        chan = inject(params, [[0.1, 0.4, 0.2, 0.3]])
        alloc = max_select_allocate(params, chan)
        assert alloc.subchannels_of_link == ((0, 1, 2, 3),)
        opt = optimal_allocate(params, chan)
        assert exact_sum_rate(params, chan, alloc).total_rate == pytest.approx(
            exact_sum_rate(params, chan, opt).total_rate, rel=1e-12
        )

    def test_all_equal_gains_tie_optimal(self):
        params = unit_params(budgets=(2.0, 2.0))
        chan = inject(params, np.full((2, 4), 0.9))
        greedy = exact_sum_rate(params, chan, max_select_allocate(params, chan)).total_rate
        opt = exact_sum_rate(params, chan, optimal_allocate(params, chan)).total_rate
        assert greedy == pytest.approx(opt, rel=1e-12)

    def test_equal_split_rule(self):
        params = unit_params(budgets=(2.0, 2.0))
        chan = inject(params, [[9.0, 1.0, 8.0, 1.0], [1.0, 7.0, 1.0, 6.0]])
        alloc = max_select_allocate(params, chan, power_rule="equal_split")
        assert np.array_equal(
            alloc.powers, [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]
        )

    def test_unknown_power_rule_rejected(self):
        params = unit_params()
        chan = inject(params, np.ones((2, 4)))
        with pytest.raises(ValidationError):
            max_select_allocate(params, chan, power_rule="argmax")

    def test_zero_gain_link_gets_zero_power(self):
        params = unit_params()
        chan = inject(params, [[1.0, 2.0, 3.0, 4.0], [0.0, 0.0, 0.0, 0.0]])
        alloc = max_select_allocate(params, chan)
        validate_allocation(params, alloc)
        assert (alloc.powers[1] == 0).all()


class TestApproxObjectives:
    def test_linear_matches_closed_form(self):
        params = unit_params()
        chan = inject(params, [[4.0, 1.0, 1.0, 1.0], [3.0, 2.0, 1.0, 1.0]])
        alloc = low_snr_allocate(params, chan)
        assert linear_approx_rate(params, chan, alloc) == pytest.approx(
            6.0 / math.log(2.0), rel=1e-12
        )

    def test_log_matches_closed_form(self):
        params = unit_params(budgets=(2.0, 2.0))
        chan = inject(params, [[4.0, 3.0, 1.0, 1.0], [1.0, 1.0, 4.0, 3.0]])
        alloc = high_snr_allocate(params, chan)
        expected = math.log2(4.0) + math.log2(3.0) + math.log2(4.0) + math.log2(3.0)
        assert log_approx_rate(params, chan, alloc) == pytest.approx(expected, rel=1e-12)

    def test_log_of_unpowered_allocation_is_zero(self):
        params = unit_params()
        chan = inject(params, np.ones((2, 4)))
        alloc = Allocation(((0, 1), (2, 3)), np.zeros((2, 4)), OPTIMAL)
        assert log_approx_rate(params, chan, alloc) == 0.0


class TestDispatcherAndInvariants:
    def test_dispatch_tags(self):
        params = unit_params()
        chan = sample_realization(params, trial_rng(1, 0))
        for tag in STRATEGY_ORDER:
            assert allocate(tag, params, chan).strategy_tag == tag

    def test_unknown_tag_rejected(self):
        params = unit_params()
        chan = sample_realization(params, trial_rng(1, 0))
        with pytest.raises(ValidationError):
            allocate("greedy", params, chan)

    @pytest.mark.parametrize("num_links,num_subchannels", [(2, 4), (2, 5), (3, 7), (1, 3), (4, 8)])
    def test_quota_disjointness_fuzz(self, num_links, num_subchannels):
        rng = np.random.default_rng(num_links * 100 + num_subchannels)
        params = unit_params(
            num_links=num_links,
            num_subchannels=num_subchannels,
            budgets=tuple(float(b) for b in rng.uniform(0.2, 3.0, num_links)),
        )
        quota = num_subchannels // num_links
        for _ in range(20):
            chan = inject(params, rng.exponential(1.0, size=(num_links, num_subchannels)))
            for tag in STRATEGY_ORDER:
                alloc = allocate(tag, params, chan)
                validate_allocation(params, alloc)
                used = [n for s in alloc.subchannels_of_link for n in s]
                assert len(used) == len(set(used)) == num_links * quota

    def test_sandwich_bound_fuzz(self):
        rng = np.random.default_rng(1618)
        for trial in range(60):
            budget = float(10.0 ** rng.uniform(-3, 3))
            params = unit_params(budgets=(budget, budget))
            chan = inject(params, rng.exponential(1.0, size=(2, 4)))
            opt = exact_sum_rate(params, chan, optimal_allocate(params, chan)).total_rate
            for tag in (LOW_SNR, HIGH_SNR, MAX_SELECT):
                rate = exact_sum_rate(params, chan, allocate(tag, params, chan)).total_rate
                assert opt >= rate - 1e-12 * max(1.0, abs(opt))

    def test_shadowed_instances_respect_invariants(self):
        params = ChannelParams(
            num_links=2,
            num_subchannels=6,
            total_bandwidth=6.0,
            noise_psd=1.0,
            shadow_prob=0.3,
            shadow_attenuation=0.1,
            power_budgets=(1.0, 1.0),
        )
        for trial in range(20):
            chan = sample_realization(params, trial_rng(22, trial))
            for tag in STRATEGY_ORDER:
                validate_allocation(params, allocate(tag, params, chan))
