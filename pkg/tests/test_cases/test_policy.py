"""
Mutation selection policy test cases
Success statistics, roulette weights, exploration schedules, selection and reward bookkeeping
"""
import math

import numpy as np
import pytest

from chem.molgraph import Element, MutationKind, enumerate_valid_mutations
from chem.smiles import parse
from search.policy import (
    ContextKey, ContextStats, EpsilonSchedule, PolicyContractError, PolicyTable, ScheduleKind, context_keys,
    decode_index, encode_index, epsilon_at, record, select, success_rate, weights,
)
from utils.logger import get_logger

logger = get_logger(__name__)

REFERENCE_LISTING = 33
# chi-square critical value, 3 degrees of freedom, p = 0.01
CHI2_3DOF_P01 = 11.345


def fresh_key(env_id, option=0):
    return ContextKey(MutationKind.AddA, env_id, option)


class TestRatesAndWeights:
    """success_rate and weights test suite"""

    @pytest.mark.smoke
    def test_unseen_context_has_zero_rate(self):
        logger.info("Starting test: test_unseen_context_has_zero_rate")
        assert success_rate(ContextStats()) == 0.0

    def test_rate(self):
        assert success_rate(ContextStats(4, 1)) == 0.25

    def test_weights_from_two_rates(self):
        assert weights([0.5, 0.25], 0.05) == pytest.approx([2 / 3, 1 / 3])

    def test_all_unseen_is_uniform(self):
        assert weights([0.0, 0.0, 0.0, 0.0], 0.05) == pytest.approx([0.25] * 4)

    def test_single_rate(self):
        assert weights([0.7], 0.05) == pytest.approx([1.0])

    def test_floor_applies(self):
        w = weights([0.0, 0.9], 0.1)
        assert w == pytest.approx([0.1, 0.9])
        assert w.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize("rates, p_min", [([], 0.05), ([0.5], 0.0), ([0.5], -0.1)])
    def test_contract(self, rates, p_min):
        with pytest.raises(PolicyContractError):
            weights(rates, p_min)

    def test_table_rejects_bad_parameters(self):
        with pytest.raises(PolicyContractError):
            PolicyTable(p_min=0.0)
        with pytest.raises(PolicyContractError):
            PolicyTable(context_diameter=4)


class TestEpsilonSchedule:
    """epsilon_at test suite"""

    def test_constant(self):
        sch = EpsilonSchedule(ScheduleKind.CONSTANT, eps_floor=0.2)
        assert [epsilon_at(sch, t) for t in (0, 10, 1000)] == [0.2, 0.2, 0.2]

    def test_greedy_decay(self):
        sch = EpsilonSchedule(ScheduleKind.GREEDY, eps_floor=0.1, lam=0.1)
        assert epsilon_at(sch, 0) == 1.0
        assert epsilon_at(sch, 5) == pytest.approx(math.exp(-0.5))
        assert epsilon_at(sch, 100) == 0.1

    @pytest.mark.regression
    def test_power_law_decay(self):
        logger.info("Starting test: test_power_law_decay")
        sch = EpsilonSchedule(ScheduleKind.POWER_LAW, eps_floor=0.1, alpha=0.35)
        assert epsilon_at(sch, 0) == 1.0
        assert epsilon_at(sch, 9) == pytest.approx(10 ** -0.35)
        assert epsilon_at(sch, 10 ** 6) == 0.1

    @pytest.mark.parametrize("kind", list(ScheduleKind))
    def test_never_below_floor_and_non_increasing(self, kind):
        sch = EpsilonSchedule(kind, eps_floor=0.3, lam=0.01, alpha=0.25)
        values = [epsilon_at(sch, t) for t in range(500)]
        assert min(values) >= 0.3
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_zero_floor_allowed(self):
        sch = EpsilonSchedule(ScheduleKind.CONSTANT, eps_floor=0.0)
        assert epsilon_at(sch, 3) == 0.0

    def test_negative_step(self):
        with pytest.raises(PolicyContractError):
            epsilon_at(EpsilonSchedule(), -1)

    @pytest.mark.parametrize("kwargs", [
        dict(eps_floor=1.2),
        dict(eps_floor=0.5, eps0=0.4),
        dict(lam=0.0),
        dict(alpha=-1.0),
    ])
    def test_invalid_schedule(self, kwargs):
        with pytest.raises(PolicyContractError):
            EpsilonSchedule(**kwargs)

    def test_labels(self):
        assert EpsilonSchedule(ScheduleKind.GREEDY, lam=0.01).label() == 'greedy(lambda=0.01)'
        assert EpsilonSchedule(alpha=0.35).label() == 'power_law(alpha=0.35)'
        assert EpsilonSchedule(ScheduleKind.CONSTANT).label() == 'constant'


class TestContextIndex:
    """encode_index and decode_index test suite"""

    @pytest.mark.smoke
    def test_carbon_addition_indices(self):
        logger.info("Starting test: test_carbon_addition_indices")
        assert [encode_index(24, o, REFERENCE_LISTING) for o in range(4)] == [24, 58, 92, 126]

    def test_position_eight(self):
        assert [encode_index(8, o, REFERENCE_LISTING) for o in range(4)] == [8, 42, 76, 110]

    @pytest.mark.regression
    def test_last_position(self):
        assert encode_index(33, 3, REFERENCE_LISTING) == 135
        values = sorted(encode_index(p, o, REFERENCE_LISTING) for p in (24, 33) for o in range(4))
        assert values == [24, 33, 58, 67, 92, 101, 126, 135]

    def test_decode(self):
        assert decode_index(110, REFERENCE_LISTING) == (8, 3)
        assert decode_index(33, REFERENCE_LISTING) == (33, 0)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            encode_index(0, 0, REFERENCE_LISTING)
        with pytest.raises(IndexError):
            encode_index(34, 0, REFERENCE_LISTING)
        with pytest.raises(IndexError):
            decode_index(34, REFERENCE_LISTING)


class TestContextKeys:
    """context_keys test suite"""

    def test_addition_keys_carry_candidate_index(self, aspirin):
        valid = enumerate_valid_mutations(aspirin, {MutationKind.AddA})
        keys = context_keys(valid, aspirin, 2)
        assert [k.option for k in keys] == [m.option for m in valid]
        assert {k.option for k in keys} == {0, 1, 2, 3}

    def test_removal_keys_have_no_option(self, aspirin):
        valid = enumerate_valid_mutations(aspirin, {MutationKind.RmA})
        assert all(k.option is None and k.option_index == 0 for k in context_keys(valid, aspirin, 0))

    def test_bond_change_key_uses_target_order(self, aspirin):
        valid = enumerate_valid_mutations(aspirin, {MutationKind.ChB})
        keys = context_keys(valid, aspirin, 2)
        assert [k.option for k in keys] == [m.option[1] for m in valid]

    def test_symmetric_positions_share_key(self):
        graph = parse('CCC')
        valid = enumerate_valid_mutations(graph, {MutationKind.AddA}, candidates=(Element.C,))
        keys = context_keys(valid, graph, 2)
        by_position = {m.position: k for m, k in zip(valid, keys)}
        assert by_position[0] == by_position[2]
        assert by_position[0] != by_position[1]


class TestSelect:
    """select and record test suite"""

    def _two_arm_table(self):
        table = PolicyTable(p_min=0.05, context_diameter=0)
        table.stats[fresh_key(1)] = ContextStats(2, 1)
        table.stats[fresh_key(2)] = ContextStats(4, 1)
        return table

    @pytest.mark.property
    def test_exploitation_matches_weights(self, aspirin, rng):
        logger.info("Starting test: test_exploitation_matches_weights")
        valid = enumerate_valid_mutations(aspirin, {MutationKind.AddA})[:2]
        keys = [fresh_key(1), fresh_key(2)]
        sch = EpsilonSchedule(ScheduleKind.CONSTANT, eps_floor=0.0, eps0=0.0)
        draws = 10 ** 4
        first = 0
        for _ in range(draws):
            outcome = select(valid, aspirin, self._two_arm_table(), sch, 0, rng, keys=keys)
            assert not outcome.explored
            first += outcome.mutation == valid[0]
        assert first / draws == pytest.approx(2 / 3, rel=0.05)
        assert (draws - first) / draws == pytest.approx(1 / 3, rel=0.05)

    @pytest.mark.property
    def test_forced_exploration_is_uniform(self, aspirin, rng):
        logger.info("Starting test: test_forced_exploration_is_uniform")
        valid = enumerate_valid_mutations(aspirin, {MutationKind.AddA})[:4]
        keys = [fresh_key(i) for i in range(4)]
        table = PolicyTable(context_diameter=0)
        table.stats[keys[0]] = ContextStats(10, 10)
        sch = EpsilonSchedule(ScheduleKind.CONSTANT, eps_floor=1.0, eps0=1.0)
        draws = 10 ** 4
        counts = np.zeros(4)
        for _ in range(draws):
            outcome = select(valid, aspirin, table, sch, 0, rng, keys=keys)
            assert outcome.explored
            counts[valid.index(outcome.mutation)] += 1
        expected = draws / 4
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < CHI2_3DOF_P01

    def test_small_exploitation_sample(self, aspirin, rng):
        valid = enumerate_valid_mutations(aspirin, {MutationKind.AddA})[:2]
        keys = [fresh_key(1), fresh_key(2)]
        sch = EpsilonSchedule(ScheduleKind.CONSTANT, eps_floor=0.0, eps0=0.0)
        picks = [select(valid, aspirin, self._two_arm_table(), sch, 0, rng, keys=keys).mutation
                 for _ in range(600)]
        assert 0.55 < picks.count(valid[0]) / 600 < 0.78

    def test_use_counted_once(self, aspirin, rng):
        valid = enumerate_valid_mutations(aspirin, {MutationKind.RmA})
        table = PolicyTable(context_diameter=2)
        outcome = select(valid, aspirin, table, EpsilonSchedule(), 0, rng)
        assert table.total_uses() == 1
        assert table.get(outcome.key).n_uses == 1
        assert outcome.mutation in valid

    def test_same_seed_same_choice(self, aspirin):
        valid = enumerate_valid_mutations(aspirin)
        first = [select(valid, aspirin, PolicyTable(), EpsilonSchedule(), t, np.random.default_rng(3)).mutation
                 for t in range(5)]
        second = [select(valid, aspirin, PolicyTable(), EpsilonSchedule(), t, np.random.default_rng(3)).mutation
                  for t in range(5)]
        assert first == second

    def test_inverted_exploration(self, aspirin, rng):
        valid = enumerate_valid_mutations(aspirin, {MutationKind.RmA})
        sch = EpsilonSchedule(ScheduleKind.CONSTANT, eps_floor=0.0, eps0=0.0)
        outcome = select(valid, aspirin, PolicyTable(), sch, 0, rng, invert_exploration=True)
        assert outcome.explored

    def test_empty_valid_list(self, aspirin, rng):
        with pytest.raises(PolicyContractError):
            select([], aspirin, PolicyTable(), EpsilonSchedule(), 0, rng)

    @pytest.mark.smoke
    def test_record_success(self, aspirin, rng):
        valid = enumerate_valid_mutations(aspirin, {MutationKind.AddA})
        table = PolicyTable()
        outcome = select(valid, aspirin, table, EpsilonSchedule(), 0, rng)
        record(table, outcome.key, 1)
        assert table.get(outcome.key) == ContextStats(1, 1)
        assert success_rate(table.get(outcome.key)) == 1.0

    def test_record_failure_keeps_success_count(self, aspirin, rng):
        valid = enumerate_valid_mutations(aspirin, {MutationKind.AddA})
        table = PolicyTable()
        outcome = select(valid, aspirin, table, EpsilonSchedule(), 0, rng)
        record(table, outcome.key, 0)
        assert table.get(outcome.key) == ContextStats(1, 0)

    def test_record_contract(self):
        table = PolicyTable()
        table.stats[fresh_key(5)] = ContextStats(1, 1)
        with pytest.raises(PolicyContractError):
            record(table, fresh_key(5), 1)
        with pytest.raises(PolicyContractError):
            record(table, fresh_key(6), 0)
        with pytest.raises(PolicyContractError):
            record(table, fresh_key(5), 2)

    def test_rows_dump(self):
        table = PolicyTable()
        table.stats[fresh_key(40, 1)] = ContextStats(4, 3)
        table.stats[ContextKey(MutationKind.RmA, 10, None)] = ContextStats(2, 0)
        rows = table.rows(listing=[10, 20, 40])
        assert [r['action'] for r in rows] == ['AddA', 'RmA']
        assert rows[0]['rate'] == 0.75
        assert rows[0]['idx'] == encode_index(3, 1, 3)
        assert rows[1]['option'] == ''
        assert rows[1]['idx'] == 1
        assert table.rows()[0]['idx'] == ''
