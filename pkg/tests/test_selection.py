import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbrdep import mbr
from mbrdep.core import ParserOutput
from mbrdep.diversity import METRICS, DiversityConfig, society_entropy
from mbrdep.selection import (
    SelectionConfig,
    alpha_sweep,
    default_alpha_grid,
    ensemble_validation_select,
    forward_stepwise_select,
    incremental_curve,
    select,
    selection_objective,
)
from mbrdep.synthetic import gold_corpus, noisy_individual
from mbrdep.uas import corpus_uas

GOLD = [(2, 0, 2), (2, 0, 2)]
A = ParserOutput.from_heads("A", GOLD)
A_COPY = ParserOutput.from_heads("A2", GOLD)
B = ParserOutput.from_heads("B", [(0, 1, 2), (2, 0, 2)])  # 4 of 6


def one_word_individuals(rows):
    """Lists of one-word sentences: 1 means the head is right."""
    return [[(0,) if ok else (5,) for ok in row] for row in rows]


def synthetic_pool(seed, k=5, n_sentences=30):
    rng = random.Random(seed)
    gold = gold_corpus(n_sentences, rng)
    rates = [rng.uniform(0.15, 0.6) for _ in range(k)]
    pool = [ParserOutput.from_heads(f"c{i}", noisy_individual(gold, r, rng)) for i, r in enumerate(rates)]
    return pool, gold


class TestObjective:
    def test_single_quality_only(self):
        ind = one_word_individuals([[1, 1, 1, 0, 0]])
        assert selection_objective(ind, [(0,)] * 5, 0.0) == 0.6

    def test_identical_pair(self):
        row = [1, 1, 1, 0, 0]
        ind = one_word_individuals([row, row])
        assert selection_objective(ind, [(0,)] * 5, 1.0) == pytest.approx(1.2, abs=1e-15)

    def test_direct_substitution(self):
        # 7 both right, 5 only first, 3 only second, 5 both wrong: UAS 0.6 and 0.5, 8 of 20 words split
        rows = [[1] * 7 + [1] * 5 + [0] * 3 + [0] * 5, [1] * 7 + [0] * 5 + [1] * 3 + [0] * 5]
        ind = one_word_individuals(rows)
        gold = [(0,)] * 20
        for metric in ("pcdm", "kuncheva"):
            value = selection_objective(ind, gold, 0.5, DiversityConfig(metric))
            assert value == pytest.approx(1.3, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            selection_objective([], GOLD, 1.0)


class TestForwardStepwise:
    def test_alpha_zero_is_sorted_truncation(self):
        pool, gold = synthetic_pool(1)
        ranked = sorted(pool, key=lambda c: -corpus_uas(c, gold))
        for size in range(1, 6):
            result = forward_stepwise_select(pool, gold, SelectionConfig(0.0, size))
            assert result.chosen == tuple(c.name for c in ranked[:size])

    def test_size_one_ignores_alpha(self):
        pool, gold = synthetic_pool(2)
        best = max(pool, key=lambda c: corpus_uas(c, gold)).name
        for alpha in (0.0, 0.7, 100.0):
            for metric in METRICS:
                if metric == "fleiss-kappa":
                    continue
                r = forward_stepwise_select(pool, gold, SelectionConfig(alpha, 1, DiversityConfig(metric)))
                assert r.chosen == (best,)

    def test_duplicate_loses_with_large_alpha(self):
        cands = [A, A_COPY, B]
        assert forward_stepwise_select(cands, GOLD, SelectionConfig(0.0, 2)).chosen == ("A", "A2")
        assert forward_stepwise_select(cands, GOLD, SelectionConfig(5.0, 2)).chosen == ("A", "B")

    def test_step_objectives(self):
        r = forward_stepwise_select([A, A_COPY, B], GOLD, SelectionConfig(0.0, 3))
        assert r.step_objectives == (1.0, 2.0, pytest.approx(2 + 2 / 3))

    def test_quality_only_forces_alpha_zero(self):
        cfg = SelectionConfig(5.0, 2, method="quality-only")
        assert select([A, A_COPY, B], GOLD, cfg).chosen == ("A", "A2")

    def test_ties_go_to_input_order(self):
        r = forward_stepwise_select([A_COPY, A], GOLD, SelectionConfig(0.0, 1))
        assert r.chosen == ("A2",)

    def test_deterministic(self):
        pool, gold = synthetic_pool(3)
        cfg = SelectionConfig(0.4, 3)
        assert forward_stepwise_select(pool, gold, cfg) == forward_stepwise_select(pool, gold, cfg)

    @pytest.mark.parametrize("kwargs", [{"alpha": -1}, {"size": 0}, {"method": "x"}, {"uas_average": "y"}])
    def test_bad_config(self, kwargs):
        with pytest.raises(ValueError):
            SelectionConfig(**kwargs)

    def test_size_too_large(self):
        with pytest.raises(ValueError):
            forward_stepwise_select([A], GOLD, SelectionConfig(0.0, 2))

    def test_duplicate_names(self):
        with pytest.raises(ValueError):
            forward_stepwise_select([A, A], GOLD, SelectionConfig(0.0, 1))

    def test_macro_average(self):
        r = forward_stepwise_select([A, B], GOLD, SelectionConfig(0.0, 2, uas_average="macro"))
        assert r.step_objectives == (1.0, pytest.approx(1 + 2 / 3))

    def test_no_decoding(self):
        pool, gold = synthetic_pool(4)
        mbr.stats.reset()
        forward_stepwise_select(pool, gold, SelectionConfig(1.0, 4))
        assert mbr.stats.ensembles == 0 and mbr.stats.sentences == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 5), st.sampled_from(["society-entropy", "disagreement", "kuncheva", "pcdm"]))
def test_first_pick_independent_of_alpha_and_metric(seed, alpha, metric):
    pool, gold = synthetic_pool(seed, n_sentences=8)
    base = forward_stepwise_select(pool, gold, SelectionConfig(0.0, 1)).chosen
    r = forward_stepwise_select(pool, gold, SelectionConfig(alpha, 3, DiversityConfig(metric)))
    assert r.chosen[0] == base[0]
    assert len(set(r.chosen)) == 3


class TestEnsembleValidation:
    def test_gold_identical_wins(self):
        wrong = ParserOutput.from_heads("W", [(3, 1, 0), (3, 1, 0)])
        r = ensemble_validation_select([wrong, A], GOLD, 1)
        assert r.chosen == ("A",) and r.ensembles_evaluated == 2

    def test_exhaustion(self):
        r = ensemble_validation_select([B, A, A_COPY], GOLD, 3)
        assert sorted(r.chosen) == ["A", "A2", "B"]
        assert r.ensembles_evaluated == 3 + 2 + 1

    def test_complementary_beats_duplicate(self):
        rng = random.Random(0)
        gold = gold_corpus(40, rng)
        strong = noisy_individual(gold, 0.2, rng)
        other = noisy_individual(gold, 0.3, rng)
        s, s2, c = (ParserOutput.from_heads(n, p) for n, p in (("S", strong), ("S2", strong), ("C", other)))
        by_hand = {
            "S2": corpus_uas(mbr.aggregate_heads([s, s2]), gold),
            "C": corpus_uas(mbr.aggregate_heads([s, c]), gold),
        }
        assert by_hand["C"] > by_hand["S2"]
        assert ensemble_validation_select([s, s2, c], gold, 2).chosen == ("S", "C")

    def test_counts_decodes(self):
        pool, gold = synthetic_pool(5)
        mbr.stats.reset()
        r = ensemble_validation_select(pool, gold, 3)
        assert mbr.stats.ensembles == r.ensembles_evaluated == 5 + 4 + 3
        assert r.ensembles_evaluated <= 3 * len(pool)

    def test_custom_aggregator(self):
        calls = []

        def first_member(members):
            calls.append(len(members))
            return members[0].head_vectors()

        r = ensemble_validation_select([B, A], GOLD, 2, aggregator=first_member)
        assert r.chosen == ("A", "B") and calls == [1, 1, 2]


class TestSweep:
    def test_grid(self):
        grid = default_alpha_grid()
        assert grid[0] == 0.0 and grid[-1] == 5.0 and len(grid) == 51

    def test_zero_only(self):
        pool, gold = synthetic_pool(6)
        rows = alpha_sweep(pool, gold, size=2, alpha_grid=[0.0])
        assert len(rows) == 1
        assert rows[0].result.chosen == select(pool, gold, SelectionConfig(0, 2, method="quality-only")).chosen

    def test_dedup_and_consistency(self):
        pool, gold = synthetic_pool(7)
        rows = alpha_sweep(pool, gold, size=3, alpha_grid=[1.0, 0.0, 1.0, 3.0, 0.0])
        assert [r.alpha for r in rows] == [0.0, 1.0, 3.0]
        seen = {}
        for r in rows:
            assert seen.setdefault(r.result.chosen, r.uas) == r.uas

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            alpha_sweep([A], GOLD, alpha_grid=[])


class TestCurve:
    def test_single(self):
        assert incremental_curve([B], GOLD) == [(1, corpus_uas(B, GOLD))]

    def test_flat(self):
        curve = incremental_curve([B, ParserOutput.from_heads("B2", B.head_vectors())], GOLD)
        assert curve[0][1] == curve[1][1]

    def test_empty(self):
        with pytest.raises(ValueError):
            incremental_curve([], GOLD)


def test_duplicate_of_first_pick_adds_no_entropy():
    assert society_entropy([A, A_COPY]) == 0.0
    assert society_entropy([A, B]) > 0.0
