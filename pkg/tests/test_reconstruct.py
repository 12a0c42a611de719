import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanforge import (
    OverlapPolicy,
    PredictedMwe,
    ReconstructionConfig,
    Thresholds,
    TokenProbabilities,
    brute_force_reference,
    dep_distances_from_heads,
    dep_filter,
    enumerate_candidates,
    load_predictions,
    reconstruct_sentence,
    resolve_overlaps,
    write_predictions,
)
from spanforge.errors import ConfigError

from .conftest import random_forest_heads

ALLOW_ALL = ReconstructionConfig(overlap_policy=OverlapPolicy.ALLOW_ALL)


def probs_of(p_start, p_end, p_inside, sid="s"):
    return TokenProbabilities(sid, tuple(p_start), tuple(p_end), tuple(p_inside))


def random_instance(rng: random.Random, n_max=12):
    n = rng.randint(1, n_max)
    def vec():
        return tuple(round(rng.random(), 3) for _ in range(n))
    probs = probs_of(vec(), vec(), vec())
    thresholds = Thresholds(
        round(rng.random(), 2), round(rng.random(), 2), round(rng.random(), 2)
    )
    policy = rng.choice([OverlapPolicy.GREEDY_NONOVERLAP, OverlapPolicy.ALLOW_ALL])
    cfg = ReconstructionConfig(overlap_policy=policy)
    matrix = None
    if rng.random() < 0.5:
        matrix = dep_distances_from_heads(random_forest_heads(rng, n))
    return probs, thresholds, cfg, matrix


class TestEnumerate:
    def test_single_pair_with_tuned_gates(self):
        probs = probs_of([0.9, 0, 0, 0], [0, 0, 0, 0.9], [0, 0.1, 0.1, 0])
        got = enumerate_candidates(probs, Thresholds(0.5, 0.6, 0.2), ALLOW_ALL)
        assert [c.token_indices for c in got] == [(0, 3)]
        assert got[0].score == pytest.approx(0.81)

    def test_all_zero_is_empty_with_zero_expansions(self):
        counters = {}
        probs = probs_of([0.0] * 6, [0.0] * 6, [0.0] * 6)
        got = enumerate_candidates(probs, Thresholds(0.2, 0.2, 0.2), ALLOW_ALL,
                                   counters=counters)
        assert got == []
        assert counters["pair_expansions"] == 0

    def test_width_limit(self):
        n = 15
        p_start = [1.0] + [0.0] * (n - 1)
        p_end = [0.0] * (n - 1) + [1.0]
        probs = probs_of(p_start, p_end, [0.0] * n)
        assert enumerate_candidates(probs, Thresholds(0.5, 0.5, 0.5), ALLOW_ALL) == []

    def test_member_budget(self):
        # boundaries at (0, 7) and six interior tokens above the gate: 8 members
        n = 8
        probs = probs_of(
            [1.0] + [0.0] * 7, [0.0] * 7 + [1.0], [0.0] + [1.0] * 6 + [0.0]
        )
        assert enumerate_candidates(probs, Thresholds(0.5, 0.5, 0.5), ALLOW_ALL) == []

    def test_interior_below_gate_creates_discontinuity(self):
        probs = probs_of([1.0, 0, 0, 0], [0, 0, 0, 1.0], [0, 0.9, 0.1, 0])
        got = enumerate_candidates(probs, Thresholds(0.5, 0.5, 0.5), ALLOW_ALL)
        assert [c.token_indices for c in got] == [(0, 1, 3)]

    def test_output_sorted_by_start_then_end(self):
        probs = probs_of([1.0, 1.0, 0, 0], [0, 0, 1.0, 1.0], [0.0] * 4)
        got = enumerate_candidates(probs, Thresholds(0.5, 0.5, 0.5), ALLOW_ALL)
        assert [c.token_indices[0:1] + c.token_indices[-1:] for c in got] == [
            (0, 2), (0, 3), (1, 2), (1, 3),
        ]

    def test_expansion_counter_accumulates(self):
        probs = probs_of([1.0, 1.0, 0, 0], [0, 0, 1.0, 1.0], [0.0] * 4)
        counters = {}
        enumerate_candidates(probs, Thresholds(0.5, 0.5, 0.5), ALLOW_ALL, counters=counters)
        assert counters["pair_expansions"] == 4


class TestDepFilter:
    def test_near_discontinuous_kept(self):
        matrix = dep_distances_from_heads([None, 0, 1, 0])  # dist(0,3)=1
        cands = [PredictedMwe((0, 3), 1.0)]
        assert dep_filter(cands, matrix, ALLOW_ALL) == cands

    def test_far_discontinuous_dropped(self):
        # two disconnected components: dist(2, 9) = cap = 5 > 4
        heads = [None, 0, 1, None, 3, 4, None, 6, 7, 8]
        matrix = dep_distances_from_heads(heads)
        assert matrix.dist[2, 9] == 5
        cands = [PredictedMwe((2, 9), 1.0)]
        assert dep_filter(cands, matrix, ALLOW_ALL) == []

    def test_contiguous_passes_unconditionally(self):
        heads = [None, None, None, None]  # all distances capped
        matrix = dep_distances_from_heads(heads)
        cands = [PredictedMwe((1, 2, 3), 1.0)]
        assert dep_filter(cands, matrix, ALLOW_ALL) == cands

    def test_consecutive_member_rule(self):
        # members (0, 2, 4): checks dist(0,2) and dist(2,4) only
        heads = [None, 0, 1, 2, 3]
        matrix = dep_distances_from_heads(heads)
        cands = [PredictedMwe((0, 2, 4), 1.0)]
        assert dep_filter(cands, matrix, ALLOW_ALL) == cands

    def test_missing_matrix_with_discontinuous_candidate(self):
        with pytest.raises(ConfigError):
            dep_filter([PredictedMwe((0, 2), 1.0)], None, ALLOW_ALL)

    def test_missing_matrix_with_contiguous_candidates_is_fine(self):
        cands = [PredictedMwe((0, 1), 1.0)]
        assert dep_filter(cands, None, ALLOW_ALL) == cands


class TestResolveOverlaps:
    def test_greedy_keeps_higher_score(self):
        a = PredictedMwe((0, 1), 0.9)
        b = PredictedMwe((1, 2), 0.8)
        got = resolve_overlaps([a, b], OverlapPolicy.GREEDY_NONOVERLAP)
        assert got == [a]

    def test_disjoint_candidates_both_kept(self):
        a = PredictedMwe((0, 1), 0.9)
        b = PredictedMwe((3, 4), 0.8)
        assert resolve_overlaps([a, b], OverlapPolicy.GREEDY_NONOVERLAP) == [a, b]

    def test_allow_all_is_identity(self):
        cands = [PredictedMwe((0, 1), 0.1), PredictedMwe((0, 2), 0.9)]
        assert resolve_overlaps(cands, OverlapPolicy.ALLOW_ALL) == cands

    def test_tie_break_prefers_earlier_span(self):
        a = PredictedMwe((1, 2), 0.5)
        b = PredictedMwe((0, 1), 0.5)
        got = resolve_overlaps([a, b], OverlapPolicy.GREEDY_NONOVERLAP)
        assert got == [b]


class TestOracleEquivalence:
    def test_exhaustive_small_seeds(self):
        rng = random.Random(4242)
        for _ in range(300):
            probs, thresholds, cfg, matrix = random_instance(rng)
            fast = reconstruct_sentence(probs, thresholds, cfg, matrix)
            slow = brute_force_reference(probs, thresholds, cfg, matrix)
            assert [c.token_indices for c in fast] == [c.token_indices for c in slow]
            for f, s in zip(fast, slow):
                assert f.score == pytest.approx(s.score)

    def test_guard_rejects_long_sentences(self):
        probs = probs_of([0.0] * 17, [0.0] * 17, [0.0] * 17)
        with pytest.raises(ValueError, match="16"):
            brute_force_reference(probs, Thresholds(0.5, 0.5, 0.5), ALLOW_ALL)

    def test_determinism(self):
        rng = random.Random(7)
        probs, thresholds, cfg, matrix = random_instance(rng)
        first = reconstruct_sentence(probs, thresholds, cfg, matrix)
        second = reconstruct_sentence(probs, thresholds, cfg, matrix)
        assert first == second


class TestMonotonicity:
    """Boundary gates filter monotonically. The inside gate does not: it
    shrinks member sets, which can pull an over-budget pair back under
    max_members, so with min_members=2 raising tau_inside can only add
    candidates, never remove them."""

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=100, deadline=None)
    def test_raising_boundary_thresholds_never_adds_candidates(self, seed):
        rng = random.Random(seed)
        probs, thresholds, cfg, _ = random_instance(rng)
        base = len(enumerate_candidates(probs, thresholds, ALLOW_ALL))
        for axis in ("tau_start", "tau_end"):
            bump = min(1.0, getattr(thresholds, axis) + rng.random() * 0.5)
            raised = Thresholds(**{
                "tau_start": thresholds.tau_start,
                "tau_end": thresholds.tau_end,
                "tau_inside": thresholds.tau_inside,
                axis: bump,
            })
            assert len(enumerate_candidates(probs, raised, ALLOW_ALL)) <= base

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=100, deadline=None)
    def test_raising_inside_threshold_never_removes_candidates(self, seed):
        rng = random.Random(seed)
        probs, thresholds, cfg, _ = random_instance(rng)
        base = len(enumerate_candidates(probs, thresholds, ALLOW_ALL))
        bump = min(1.0, thresholds.tau_inside + rng.random() * 0.5)
        raised = Thresholds(thresholds.tau_start, thresholds.tau_end, bump)
        assert len(enumerate_candidates(probs, raised, ALLOW_ALL)) >= base

    def test_inside_threshold_counterexample(self):
        # the pair (0, 8) has 9 members at a low inside gate (over budget)
        # and exactly 2 at a high one, so raising the gate adds a candidate
        n = 9
        probs = probs_of(
            [1.0] + [0.0] * (n - 1),
            [0.0] * (n - 1) + [1.0],
            [0.0] + [0.9] * 7 + [0.0],
        )
        low = enumerate_candidates(probs, Thresholds(0.5, 0.5, 0.5), ALLOW_ALL)
        high = enumerate_candidates(probs, Thresholds(0.5, 0.5, 0.95), ALLOW_ALL)
        assert low == []
        assert [c.token_indices for c in high] == [(0, 8)]


class TestPredictionFiles:
    def test_round_trip(self, tmp_path):
        preds = {
            "a": (PredictedMwe((0, 3), 0.81), PredictedMwe((1, 2), 1.0)),
            "b": (),
        }
        path = tmp_path / "preds.jsonl"
        write_predictions(preds, path)
        assert load_predictions(path) == preds
