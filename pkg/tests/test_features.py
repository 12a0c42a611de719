import random

import numpy as np
import pytest

from spanforge import (
    dep_distances,
    dep_distances_from_heads,
    heuristic_chunk_tags,
    load_chunk_tags,
    load_features,
    mean_dep_distance,
    validate_features,
)
from spanforge.errors import ConfigError, SchemaError, StructuralError
from spanforge.features import extract_corpus_features, write_features

from .conftest import make_corpus, make_sentence, random_forest_heads


def floyd_warshall_capped(heads, cap):
    """Independent oracle: dense relaxation instead of BFS."""
    n = len(heads)
    inf = float("inf")
    d = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for i, h in enumerate(heads):
        if h is not None:
            d[i][h] = d[h][i] = 1
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return np.array(
        [[cap if d[i][j] == inf else min(int(d[i][j]), cap) for j in range(n)] for i in range(n)],
        dtype=np.int64,
    )


class TestDepDistances:
    def test_two_edge_chain(self):
        sent = make_sentence(["a", "b", "c"], heads=[None, 0, 1])
        assert dep_distances(sent).dist[0, 2] == 2

    def test_eight_token_chain_capped(self):
        heads = [None] + list(range(7))
        m = dep_distances_from_heads(heads, cap=5)
        assert m.dist[0, 7] == 5  # true distance 7

    def test_disconnected_components_report_cap(self):
        heads = [None, 0, None, 2]
        m = dep_distances_from_heads(heads, cap=5)
        assert m.dist[0, 2] == 5
        assert m.dist[1, 3] == 5
        assert m.dist[0, 1] == 1

    def test_symmetry_and_zero_diagonal(self):
        rng = random.Random(7)
        for _ in range(50):
            heads = random_forest_heads(rng, rng.randint(1, 12))
            d = dep_distances_from_heads(heads).dist
            assert np.array_equal(d, d.T)
            assert np.all(np.diag(d) == 0)

    def test_cycle_detected(self):
        with pytest.raises(StructuralError, match="cycle"):
            dep_distances_from_heads([1, 2, 0])

    def test_matches_floyd_warshall_on_random_forests(self):
        rng = random.Random(99)
        for _ in range(300):
            n = rng.randint(1, 15)
            heads = random_forest_heads(rng, n)
            got = dep_distances_from_heads(heads, cap=5).dist
            want = floyd_warshall_capped(heads, cap=5)
            assert np.array_equal(got, want)

    def test_bad_cap(self):
        with pytest.raises(ConfigError):
            dep_distances_from_heads([None], cap=0)


class TestMeanDistance:
    def test_two_tokens(self):
        m = dep_distances_from_heads([None, 0])
        assert mean_dep_distance(m, 0) == 1.0

    def test_three_token_chain(self):
        m = dep_distances_from_heads([None, 0, 1])
        assert mean_dep_distance(m, 0) == pytest.approx(1.5)

    def test_all_capped(self):
        m = dep_distances_from_heads([None, None, None], cap=5)
        assert mean_dep_distance(m, 1) == 5.0

    def test_single_token_undefined(self):
        m = dep_distances_from_heads([None])
        with pytest.raises(ValueError):
            mean_dep_distance(m, 0)


class TestHeuristicChunks:
    def test_det_noun_verb(self):
        sent = make_sentence(["the", "market", "fell"], upos=["DET", "NOUN", "VERB"])
        assert heuristic_chunk_tags(sent).inside_np == (1, 1, 0)

    def test_all_verbs(self):
        sent = make_sentence(["go", "run"], upos=["VERB", "VERB"])
        assert heuristic_chunk_tags(sent).inside_np == (0, 0)

    def test_run_not_ending_in_nominal_is_skipped(self):
        sent = make_sentence(["the", "very", "big"], upos=["DET", "ADV", "ADJ"])
        assert heuristic_chunk_tags(sent).inside_np == (0, 0, 0)

    def test_requires_upos(self):
        with pytest.raises(ConfigError, match="upos"):
            heuristic_chunk_tags(make_sentence(["a", "b"]))


class TestFeatureFiles:
    def corpus(self):
        return make_corpus(
            [
                make_sentence(
                    ["the", "stock", "market", "fell"],
                    upos=["DET", "NOUN", "NOUN", "VERB"],
                    heads=[2, 2, 3, None],
                    sid="f1",
                )
            ]
        )

    def test_round_trip(self, tmp_path):
        corpus = self.corpus()
        feats = extract_corpus_features(corpus, heuristic_chunks=True)
        path = tmp_path / "features.jsonl"
        write_features(feats, path)
        loaded = load_features(path)
        assert loaded == feats
        validate_features(loaded, corpus)
        assert load_chunk_tags(path)["f1"].inside_np == (1, 1, 1, 0)

    def test_tags_returned_verbatim(self, tmp_path):
        path = tmp_path / "features.jsonl"
        path.write_text(
            '{"sentence_id":"f1","inside_np":[0,1,1,0],"dep_heads":[2,2,3,null]}\n',
            "utf-8",
        )
        assert load_chunk_tags(path)["f1"].inside_np == (0, 1, 1, 0)

    def test_length_mismatch_is_schema_error(self, tmp_path):
        path = tmp_path / "features.jsonl"
        path.write_text(
            '{"sentence_id":"f1","inside_np":[0,1],"dep_heads":[null,null]}\n', "utf-8"
        )
        with pytest.raises(SchemaError, match="length"):
            validate_features(load_features(path), self.corpus())

    def test_unknown_sentence_id(self, tmp_path):
        path = tmp_path / "features.jsonl"
        path.write_text(
            '{"sentence_id":"zz","inside_np":[0],"dep_heads":[null]}\n', "utf-8"
        )
        with pytest.raises(SchemaError, match="unknown sentence id"):
            validate_features(load_features(path), self.corpus())
