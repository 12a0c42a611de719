"""Dependency-distance matrices and noun-phrase chunk tags.

Distances are shortest-path lengths in the undirected graph formed by
(token, head) links, capped (default 5); unreachable pairs report the
cap so the matrix stays total and cross-component discontinuities get
rejected downstream.

Chunk tags normally come from a feature file produced by an external
pipeline. `heuristic_chunk_tags` is a deterministic fallback so the
toolkit can run self-contained: maximal runs of {DET, ADJ, NOUN, PROPN,
NUM} whose last token is NOUN or PROPN count as inside a noun phrase.
"""

import numpy as np
from dataclasses import dataclass

from ._jsonl import iter_jsonl, write_jsonl
from ._kernels import pairwise_distances
from .corpus import Corpus, Sentence
from .errors import ConfigError, FormatError, SchemaError, StructuralError


@dataclass(eq=False)
class DepDistanceMatrix:
    n: int
    cap: int
    dist: np.ndarray  # int64[n, n], values in [0, cap]


@dataclass(frozen=True)
class ChunkTags:
    inside_np: tuple[int, ...]


@dataclass(frozen=True)
class SentenceFeatures:
    chunk: ChunkTags
    dep_heads: tuple[int | None, ...]


def _find_head_cycle(heads) -> list[int] | None:
    n = len(heads)
    state = [0] * n  # 0 unvisited, 1 on current walk, 2 cleared
    for root in range(n):
        if state[root]:
            continue
        walk = []
        node = root
        while node is not None and state[node] == 0:
            state[node] = 1
            walk.append(node)
            node = heads[node] if heads[node] is not None and heads[node] >= 0 else None
        if node is not None and state[node] == 1:
            return walk[walk.index(node):]
        for v in walk:
            state[v] = 2
    return None


def dep_distances_from_heads(heads, cap: int = 5) -> DepDistanceMatrix:
    """All-pairs capped path lengths from a head list (None for no head)."""
    if cap < 1:
        raise ConfigError(f"distance cap must be >= 1, got {cap}")
    heads = list(heads)
    cycle = _find_head_cycle(heads)
    if cycle is not None:
        raise StructuralError(f"dependency cycle through tokens {cycle}")
    arr = np.array([-1 if h is None else h for h in heads], dtype=np.int64)
    return DepDistanceMatrix(n=len(heads), cap=cap, dist=pairwise_distances(arr, cap))


def dep_distances(sentence: Sentence, cap: int = 5) -> DepDistanceMatrix:
    return dep_distances_from_heads([t.head for t in sentence.tokens], cap)


def mean_dep_distance(matrix: DepDistanceMatrix, i: int) -> float:
    """Arithmetic mean of distances from token i to every other token."""
    if matrix.n < 2:
        raise ValueError("mean distance undefined for sentences with fewer than 2 tokens")
    if not 0 <= i < matrix.n:
        raise ValueError(f"token index {i} out of range for n={matrix.n}")
    row = matrix.dist[i]
    return float((row.sum() - row[i]) / (matrix.n - 1))


_NP_POS = {"DET", "ADJ", "NOUN", "PROPN", "NUM"}
_NP_HEAD_POS = {"NOUN", "PROPN"}


def heuristic_chunk_tags(sentence: Sentence) -> ChunkTags:
    if any(t.upos is None for t in sentence.tokens):
        raise ConfigError(
            f"sentence {sentence.id!r}: heuristic chunk tagging needs upos on every token"
        )
    n = len(sentence)
    inside = [0] * n
    i = 0
    while i < n:
        if sentence.tokens[i].upos in _NP_POS:
            j = i
            while j + 1 < n and sentence.tokens[j + 1].upos in _NP_POS:
                j += 1
            if sentence.tokens[j].upos in _NP_HEAD_POS:
                for k in range(i, j + 1):
                    inside[k] = 1
            i = j + 1
        else:
            i += 1
    return ChunkTags(inside_np=tuple(inside))


def extract_corpus_features(corpus: Corpus, heuristic_chunks: bool = False) -> dict:
    """Per-sentence features straight from the corpus annotations.

    Chunk tags are all-zero unless the heuristic is requested; dependency
    heads are whatever the corpus tokens carry.
    """
    out = {}
    for sent in corpus.sentences:
        chunk = heuristic_chunk_tags(sent) if heuristic_chunks else ChunkTags((0,) * len(sent))
        out[sent.id] = SentenceFeatures(
            chunk=chunk, dep_heads=tuple(t.head for t in sent.tokens)
        )
    return out


def write_features(features: dict, path) -> None:
    write_jsonl(
        path,
        (
            {
                "sentence_id": sid,
                "inside_np": list(f.chunk.inside_np),
                "dep_heads": list(f.dep_heads),
            }
            for sid, f in features.items()
        ),
    )


def load_features(path) -> dict:
    out = {}
    for lineno, rec in iter_jsonl(path):
        where = f"{path}: record {lineno}"
        try:
            sid = rec["sentence_id"]
            inside_np = rec["inside_np"]
            dep_heads = rec["dep_heads"]
        except (KeyError, TypeError):
            raise FormatError(f"{where}: expected sentence_id, inside_np, dep_heads") from None
        if not all(v in (0, 1) for v in inside_np):
            raise FormatError(f"{where}: inside_np values must be 0 or 1")
        if len(inside_np) != len(dep_heads):
            raise FormatError(f"{where}: inside_np and dep_heads lengths differ")
        if sid in out:
            raise FormatError(f"{where}: duplicate sentence_id {sid!r}")
        out[sid] = SentenceFeatures(
            chunk=ChunkTags(tuple(inside_np)), dep_heads=tuple(dep_heads)
        )
    return out


def load_chunk_tags(path) -> dict:
    return {sid: f.chunk for sid, f in load_features(path).items()}


def validate_features(features: dict, corpus: Corpus) -> None:
    ids = {s.id for s in corpus.sentences}
    for sid in features:
        if sid not in ids:
            raise SchemaError(f"feature file references unknown sentence id {sid!r}")
    for sent in corpus.sentences:
        if sent.id not in features:
            raise SchemaError(f"no features for sentence {sent.id!r}")
        f = features[sent.id]
        if len(f.chunk.inside_np) != len(sent):
            raise SchemaError(
                f"sentence {sent.id!r}: feature length {len(f.chunk.inside_np)} "
                f"does not match {len(sent)} tokens"
            )
