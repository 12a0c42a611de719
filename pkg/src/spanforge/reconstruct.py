"""Predicted MWE spans from per-token probabilities.

Candidate formation: every token pair (s, e), e > s, whose start and end
probabilities clear their gates opens a candidate of width e - s + 1
(capped at 13 by default). Interior tokens join the member set when
their inside probability clears the inside gate; an interior token below
the gate creates discontinuity by omission. Candidates keep 2 to 6
members by default. A candidate's score is the product of its boundary
probabilities.

Discontinuous candidates can then be rejected when consecutive members
sit more than `dep_reject_above` apart in the dependency graph, and
overlaps resolved greedily by score (or left alone).

`brute_force_reference` re-derives the same output from first principles
by enumerating member subsets directly; it exists so the fast path can
be equivalence-tested against an independent implementation.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import combinations

import numpy as np

from ._jsonl import iter_jsonl, write_jsonl
from ._kernels import enumerate_pairs
from .corpus import Corpus, is_contiguous
from .errors import ConfigError, FormatError, SchemaError
from .features import DepDistanceMatrix, dep_distances_from_heads
from .scoring import TokenProbabilities, validate_probabilities


class OverlapPolicy(Enum):
    GREEDY_NONOVERLAP = "greedy"
    ALLOW_ALL = "all"


@dataclass(frozen=True)
class Thresholds:
    tau_start: float
    tau_end: float
    tau_inside: float

    def __post_init__(self):
        for name in ("tau_start", "tau_end", "tau_inside"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class ReconstructionConfig:
    max_width: int = 13
    min_members: int = 2
    max_members: int = 6
    dep_reject_above: int = 4
    overlap_policy: OverlapPolicy = OverlapPolicy.GREEDY_NONOVERLAP

    def __post_init__(self):
        if not 2 <= self.min_members <= self.max_members <= self.max_width:
            raise ValueError(
                "need 2 <= min_members <= max_members <= max_width, got "
                f"{self.min_members}/{self.max_members}/{self.max_width}"
            )


@dataclass(frozen=True)
class PredictedMwe:
    token_indices: tuple[int, ...]
    score: float

    def __post_init__(self):
        if len(self.token_indices) < 2:
            raise ValueError("predicted MWE needs at least 2 tokens")


def enumerate_candidates(
    probs: TokenProbabilities,
    thresholds: Thresholds,
    cfg: ReconstructionConfig,
    counters: dict | None = None,
) -> list[PredictedMwe]:
    """All gated (start, end) pairs with their derived member sets, by (s, e).

    Cost scales with the above-threshold starts k and ends m as
    O(k * m * width), not with n^2: when `counters` is supplied its
    "pair_expansions" entry accumulates the pairs actually examined,
    which is zero for all-zero probability vectors.
    """
    p_start = np.asarray(probs.p_start, dtype=np.float64)
    p_end = np.asarray(probs.p_end, dtype=np.float64)
    p_inside = np.asarray(probs.p_inside, dtype=np.float64)
    cand_s, cand_e, members, indptr, expansions = enumerate_pairs(
        p_start,
        p_end,
        p_inside,
        thresholds.tau_start,
        thresholds.tau_end,
        thresholds.tau_inside,
        cfg.max_width,
        cfg.min_members,
        cfg.max_members,
    )
    if counters is not None:
        counters["pair_expansions"] = counters.get("pair_expansions", 0) + int(expansions)
    out = []
    for i in range(cand_s.shape[0]):
        idx = tuple(int(t) for t in members[indptr[i] : indptr[i + 1]])
        score = float(p_start[cand_s[i]] * p_end[cand_e[i]])
        out.append(PredictedMwe(token_indices=idx, score=score))
    return out


def dep_filter(
    candidates, matrix: DepDistanceMatrix | None, cfg: ReconstructionConfig
) -> list[PredictedMwe]:
    """Drop discontinuous candidates with far-apart consecutive members."""
    kept = []
    for cand in candidates:
        idx = cand.token_indices
        if is_contiguous(idx):
            kept.append(cand)
            continue
        if matrix is None:
            raise ConfigError(
                "dependency filtering of a discontinuous candidate requires a "
                "distance matrix"
            )
        if all(matrix.dist[a, b] <= cfg.dep_reject_above for a, b in zip(idx, idx[1:])):
            kept.append(cand)
    return kept


def resolve_overlaps(candidates, policy: OverlapPolicy) -> list[PredictedMwe]:
    if policy is OverlapPolicy.ALLOW_ALL:
        return list(candidates)
    ranked = sorted(
        candidates, key=lambda c: (-c.score, c.token_indices[0], c.token_indices[-1])
    )
    taken: set[int] = set()
    accepted = []
    for cand in ranked:
        if taken.isdisjoint(cand.token_indices):
            accepted.append(cand)
            taken.update(cand.token_indices)
    accepted.sort(key=lambda c: (c.token_indices[0], c.token_indices[-1]))
    return accepted


def reconstruct_sentence(
    probs: TokenProbabilities,
    thresholds: Thresholds,
    cfg: ReconstructionConfig,
    matrix: DepDistanceMatrix | None = None,
    counters: dict | None = None,
) -> list[PredictedMwe]:
    """enumerate -> dependency filter (when a matrix is given) -> overlaps."""
    candidates = enumerate_candidates(probs, thresholds, cfg, counters=counters)
    if matrix is not None:
        candidates = dep_filter(candidates, matrix, cfg)
    return resolve_overlaps(candidates, cfg.overlap_policy)


def brute_force_reference(
    probs: TokenProbabilities,
    thresholds: Thresholds,
    cfg: ReconstructionConfig,
    matrix: DepDistanceMatrix | None = None,
) -> list[PredictedMwe]:
    """Subset-enumeration reference with the same output contract.

    Tractability guard: refuses sentences longer than 16 tokens.
    """
    n = len(probs)
    if n > 16:
        raise ValueError(f"brute-force reference limited to 16 tokens, got {n}")
    found = []
    for size in range(2, cfg.max_members + 1):
        if size < cfg.min_members:
            continue
        for subset in combinations(range(n), size):
            s, e = subset[0], subset[-1]
            if probs.p_start[s] < thresholds.tau_start:
                continue
            if probs.p_end[e] < thresholds.tau_end:
                continue
            if e - s + 1 > cfg.max_width:
                continue
            inner = set(subset[1:-1])
            ok = True
            for t in range(s + 1, e):
                included = probs.p_inside[t] >= thresholds.tau_inside
                if included != (t in inner):
                    ok = False
                    break
            if not ok:
                continue
            if not is_contiguous(subset):
                if matrix is not None and any(
                    matrix.dist[a, b] > cfg.dep_reject_above
                    for a, b in zip(subset, subset[1:])
                ):
                    continue
            found.append(
                PredictedMwe(
                    token_indices=subset,
                    score=float(probs.p_start[s] * probs.p_end[e]),
                )
            )
    found.sort(key=lambda c: (c.token_indices[0], c.token_indices[-1]))
    return resolve_overlaps(found, cfg.overlap_policy)


def reconstruct_corpus(
    corpus: Corpus,
    probabilities: dict,
    thresholds: Thresholds,
    cfg: ReconstructionConfig,
    features: dict | None = None,
) -> dict:
    """Reconstruct every corpus sentence, in corpus order.

    Dependency filtering happens only when a feature map is given; its
    head lists feed the distance matrices.
    """
    validate_probabilities(probabilities, corpus)
    matrices = {}
    if features is not None:
        for sent in corpus.sentences:
            feats = features.get(sent.id)
            if feats is None:
                raise SchemaError(f"no features for sentence {sent.id!r}")
            matrices[sent.id] = dep_distances_from_heads(feats.dep_heads)
    out = {}
    for sent in corpus.sentences:
        out[sent.id] = tuple(
            reconstruct_sentence(
                probabilities[sent.id], thresholds, cfg, matrices.get(sent.id)
            )
        )
    return out


def write_predictions(predictions: dict, path) -> None:
    write_jsonl(
        path,
        (
            {
                "sentence_id": sid,
                "mwes": [
                    {"indices": list(p.token_indices), "score": round(float(p.score), 6)}
                    for p in preds
                ],
            }
            for sid, preds in predictions.items()
        ),
    )


def load_predictions(path) -> dict:
    out = {}
    for lineno, rec in iter_jsonl(path):
        where = f"{path}: record {lineno}"
        try:
            sid = rec["sentence_id"]
            raw = rec["mwes"]
        except (KeyError, TypeError):
            raise FormatError(f"{where}: expected sentence_id and mwes") from None
        preds = []
        for m in raw:
            try:
                preds.append(
                    PredictedMwe(
                        token_indices=tuple(m["indices"]), score=float(m["score"])
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{where}: bad MWE record ({exc})") from None
        if sid in out:
            raise FormatError(f"{where}: duplicate sentence_id {sid!r}")
        out[sid] = tuple(preds)
    return out
