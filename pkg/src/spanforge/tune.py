"""Grid search over the three reconstruction thresholds.

Every triple from the grid is scored by reconstructing the development
sentences and computing exact-match micro F1 against their gold MWEs.
The default grid spans 0.20 to 0.60 in steps of 0.05 (729 triples). Ties
resolve to the lexicographically smallest (tau_start, tau_end,
tau_inside), so the result does not depend on evaluation order; with
jobs > 1 the triples are scored across processes and merged back in grid
order.
"""

import dataclasses
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from ._kernels import enumerate_pairs
from .corpus import Corpus, Split
from .errors import ConfigError, SchemaError
from .evaluate import MatchCounts, micro_prf
from .features import dep_distances_from_heads
from .reconstruct import (
    OverlapPolicy,
    PredictedMwe,
    ReconstructionConfig,
    Thresholds,
    dep_filter,
    resolve_overlaps,
)


@dataclass(frozen=True)
class ThresholdGrid:
    values: tuple[float, ...] = tuple(round(0.20 + 0.05 * k, 10) for k in range(9))

    def __post_init__(self):
        if not self.values:
            raise ValueError("threshold grid is empty")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise ValueError(f"grid values must be in [0, 1]: {self.values}")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError(f"grid values must be strictly ascending: {self.values}")

    @staticmethod
    def parse(spec: str) -> "ThresholdGrid":
        """Parse "start:stop:step", e.g. "0.2:0.6:0.05", inclusive ends."""
        try:
            start, stop, step = (float(x) for x in spec.split(":"))
        except ValueError:
            raise ConfigError(f"bad grid spec {spec!r}, expected start:stop:step") from None
        if step <= 0 or stop < start:
            raise ConfigError(f"bad grid spec {spec!r}")
        values = []
        k = 0
        while True:
            v = round(start + k * step, 10)
            if v > stop + 1e-9:
                break
            values.append(v)
            k += 1
        return ThresholdGrid(values=tuple(values))


@dataclass
class TuneResult:
    best: Thresholds
    best_f1: float
    trace: list  # (Thresholds, precision, recall, f1)


def carve_dev(corpus: Corpus, fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Split the train sentences into (rest, held-out dev), seeded.

    Selected sentences keep their original relative order and are
    relabeled as the dev split of the second corpus.
    """
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"dev fraction must be in (0, 1), got {fraction}")
    train = corpus.split_sentences(Split.TRAIN)
    if not train:
        raise ConfigError(f"corpus {corpus.name!r} has no train-split sentences")
    k = int(fraction * len(train))
    rng = random.Random(seed)
    chosen = set(rng.sample(range(len(train)), k))
    dev_ids = {train[i].id for i in chosen}
    rest = tuple(s for s in corpus.sentences if s.id not in dev_ids)
    dev = tuple(
        dataclasses.replace(s, split=Split.DEV) for s in train if s.id in dev_ids
    )
    return (
        Corpus(name=corpus.name, sentences=rest),
        Corpus(name=f"{corpus.name}-dev", sentences=dev),
    )


def _prepare(dev: Corpus, probabilities: dict, features: dict | None):
    prepared = []
    for sent in dev.sentences:
        probs = probabilities.get(sent.id)
        if probs is None:
            raise SchemaError(f"no probabilities for sentence {sent.id!r}")
        if len(probs) != len(sent):
            raise SchemaError(
                f"sentence {sent.id!r}: probability length {len(probs)} "
                f"does not match {len(sent)} tokens"
            )
        matrix = None
        if features is not None:
            feats = features.get(sent.id)
            if feats is None:
                raise SchemaError(f"no features for sentence {sent.id!r}")
            matrix = dep_distances_from_heads(feats.dep_heads)
        prepared.append(
            (
                np.asarray(probs.p_start, dtype=np.float64),
                np.asarray(probs.p_end, dtype=np.float64),
                np.asarray(probs.p_inside, dtype=np.float64),
                frozenset(frozenset(m.token_indices) for m in sent.mwes),
                matrix,
            )
        )
    return prepared


def _score_triple(prepared, triple, cfg: ReconstructionConfig):
    tau_s, tau_e, tau_i = triple
    tp = fp = fn = 0
    for p_start, p_end, p_inside, gold_sets, matrix in prepared:
        cand_s, cand_e, members, indptr, _ = enumerate_pairs(
            p_start,
            p_end,
            p_inside,
            tau_s,
            tau_e,
            tau_i,
            cfg.max_width,
            cfg.min_members,
            cfg.max_members,
        )
        cands = []
        for i in range(cand_s.shape[0]):
            idx = tuple(int(t) for t in members[indptr[i] : indptr[i + 1]])
            cands.append(
                PredictedMwe(idx, float(p_start[cand_s[i]] * p_end[cand_e[i]]))
            )
        if matrix is not None:
            cands = dep_filter(cands, matrix, cfg)
        cands = resolve_overlaps(cands, cfg.overlap_policy)
        matched = set()
        for c in cands:
            key = frozenset(c.token_indices)
            if key in gold_sets and key not in matched:
                matched.add(key)
        tp += len(matched)
        fp += len(cands) - len(matched)
        fn += len(gold_sets) - len(matched)
    return micro_prf(MatchCounts(tp=tp, fp=fp, fn=fn))


def _score_chunk(args):
    prepared, triples, cfg = args
    return [_score_triple(prepared, t, cfg) for t in triples]


def grid_search(
    dev: Corpus,
    probabilities: dict,
    grid: ThresholdGrid | None = None,
    cfg: ReconstructionConfig | None = None,
    features: dict | None = None,
    jobs: int = 1,
) -> TuneResult:
    """Exhaustive search over all |grid|^3 threshold triples."""
    grid = grid if grid is not None else ThresholdGrid()
    cfg = cfg if cfg is not None else ReconstructionConfig()
    prepared = _prepare(dev, probabilities, features)
    triples = list(product(grid.values, repeat=3))
    if jobs > 1:
        chunk = max(1, len(triples) // (jobs * 4))
        batches = [triples[i : i + chunk] for i in range(0, len(triples), chunk)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_score_chunk, [(prepared, b, cfg) for b in batches])
        scores = [prf for batch in results for prf in batch]
    else:
        scores = [_score_triple(prepared, t, cfg) for t in triples]
    trace = []
    best_triple = None
    best_f1 = -1.0
    for triple, (p, r, f1) in zip(triples, scores):
        thr = Thresholds(*triple)
        trace.append((thr, p, r, f1))
        if f1 > best_f1:  # ties keep the earlier, lexicographically smaller triple
            best_f1 = f1
            best_triple = thr
    return TuneResult(best=best_triple, best_f1=best_f1, trace=trace)


def write_trace(result: TuneResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("tau_start\ttau_end\ttau_inside\tprecision\trecall\tf1\n")
        for thr, p, r, f1 in result.trace:
            fh.write(
                f"{thr.tau_start:g}\t{thr.tau_end:g}\t{thr.tau_inside:g}"
                f"\t{p:.6f}\t{r:.6f}\t{f1:.6f}\n"
            )
