"""Exact span-match evaluation.

A prediction counts only when its token-index set is identical to a gold
MWE's set in the same sentence; matching is one-to-one, and duplicate
identical predictions beyond the first count as false positives. Because
predictions carry no type, per-type results are recall-only: there is
nothing to compute a per-type precision from.

Percentages are raw ratios times 100, rounded half-up to one decimal;
raw ratios stay available at full precision.
"""

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from .corpus import Corpus, MweType, is_contiguous
from .errors import SchemaError


@dataclass(frozen=True)
class MatchCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class StratumMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ContinuityReport:
    continuous: StratumMetrics
    discontinuous: StratumMetrics
    n_pred_continuous: int
    n_pred_discontinuous: int


@dataclass
class EvalReport:
    micro: tuple[float, float, float]
    per_type_recall: dict = field(default_factory=dict)  # MweType -> (recall, support)
    continuity: ContinuityReport | None = None
    counts: MatchCounts = field(default_factory=MatchCounts)
    n_pred_continuous: int = 0
    n_pred_discontinuous: int = 0


def percent(ratio: float) -> float:
    """ratio * 100 rounded half-up to one decimal, e.g. 0.69791.. -> 69.8."""
    return float(
        (Decimal(repr(ratio)) * 100).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    )


def _sentence_matches(preds, gold_sets):
    """One-to-one exact matching; returns the set of matched gold index sets."""
    matched = set()
    for pred in preds:
        key = frozenset(pred.token_indices)
        if key in gold_sets and key not in matched:
            matched.add(key)
    return matched


def _check_ids(pred: dict, gold: Corpus) -> None:
    known = {s.id for s in gold.sentences}
    for sid in pred:
        if sid not in known:
            raise SchemaError(f"predictions reference unknown sentence id {sid!r}")


def exact_match_counts(pred: dict, gold: Corpus) -> MatchCounts:
    _check_ids(pred, gold)
    tp = fp = fn = 0
    for sent in gold.sentences:
        preds = pred.get(sent.id, ())
        gold_sets = {frozenset(m.token_indices) for m in sent.mwes}
        matched = _sentence_matches(preds, gold_sets)
        tp += len(matched)
        fp += len(preds) - len(matched)
        fn += len(gold_sets) - len(matched)
    return MatchCounts(tp=tp, fp=fp, fn=fn)


def micro_prf(c: MatchCounts) -> tuple[float, float, float]:
    p = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    r = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return (p, r, f1)


def type_recall(pred: dict, gold: Corpus) -> dict:
    """MweType -> (recall, support); types without gold support are omitted."""
    _check_ids(pred, gold)
    matched_by_type = {t: 0 for t in MweType}
    support = {t: 0 for t in MweType}
    for sent in gold.sentences:
        preds = pred.get(sent.id, ())
        pred_sets = {frozenset(p.token_indices) for p in preds}
        for mwe in sent.mwes:
            support[mwe.mwe_type] += 1
            if frozenset(mwe.token_indices) in pred_sets:
                matched_by_type[mwe.mwe_type] += 1
    return {
        t: (matched_by_type[t] / support[t], support[t])
        for t in MweType
        if support[t] > 0
    }


def _prf(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return (p, r, f1)


def continuity_metrics(pred: dict, gold: Corpus) -> ContinuityReport:
    _check_ids(pred, gold)
    tp = {True: 0, False: 0}
    n_pred = {True: 0, False: 0}
    n_gold = {True: 0, False: 0}
    for sent in gold.sentences:
        preds = pred.get(sent.id, ())
        gold_sets = {frozenset(m.token_indices) for m in sent.mwes}
        matched = _sentence_matches(preds, gold_sets)
        for p in preds:
            n_pred[is_contiguous(p.token_indices)] += 1
        for m in sent.mwes:
            cont = is_contiguous(m.token_indices)
            n_gold[cont] += 1
            if frozenset(m.token_indices) in matched:
                tp[cont] += 1
    cont = StratumMetrics(*_prf(tp[True], n_pred[True], n_gold[True]), support=n_gold[True])
    disc = StratumMetrics(*_prf(tp[False], n_pred[False], n_gold[False]), support=n_gold[False])
    return ContinuityReport(
        continuous=cont,
        discontinuous=disc,
        n_pred_continuous=n_pred[True],
        n_pred_discontinuous=n_pred[False],
    )


def evaluate(pred: dict, gold: Corpus) -> EvalReport:
    counts = exact_match_counts(pred, gold)
    continuity = continuity_metrics(pred, gold)
    return EvalReport(
        micro=micro_prf(counts),
        per_type_recall=type_recall(pred, gold),
        continuity=continuity,
        counts=counts,
        n_pred_continuous=continuity.n_pred_continuous,
        n_pred_discontinuous=continuity.n_pred_discontinuous,
    )


def report_to_dict(report: EvalReport) -> dict:
    p, r, f1 = report.micro
    out = {
        "micro": {
            "precision": p,
            "recall": r,
            "f1": f1,
            "precision_pct": percent(p),
            "recall_pct": percent(r),
            "f1_pct": percent(f1),
        },
        "counts": {"tp": report.counts.tp, "fp": report.counts.fp, "fn": report.counts.fn},
        "type_recall": {
            t.value: {"recall": rec, "recall_pct": percent(rec), "support": sup}
            for t, (rec, sup) in sorted(
                report.per_type_recall.items(), key=lambda kv: kv[0].value
            )
        },
        "continuity": {},
        "n_pred_continuous": report.n_pred_continuous,
        "n_pred_discontinuous": report.n_pred_discontinuous,
    }
    for name, block in (
        ("continuous", report.continuity.continuous),
        ("discontinuous", report.continuity.discontinuous),
    ):
        out["continuity"][name] = {
            "precision": block.precision,
            "recall": block.recall,
            "f1": block.f1,
            "precision_pct": percent(block.precision),
            "recall_pct": percent(block.recall),
            "f1_pct": percent(block.f1),
            "support": block.support,
        }
    return out


def render_report(report: EvalReport) -> str:
    d = report_to_dict(report)
    lines = []
    m = d["micro"]
    c = d["counts"]
    lines.append(
        f"micro        P {m['precision_pct']:>5}  R {m['recall_pct']:>5}  "
        f"F1 {m['f1_pct']:>5}   (tp={c['tp']} fp={c['fp']} fn={c['fn']})"
    )
    if d["type_recall"]:
        lines.append("type recall:")
        for name, row in d["type_recall"].items():
            lines.append(f"  {name:<10} R {row['recall_pct']:>5}   (n={row['support']})")
    lines.append("continuity:")
    for name in ("continuous", "discontinuous"):
        row = d["continuity"][name]
        n_pred = d[f"n_pred_{name}"]
        lines.append(
            f"  {name:<13} P {row['precision_pct']:>5}  R {row['recall_pct']:>5}  "
            f"F1 {row['f1_pct']:>5}   (gold={row['support']} pred={n_pred})"
        )
    return "\n".join(lines) + "\n"
