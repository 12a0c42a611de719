"""Training loop and inference for the boundary scorer.

Per-token binary cross-entropy on the three heads, labels taken from a
verified projection artifact. Early stopping, when a dev corpus file is
given, scores reconstructed dev predictions through the toolkit CLI
(`python -m spanforge reconstruct` + `evaluate`) so the metric is
exactly the one the toolkit reports.
"""

import json
import math
import random
import subprocess
import sys
import tempfile
from pathlib import Path

import torch
from torch import nn

from .corpus_io import (
    ExchangeError,
    read_corpus,
    read_features,
    read_projections,
    write_probabilities,
)
from .features import mean_distance_buckets
from .model import AdapterConfig, BoundaryScorer, save_checkpoint

EARLY_STOP_THRESHOLDS = ("0.5", "0.5", "0.5")


def _seed_everything(seed: int) -> None:
    random.seed(seed)
    torch.manual_seed(seed)


def _prepare_examples(sentences, projections, features, cfg: AdapterConfig):
    examples = []
    for sent in sentences:
        if sent.id not in projections:
            raise ExchangeError(f"no projection labels for sentence {sent.id!r}")
        start, end, inside = projections[sent.id]
        if len(start) != len(sent):
            raise ExchangeError(
                f"sentence {sent.id!r}: projection length {len(start)} != {len(sent)} tokens"
            )
        surfaces = [t.surface for t in sent.tokens]
        chunk_tags = [0] * len(sent)
        dep_buckets = [0] * len(sent)
        if features is not None and sent.id in features:
            inside_np, dep_heads = features[sent.id]
            chunk_tags = list(inside_np)
            dep_buckets = mean_distance_buckets(dep_heads)
        labels = list(zip(start, end, inside))
        examples.append((sent.id, surfaces, chunk_tags, dep_buckets, labels))
    return examples


def _batches(examples, batch_size: int):
    for i in range(0, len(examples), batch_size):
        yield examples[i : i + batch_size]


def _batch_loss(model, batch, loss_fn):
    surfaces = [ex[1] for ex in batch]
    chunk_tags = [ex[2] for ex in batch]
    dep_buckets = [ex[3] for ex in batch]
    logits, token_mask = model(surfaces, chunk_tags, dep_buckets)
    device = logits.device
    targets = torch.zeros_like(logits)
    for b, ex in enumerate(batch):
        targets[b, : len(ex[4])] = torch.tensor(ex[4], dtype=torch.float32, device=device)
    raw = loss_fn(logits, targets)
    mask = token_mask.unsqueeze(-1).float()
    return (raw * mask).sum() / mask.sum().clamp(min=1.0), int(mask.sum().item())


def _dev_f1(model, dev_corpus_path, features, tmp_dir: Path) -> float:
    dev_sentences = read_corpus(dev_corpus_path)
    probs_path = tmp_dir / "dev_probs.jsonl"
    predict_to_file(model, dev_sentences, features, probs_path)
    preds_path = tmp_dir / "dev_preds.jsonl"
    report_path = tmp_dir / "dev_report.json"
    base = [sys.executable, "-m", "spanforge"]
    subprocess.run(
        base
        + [
            "reconstruct",
            "--probs", str(probs_path),
            "--corpus", str(dev_corpus_path),
            "--tau-start", EARLY_STOP_THRESHOLDS[0],
            "--tau-end", EARLY_STOP_THRESHOLDS[1],
            "--tau-inside", EARLY_STOP_THRESHOLDS[2],
            "--out", str(preds_path),
        ],
        check=True,
        capture_output=True,
    )
    subprocess.run(
        base
        + ["evaluate", "--pred", str(preds_path), "--gold", str(dev_corpus_path),
           "--out", str(report_path)],
        check=True,
        capture_output=True,
    )
    report = json.loads(report_path.read_text("utf-8"))
    return float(report["micro"]["f1"])


def train(
    corpus_path,
    projections_path,
    out_model_path,
    cfg: AdapterConfig,
    features_path=None,
    dev_corpus_path=None,
    epochs: int | None = None,
) -> dict:
    """Train on the corpus train split; returns the metrics record."""
    _seed_everything(cfg.seed)
    sentences = [s for s in read_corpus(corpus_path) if s.split == "train"]
    if not sentences:
        raise ExchangeError(f"{corpus_path}: no train-split sentences")
    projections = read_projections(projections_path)
    features = read_features(features_path) if features_path else None
    if (cfg.use_chunk_embeddings or cfg.use_dep_embeddings) and features is None:
        raise ExchangeError("chunk/dep embeddings need a feature file")
    examples = _prepare_examples(sentences, projections, features, cfg)

    model = BoundaryScorer(cfg)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.weight_decay
    )
    loss_fn = nn.BCEWithLogitsLoss(reduction="none")
    max_epochs = epochs if epochs is not None else cfg.max_epochs

    order_rng = random.Random(cfg.seed)
    losses = []
    dev_scores = []
    best_f1 = -1.0
    best_epoch = 0
    since_best = 0
    out_model_path = Path(out_model_path)
    out_model_path.parent.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory(prefix="adapter-dev-") as tmp:
        tmp_dir = Path(tmp)
        for epoch in range(1, max_epochs + 1):
            model.train()
            shuffled = examples[:]
            order_rng.shuffle(shuffled)
            total = 0.0
            weight = 0
            for batch in _batches(shuffled, cfg.batch_size):
                optimizer.zero_grad()
                loss, n_tokens = _batch_loss(model, batch, loss_fn)
                value = float(loss.item())
                if not math.isfinite(value):
                    raise ExchangeError(f"non-finite loss at epoch {epoch}: {value}")
                loss.backward()
                optimizer.step()
                total += value * n_tokens
                weight += n_tokens
            losses.append(total / max(weight, 1))

            if dev_corpus_path is not None:
                model.eval()
                f1 = _dev_f1(model, dev_corpus_path, features, tmp_dir)
                dev_scores.append(f1)
                if f1 > best_f1:
                    best_f1 = f1
                    best_epoch = epoch
                    since_best = 0
                    save_checkpoint(model, out_model_path)
                else:
                    since_best += 1
                    if since_best >= cfg.patience:
                        break
            else:
                best_epoch = epoch
                save_checkpoint(model, out_model_path)

    metrics = {
        "train_loss": losses,
        "dev_f1": dev_scores,
        "best_epoch": best_epoch,
        "config": cfg.to_dict(),
    }
    metrics_path = out_model_path.with_suffix(".metrics.json")
    metrics_path.write_text(json.dumps(metrics, indent=2) + "\n", "utf-8")
    return metrics


@torch.no_grad()
def predict_to_file(model: BoundaryScorer, sentences, features, out_path) -> None:
    """Probability file for every sentence, one triple per token."""
    model.eval()
    records = []
    for i in range(0, len(sentences), model.cfg.batch_size):
        batch = sentences[i : i + model.cfg.batch_size]
        surfaces = [[t.surface for t in s.tokens] for s in batch]
        chunk_tags = []
        dep_buckets = []
        for s in batch:
            if features is not None and s.id in features:
                inside_np, dep_heads = features[s.id]
                chunk_tags.append(list(inside_np))
                dep_buckets.append(mean_distance_buckets(dep_heads))
            else:
                chunk_tags.append([0] * len(s))
                dep_buckets.append([0] * len(s))
        logits, token_mask = model(surfaces, chunk_tags, dep_buckets)
        probs = torch.sigmoid(logits)
        for b, sent in enumerate(batch):
            n = len(sent)
            records.append(
                (
                    sent.id,
                    probs[b, :n, 0].tolist(),
                    probs[b, :n, 1].tolist(),
                    probs[b, :n, 2].tolist(),
                )
            )
    write_probabilities(records, out_path)
