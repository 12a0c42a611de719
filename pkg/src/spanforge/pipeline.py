"""Composed end-to-end run driven by a JSON manifest.

Manifest fields (paths resolve relative to the manifest file)::

    {
      "corpus": "corpus.jsonl",            // canonical format, required
      "probabilities": "probs.jsonl",      // optional; omit to use the
                                           // lexicon baseline built from
                                           // the train split
      "features": "features.jsonl",        // optional; enables the
                                           // dependency filter
      "thresholds": {"start": 0.5, "end": 0.5, "inside": 0.5},
      "grid": "0.2:0.6:0.05",              // alternative to thresholds:
                                           // tune on the dev split
      "dev_fraction": 0.15,                // carve dev out of train when
                                           // the corpus has no dev split
      "eval_split": "test",                // test | dev | all
      "reconstruction": {"max_width": 13, "min_members": 2,
                          "max_members": 6, "dep_reject_above": 4,
                          "overlap": "greedy"},
      "augment": {"strategy": "oversample", "ratio": 0.3,
                   "lexicon": "subs.jsonl"},
      "seed": 42,
      "out_dir": "runs/exp1"
    }

Outputs land in out_dir: run.json (manifest echo, toolkit version, input
and output digests, seed), probabilities.jsonl (when computed),
predictions.jsonl, report.json, report.txt, plus tune_result.json and
tune_trace.tsv when a grid was requested. Reruns with the same manifest
and inputs are byte-identical.
"""

import json
import os
from pathlib import Path

from . import __version__
from ._jsonl import dumps
from .augment import (
    AugmentConfig,
    AugmentStrategy,
    lexical_substitute,
    load_substitution_lexicon,
    oversample,
)
from .corpus import Corpus, CorpusFormat, Split, load_corpus, save_corpus
from .errors import ConfigError, SpanforgeError
from .evaluate import evaluate, render_report, report_to_dict
from .features import load_features
from .projection import file_digest
from .reconstruct import (
    OverlapPolicy,
    ReconstructionConfig,
    Thresholds,
    reconstruct_corpus,
    write_predictions,
)
from .scoring import build_lexicon, load_probabilities, score_corpus, write_probabilities
from .tune import ThresholdGrid, TuneResult, carve_dev, grid_search, write_trace


class StageFailure(SpanforgeError):
    """Wraps the underlying error with the name of the failing stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"pipeline stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


def default_seed() -> int:
    env = os.environ.get("SPANFORGE_SEED")
    return int(env) if env else 0


def _parse_overlap(name: str) -> OverlapPolicy:
    table = {"greedy": OverlapPolicy.GREEDY_NONOVERLAP, "all": OverlapPolicy.ALLOW_ALL}
    if name not in table:
        raise ConfigError(f"unknown overlap policy {name!r}, expected greedy or all")
    return table[name]


def parse_reconstruction(raw: dict | None) -> ReconstructionConfig:
    raw = raw or {}
    try:
        return ReconstructionConfig(
            max_width=raw.get("max_width", 13),
            min_members=raw.get("min_members", 2),
            max_members=raw.get("max_members", 6),
            dep_reject_above=raw.get("dep_reject_above", 4),
            overlap_policy=_parse_overlap(raw.get("overlap", "greedy")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_manifest(path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: manifest is not valid JSON ({exc.msg})") from exc
    if "corpus" not in manifest:
        raise ConfigError(f"{path}: manifest needs a 'corpus' field")
    if "out_dir" not in manifest:
        raise ConfigError(f"{path}: manifest needs an 'out_dir' field")
    if "thresholds" in manifest and "grid" in manifest:
        raise ConfigError(f"{path}: give either 'thresholds' or 'grid', not both")
    if "thresholds" not in manifest and "grid" not in manifest:
        raise ConfigError(f"{path}: manifest needs 'thresholds' or 'grid'")
    base = path.parent
    resolved = dict(manifest)
    for key in ("corpus", "probabilities", "features"):
        if manifest.get(key):
            resolved[key] = str((base / manifest[key]).resolve())
    if manifest.get("augment") and manifest["augment"].get("lexicon"):
        resolved["augment"] = dict(manifest["augment"])
        resolved["augment"]["lexicon"] = str(
            (base / manifest["augment"]["lexicon"]).resolve()
        )
    resolved["out_dir"] = str((base / manifest["out_dir"]).resolve())
    return resolved


def run_pipeline(manifest: dict, jobs: int = 1) -> dict:
    """Execute all stages; returns the run record written to run.json."""
    # Pre-flight: every referenced input must exist before any stage runs,
    # so a bad manifest cannot leave partial outputs behind.
    inputs = [manifest["corpus"]]
    for key in ("probabilities", "features"):
        if manifest.get(key):
            inputs.append(manifest[key])
    if manifest.get("augment") and manifest["augment"].get("lexicon"):
        inputs.append(manifest["augment"]["lexicon"])
    for p in inputs:
        if not Path(p).is_file():
            raise ConfigError(f"manifest references missing file: {p}")

    seed = manifest.get("seed", default_seed())
    out_dir = Path(manifest["out_dir"])
    cfg = parse_reconstruction(manifest.get("reconstruction"))
    out_dir.mkdir(parents=True, exist_ok=True)
    produced: dict[str, Path] = {}

    def stage(name, fn):
        try:
            return fn()
        except StageFailure:
            raise
        except Exception as exc:
            raise StageFailure(name, exc) from exc

    corpus = stage("load-corpus", lambda: load_corpus(manifest["corpus"], CorpusFormat.CANONICAL))

    if manifest.get("augment"):
        araw = manifest["augment"]

        def do_augment():
            try:
                strategy = AugmentStrategy(araw.get("strategy"))
            except ValueError:
                raise ConfigError(f"unknown augment strategy {araw.get('strategy')!r}") from None
            acfg = AugmentConfig(strategy=strategy, ratio=araw["ratio"], seed=seed)
            if strategy is AugmentStrategy.OVERSAMPLE:
                augmented = oversample(corpus, acfg)
            else:
                lexicon = load_substitution_lexicon(araw["lexicon"])
                augmented = lexical_substitute(corpus, lexicon, acfg)
            save_corpus(augmented, out_dir / "augmented_corpus.jsonl")
            produced["augmented_corpus"] = out_dir / "augmented_corpus.jsonl"
            return augmented

        corpus = stage("augment", do_augment)

    features = None
    if manifest.get("features"):
        features = stage("load-features", lambda: load_features(manifest["features"]))

    def eval_corpus() -> Corpus:
        which = manifest.get("eval_split", "test")
        if which == "all":
            return corpus
        split = Split(which)
        sentences = corpus.split_sentences(split)
        if not sentences:
            raise ConfigError(f"corpus has no {which}-split sentences to evaluate")
        return Corpus(name=corpus.name, sentences=sentences)

    target = stage("select-eval-split", eval_corpus)

    if manifest.get("probabilities"):
        probabilities = stage(
            "load-probabilities", lambda: load_probabilities(manifest["probabilities"])
        )
    else:

        def do_score():
            lexicon = build_lexicon(corpus)
            probs = score_corpus(corpus, lexicon)
            write_probabilities(probs, out_dir / "probabilities.jsonl")
            produced["probabilities"] = out_dir / "probabilities.jsonl"
            return probs

        probabilities = stage("score", do_score)

    tune_result: TuneResult | None = None
    if manifest.get("grid"):

        def do_tune():
            grid = ThresholdGrid.parse(manifest["grid"])
            dev_sentences = corpus.split_sentences(Split.DEV)
            if dev_sentences:
                dev = Corpus(name=corpus.name, sentences=dev_sentences)
            elif manifest.get("dev_fraction"):
                _, dev = carve_dev(corpus, manifest["dev_fraction"], seed)
            else:
                raise ConfigError(
                    "grid tuning needs a dev split or a 'dev_fraction' to carve one"
                )
            result = grid_search(dev, probabilities, grid, cfg, features, jobs=jobs)
            (out_dir / "tune_result.json").write_text(
                dumps(
                    {
                        "best": {
                            "tau_start": result.best.tau_start,
                            "tau_end": result.best.tau_end,
                            "tau_inside": result.best.tau_inside,
                        },
                        "best_f1": result.best_f1,
                    }
                )
                + "\n",
                "utf-8",
            )
            write_trace(result, out_dir / "tune_trace.tsv")
            produced["tune_result"] = out_dir / "tune_result.json"
            produced["tune_trace"] = out_dir / "tune_trace.tsv"
            return result

        tune_result = stage("tune", do_tune)
        thresholds = tune_result.best
    else:
        traw = manifest["thresholds"]
        try:
            thresholds = Thresholds(traw["start"], traw["end"], traw["inside"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad thresholds in manifest: {exc}") from None

    def do_reconstruct():
        target_probs = {s.id: probabilities[s.id] for s in target.sentences
                        if s.id in probabilities}
        target_features = None
        if features is not None:
            target_features = {s.id: features[s.id] for s in target.sentences
                               if s.id in features}
        preds = reconstruct_corpus(target, target_probs, thresholds, cfg, target_features)
        write_predictions(preds, out_dir / "predictions.jsonl")
        produced["predictions"] = out_dir / "predictions.jsonl"
        return preds

    predictions = stage("reconstruct", do_reconstruct)

    def do_evaluate():
        report = evaluate(predictions, target)
        (out_dir / "report.json").write_text(dumps(report_to_dict(report)) + "\n", "utf-8")
        (out_dir / "report.txt").write_text(render_report(report), "utf-8")
        produced["report"] = out_dir / "report.json"
        produced["report_txt"] = out_dir / "report.txt"
        return report

    stage("evaluate", do_evaluate)

    record = {
        "toolkit_version": __version__,
        "seed": seed,
        "manifest": manifest,
        "thresholds": {
            "tau_start": thresholds.tau_start,
            "tau_end": thresholds.tau_end,
            "tau_inside": thresholds.tau_inside,
        },
        "input_digests": {str(p): file_digest(p) for p in inputs},
        "output_digests": {
            name: file_digest(path) for name, path in sorted(produced.items())
        },
    }
    (out_dir / "run.json").write_text(dumps(record) + "\n", "utf-8")
    return record
