"""Command-line interface.

One executable, `spanforge`, with subcommands convert, project,
features, score, reconstruct, tune, evaluate, augment, and pipeline.
Failure classes map to distinct exit codes (see errors.py); the
SPANFORGE_SEED environment variable supplies the seed when a command
takes one and the flag is omitted.
"""

import functools
import sys

import click

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
from .evaluate import evaluate as evaluate_predictions
from .evaluate import render_report, report_to_dict
from .features import extract_corpus_features, load_features, validate_features, write_features
from .pipeline import default_seed, load_manifest, parse_reconstruction, run_pipeline
from .projection import write_artifact
from .reconstruct import (
    Thresholds,
    load_predictions,
    reconstruct_corpus,
    write_predictions,
)
from .scoring import build_lexicon, load_probabilities, score_corpus, write_probabilities
from .tune import ThresholdGrid, carve_dev, grid_search, write_trace


def _fail_on_error(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SpanforgeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


@click.group()
@click.version_option(version=__version__)
def main():
    """MWE identification toolkit."""


@main.command()
@click.option("--from", "source_format", type=click.Choice(["coam", "streusle"]), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@_fail_on_error
def convert(source_format, in_path, out_path):
    """Convert a COAM- or STREUSLE-style file to the canonical format."""
    corpus = load_corpus(in_path, CorpusFormat(source_format))
    save_corpus(corpus, out_path)
    click.echo(f"wrote {len(corpus)} sentences to {out_path}")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--version", "version_tag", required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@_fail_on_error
def project(in_path, version_tag, out_path):
    """Project corpus MWEs to start/end/inside vectors, write the artifact."""
    corpus = load_corpus(in_path)
    artifact = write_artifact(corpus, version_tag, out_path)
    click.echo(f"wrote {len(artifact.projections)} projections, checksum {artifact.checksum}")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--heuristic-chunks", is_flag=True, help="Derive NP tags from upos runs.")
@_fail_on_error
def features(in_path, out_path, heuristic_chunks):
    """Emit per-sentence chunk tags and dependency heads from a corpus."""
    corpus = load_corpus(in_path)
    feats = extract_corpus_features(corpus, heuristic_chunks=heuristic_chunks)
    write_features(feats, out_path)
    click.echo(f"wrote features for {len(feats)} sentences to {out_path}")


@main.command()
@click.option("--train", "train_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@_fail_on_error
def score(train_path, in_path, out_path):
    """Score a corpus with the lexicon baseline built from a train split."""
    train = load_corpus(train_path)
    lexicon = build_lexicon(train)
    target = load_corpus(in_path)
    probs = score_corpus(target, lexicon)
    write_probabilities(probs, out_path)
    click.echo(f"scored {len(probs)} sentences with {len(lexicon)} lexicon entries")


@main.command()
@click.option("--probs", "probs_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--features", "features_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--tau-start", type=float, required=True)
@click.option("--tau-end", type=float, required=True)
@click.option("--tau-inside", type=float, required=True)
@click.option("--overlap", type=click.Choice(["greedy", "all"]), default="greedy")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@_fail_on_error
def reconstruct(probs_path, corpus_path, features_path, tau_start, tau_end, tau_inside,
                overlap, out_path):
    """Reconstruct MWE spans from a probability file."""
    corpus = load_corpus(corpus_path)
    probs = load_probabilities(probs_path)
    feats = None
    if features_path:
        feats = load_features(features_path)
        validate_features(feats, corpus)
    try:
        thresholds = Thresholds(tau_start, tau_end, tau_inside)
        cfg = parse_reconstruction({"overlap": overlap})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    preds = reconstruct_corpus(corpus, probs, thresholds, cfg, feats)
    write_predictions(preds, out_path)
    total = sum(len(p) for p in preds.values())
    click.echo(f"wrote {total} predictions for {len(preds)} sentences")


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--probs", "probs_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--grid", "grid_spec", default="0.2:0.6:0.05", show_default=True)
@click.option("--dev-fraction", type=float, help="Carve a dev slice out of the train split.")
@click.option("--seed", type=int, default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False))
@_fail_on_error
def tune(corpus_path, probs_path, grid_spec, dev_fraction, seed, jobs, out_path, trace_path):
    """Grid-search thresholds on the dev split (or a carved slice of train)."""
    corpus = load_corpus(corpus_path)
    probs = load_probabilities(probs_path)
    grid = ThresholdGrid.parse(grid_spec)
    if dev_fraction is not None:
        _, dev = carve_dev(corpus, dev_fraction, seed if seed is not None else default_seed())
    else:
        dev_sentences = corpus.split_sentences(Split.DEV)
        if not dev_sentences:
            raise ConfigError(
                "corpus has no dev split; use --dev-fraction to carve one from train"
            )
        dev = Corpus(name=corpus.name, sentences=dev_sentences)
    result = grid_search(dev, probs, grid, jobs=jobs)
    payload = {
        "best": {
            "tau_start": result.best.tau_start,
            "tau_end": result.best.tau_end,
            "tau_inside": result.best.tau_inside,
        },
        "best_f1": result.best_f1,
        "grid_size": len(result.trace),
    }
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(payload) + "\n")
    write_trace(result, trace_path if trace_path else out_path + ".trace.tsv")
    click.echo(
        f"best thresholds ({result.best.tau_start:g}, {result.best.tau_end:g}, "
        f"{result.best.tau_inside:g}) with dev F1 {result.best_f1:.4f}"
    )


@main.command()
@click.option("--pred", "pred_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--gold", "gold_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@_fail_on_error
def evaluate(pred_path, gold_path, out_path):
    """Exact span-match evaluation of a prediction file."""
    gold = load_corpus(gold_path)
    preds = load_predictions(pred_path)
    report = evaluate_predictions(preds, gold)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report_to_dict(report)) + "\n")
    click.echo(render_report(report), nl=False)


@main.command()
@click.option("--strategy", type=click.Choice(["oversample", "lexsub"]), required=True)
@click.option("--ratio", type=float, required=True)
@click.option("--seed", type=int, default=None)
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@_fail_on_error
def augment(strategy, ratio, seed, lexicon_path, in_path, out_path):
    """Augment the train split by oversampling or lexical substitution."""
    corpus = load_corpus(in_path)
    try:
        cfg = AugmentConfig(
            strategy=AugmentStrategy(strategy),
            ratio=ratio,
            seed=seed if seed is not None else default_seed(),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.strategy is AugmentStrategy.OVERSAMPLE:
        augmented = oversample(corpus, cfg)
    else:
        if not lexicon_path:
            raise ConfigError("lexsub needs --lexicon")
        augmented = lexical_substitute(corpus, load_substitution_lexicon(lexicon_path), cfg)
    save_corpus(augmented, out_path)
    click.echo(f"wrote {len(augmented)} sentences ({len(augmented) - len(corpus)} added)")


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@_fail_on_error
def pipeline(manifest_path, jobs):
    """Run convert/score/tune/reconstruct/evaluate per a run manifest."""
    manifest = load_manifest(manifest_path)
    record = run_pipeline(manifest, jobs=jobs)
    click.echo(f"pipeline complete, outputs in {manifest['out_dir']}")
    for name, digest in record["output_digests"].items():
        click.echo(f"  {name}: {digest[:12]}")


if __name__ == "__main__":
    main()
