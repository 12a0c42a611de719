"""adapter: extract-features, train, predict.

Exchanges data with the spanforge toolkit exclusively through its file
formats (canonical corpus, projection artifact, feature file,
probability file).
"""

import json
import sys

import click

from .corpus_io import ExchangeError, read_corpus, read_features, write_features
from .features import extract_features
from .model import AdapterConfig, load_checkpoint
from .training import predict_to_file, train


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Neural scorer adapter for the spanforge toolkit."""


@main.command("extract-features")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--spacy-model", default="en_core_web_sm", show_default=True)
def extract_features_cmd(corpus_path, out_path, spacy_model):
    """Emit chunk tags and dependency heads for every corpus sentence."""
    try:
        sentences = read_corpus(corpus_path)
        records, report = extract_features(sentences, spacy_model=spacy_model)
        write_features(records, out_path)
    except ExchangeError as exc:
        _fail(str(exc))
    click.echo(
        f"features for {len(records)} sentences "
        f"(pipeline={report.via_pipeline}, corpus={report.via_corpus}, "
        f"null-heads={report.null_heads})"
    )
    for sid, message in report.failures[:10]:
        click.echo(f"  {sid}: {message}", err=True)


def _config_from(config_path, **overrides) -> AdapterConfig:
    raw = {}
    if config_path:
        raw = json.loads(open(config_path, "r", encoding="utf-8").read())
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return AdapterConfig.from_dict({**AdapterConfig().to_dict(), **raw})


@main.command("train")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--projections", "projections_path",
              type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--features", "features_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--dev", "dev_corpus_path", type=click.Path(exists=True, dir_okay=False),
              help="Dev corpus for early stopping via the toolkit evaluator.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--encoder", "encoder_name", default=None)
@click.option("--lr", "learning_rate", type=float, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--use-chunk-embeddings", is_flag=True, default=None)
@click.option("--use-dep-embeddings", is_flag=True, default=None)
@click.option("--out", "out_model_path", type=click.Path(dir_okay=False), required=True)
def train_cmd(corpus_path, projections_path, features_path, dev_corpus_path, config_path,
              encoder_name, learning_rate, batch_size, epochs, seed,
              use_chunk_embeddings, use_dep_embeddings, out_model_path):
    """Fine-tune the boundary scorer on the corpus train split."""
    cfg = _config_from(
        config_path,
        encoder_name=encoder_name,
        learning_rate=learning_rate,
        batch_size=batch_size,
        seed=seed,
        use_chunk_embeddings=use_chunk_embeddings or None,
        use_dep_embeddings=use_dep_embeddings or None,
    )
    try:
        metrics = train(
            corpus_path,
            projections_path,
            out_model_path,
            cfg,
            features_path=features_path,
            dev_corpus_path=dev_corpus_path,
            epochs=epochs,
        )
    except ExchangeError as exc:
        _fail(str(exc))
    losses = ", ".join(f"{x:.4f}" for x in metrics["train_loss"])
    click.echo(f"trained {len(metrics['train_loss'])} epoch(s); loss: {losses}")
    if metrics["dev_f1"]:
        click.echo(f"best dev F1 {max(metrics['dev_f1']):.4f} "
                   f"at epoch {metrics['best_epoch']}")


@main.command("predict")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--features", "features_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def predict_cmd(model_path, corpus_path, features_path, out_path):
    """Write a probability file for every sentence in the corpus."""
    try:
        model = load_checkpoint(model_path)
        sentences = read_corpus(corpus_path)
        features = read_features(features_path) if features_path else None
        predict_to_file(model, sentences, features, out_path)
    except ExchangeError as exc:
        _fail(str(exc))
    click.echo(f"wrote probabilities for {len(sentences)} sentences to {out_path}")


if __name__ == "__main__":
    main()
