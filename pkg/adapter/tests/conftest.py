import json
import random
import subprocess
import sys

import pytest


def _toy_corpus_records(n_train=50, n_dev=0, seed=7):
    """Synthetic sentences with recurring two-token MWE patterns."""
    rng = random.Random(seed)
    pairs = [("took", "over"), ("in", "fact"), ("stock", "market"), ("set", "up")]
    fillers = [f"word{i}" for i in range(30)]
    records = []

    def build(sid, split):
        first, second = rng.choice(pairs)
        prefix = [rng.choice(fillers) for _ in range(rng.randint(1, 3))]
        middle = [rng.choice(fillers)] if rng.random() < 0.3 else []
        suffix = [rng.choice(fillers) for _ in range(rng.randint(1, 3))]
        words = prefix + [first] + middle + [second] + suffix
        i = len(prefix)
        j = i + len(middle) + 1
        heads = [None] + list(range(len(words) - 1))
        tokens = [
            {"surface": w, "upos": "NOUN", "head": heads[k]}
            for k, w in enumerate(words)
        ]
        return {
            "id": sid,
            "split": split,
            "tokens": tokens,
            "mwes": [{"indices": [i, j], "type": "VERB"}],
        }

    for i in range(n_train):
        records.append(build(f"t{i}", "train"))
    for i in range(n_dev):
        records.append(build(f"d{i}", "dev"))
    return records


def _write_records(records, path):
    path.write_text(
        "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records), "utf-8"
    )


def _spanforge_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "spanforge", *args],
        check=True,
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="session")
def toy_records():
    return _toy_corpus_records


@pytest.fixture(scope="session")
def write_records():
    return _write_records


@pytest.fixture(scope="session")
def spanforge_cli():
    return _spanforge_cli


@pytest.fixture(scope="session")
def toy_setup(tmp_path_factory):
    """50-sentence train corpus plus its projection artifact."""
    root = tmp_path_factory.mktemp("toy")
    corpus_path = root / "corpus.jsonl"
    _write_records(_toy_corpus_records(n_train=50), corpus_path)
    projections_path = root / "projections.json"
    _spanforge_cli("project", "--in", str(corpus_path), "--version", "toy-v1",
                   "--out", str(projections_path))
    return root, corpus_path, projections_path
