import random

import pytest

from spanforge import Corpus, MweAnnotation, MweType, Sentence, Split, Token
from spanforge._kernels import warmup


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # pay JIT compilation before any timed test runs
    warmup()


def make_sentence(surfaces, mwes=(), sid="s1", split=Split.TRAIN, heads=None, upos=None,
                  lemmas=None):
    tokens = []
    for i, surface in enumerate(surfaces):
        tokens.append(
            Token(
                index=i,
                surface=surface,
                lemma=lemmas[i] if lemmas else None,
                upos=upos[i] if upos else None,
                head=heads[i] if heads else None,
            )
        )
    annotations = tuple(
        MweAnnotation(tuple(indices), mwe_type) for indices, mwe_type in mwes
    )
    return Sentence(id=sid, tokens=tuple(tokens), mwes=annotations, split=split)


def make_corpus(sentences, name="fixture"):
    return Corpus(name=name, sentences=tuple(sentences))


def random_forest_heads(rng: random.Random, n: int):
    """Random forest: each non-root points to an earlier token, then shuffled."""
    if n == 0:
        return []
    order = list(range(n))
    rng.shuffle(order)
    heads = [None] * n
    for rank, tok in enumerate(order):
        if rank == 0 or rng.random() < 0.2:  # extra roots make forests
            continue
        heads[tok] = order[rng.randrange(rank)]
    return heads


def random_sentence_with_mwes(rng: random.Random, sid: str, split=Split.TRAIN,
                              n_range=(2, 14), max_mwes=2):
    n = rng.randint(*n_range)
    surfaces = [f"w{rng.randrange(20)}" for _ in range(n)]
    mwes = []
    used = set()
    for _ in range(rng.randrange(max_mwes + 1)):
        size = rng.randint(2, min(6, n))
        indices = tuple(sorted(rng.sample(range(n), size)))
        if indices[-1] - indices[0] + 1 > 13 or indices in used:
            continue
        used.add(indices)
        mwes.append((indices, rng.choice(list(MweType))))
    return make_sentence(surfaces, mwes, sid=sid, split=split,
                         heads=random_forest_heads(rng, n))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for status in ("passed", "failed"):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance" in getattr(report, "nodeid", ""):
                name = report.nodeid.split("::")[-1]
                lines.append((name, status.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status:<6} {name}")
