"""Training-set augmentation.

Two strategies, both seeded and deterministic:

* oversample: duplicate a random selection of MWE-bearing train
  sentences, appending the copies with fresh ids.
* lexical substitution: for a random selection of train sentences,
  replace one random token that belongs to no MWE with its top-ranked
  similar word from a substitution lexicon, appending the modified copy.
  Annotations are never touched; sentences with no eligible token are
  skipped and the skip count logged.

Ratios outside the studied set {0.10, 0.20, 0.30, 0.40} are permitted
but flagged in the log.
"""

import dataclasses
import logging
import random
from dataclasses import dataclass, field
from enum import Enum

from ._jsonl import iter_jsonl
from .corpus import Corpus, Sentence, Split
from .errors import ConfigError, FormatError

logger = logging.getLogger(__name__)

_STUDIED_RATIOS = (0.10, 0.20, 0.30, 0.40)


class AugmentStrategy(Enum):
    OVERSAMPLE = "oversample"
    LEX_SUB = "lexsub"


@dataclass(frozen=True)
class AugmentConfig:
    strategy: AugmentStrategy
    ratio: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError(f"ratio must be in (0, 1], got {self.ratio}")
        if all(abs(self.ratio - r) > 1e-9 for r in _STUDIED_RATIOS):
            logger.info("augmentation ratio %.2f is outside the studied set", self.ratio)


@dataclass
class SubstitutionLexicon:
    similar: dict = field(default_factory=dict)  # word -> ranked list of words

    def __post_init__(self):
        for word, ranked in self.similar.items():
            if not ranked:
                raise ValueError(f"substitution list for {word!r} is empty")
            if ranked[0] == word:
                raise ValueError(f"{word!r} maps to itself as rank-1 substitute")

    def __len__(self) -> int:
        return len(self.similar)


def load_substitution_lexicon(path) -> SubstitutionLexicon:
    similar = {}
    for lineno, rec in iter_jsonl(path):
        where = f"{path}: record {lineno}"
        try:
            word = rec["word"]
            ranked = list(rec["similar"])
        except (KeyError, TypeError):
            raise FormatError(f"{where}: expected word and similar") from None
        if word in similar:
            raise FormatError(f"{where}: duplicate word {word!r}")
        similar[word] = ranked
    try:
        return SubstitutionLexicon(similar=similar)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def _select(candidates: list[Sentence], ratio: float, seed: int) -> list[Sentence]:
    k = int(ratio * len(candidates))
    rng = random.Random(seed)
    return rng.sample(candidates, k)


def oversample(train: Corpus, cfg: AugmentConfig) -> Corpus:
    """Append exact duplicates of randomly selected MWE-bearing sentences."""
    if cfg.strategy is not AugmentStrategy.OVERSAMPLE:
        raise ConfigError(f"oversample called with strategy {cfg.strategy.value}")
    bearing = [s for s in train.sentences if s.split == Split.TRAIN and s.mwes]
    if not bearing:
        raise ConfigError(f"corpus {train.name!r} has no MWE-bearing train sentences")
    selected = _select(bearing, cfg.ratio, cfg.seed)
    duplicates = [dataclasses.replace(s, id=f"{s.id}#dup1") for s in selected]
    return Corpus(name=train.name, sentences=train.sentences + tuple(duplicates))


def eligible_substitution_tokens(sentence: Sentence, lexicon: SubstitutionLexicon) -> list[int]:
    """Token positions outside every MWE whose surface has a lexicon entry."""
    in_mwe = set()
    for mwe in sentence.mwes:
        in_mwe.update(mwe.token_indices)
    return [
        t.index
        for t in sentence.tokens
        if t.index not in in_mwe and t.surface.lower() in lexicon.similar
    ]


def lexical_substitute(
    train: Corpus, lexicon: SubstitutionLexicon, cfg: AugmentConfig
) -> Corpus:
    """Append one-token-substituted copies of randomly selected sentences."""
    if cfg.strategy is not AugmentStrategy.LEX_SUB:
        raise ConfigError(f"lexical_substitute called with strategy {cfg.strategy.value}")
    if not len(lexicon):
        raise ConfigError("substitution lexicon is empty")
    pool = [s for s in train.sentences if s.split == Split.TRAIN]
    if not pool:
        raise ConfigError(f"corpus {train.name!r} has no train-split sentences")
    rng = random.Random(cfg.seed)
    k = int(cfg.ratio * len(pool))
    selected = rng.sample(pool, k)
    copies = []
    skipped = 0
    for sent in selected:
        eligible = eligible_substitution_tokens(sent, lexicon)
        if not eligible:
            skipped += 1
            continue
        pos = rng.choice(eligible)
        replacement = lexicon.similar[sent.tokens[pos].surface.lower()][0]
        tokens = list(sent.tokens)
        tokens[pos] = dataclasses.replace(tokens[pos], surface=replacement)
        copies.append(
            dataclasses.replace(sent, id=f"{sent.id}#sub1", tokens=tuple(tokens))
        )
    if skipped:
        logger.info("lexical substitution skipped %d sentence(s) with no eligible token", skipped)
    return Corpus(name=train.name, sentences=train.sentences + tuple(copies))
