"""Corpus model and readers for annotated MWE data.

Three input formats share one loader entry point.

CANONICAL, one JSON record per line::

    {"id": "s1", "split": "train",
     "tokens": [{"surface": "looked", "lemma": "look", "upos": "VERB",
                 "head": null, "deprel": "root"}, ...],
     "mwes": [{"indices": [0, 3], "type": "VERB"}]}

`head` is a 0-based token index within the sentence, null for the root.
Optional token fields (lemma, upos, head, deprel) may be omitted. Type
names: NOUN, VERB, MOD/CONN, CLAUSE, OTHER.

COAM-style, one JSON record per line with bare surface tokens::

    {"id": "s1", "split": "train",
     "tokens": ["looked", "the", "information", "up"],
     "mwes": [{"indices": [0, 3], "type": "VERB"}]}

STREUSLE-style, a single JSON array of sentence objects, UD conventions
(1-based token numbers, head 0 for the root) and fine-grained categories
that are harmonized to the five coarse types via `map_streusle_type`::

    [{"sent_id": "ewtb.r.001", "split": "train",
      "toks": [{"num": 1, "word": "looked", "lemma": "look",
                "upos": "VERB", "head": 0, "deprel": "root"}, ...],
      "mwes": [{"toknums": [1, 4], "category": "verb-particle/construction"}]}]

The category table lives in data/streusle_type_map.json and is editable;
unknown categories are an error, never a silent OTHER.
"""

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from ._jsonl import dumps, iter_jsonl, write_jsonl
from .errors import FormatError


class MweType(Enum):
    NOUN = "NOUN"
    VERB = "VERB"
    MOD_CONN = "MOD/CONN"
    CLAUSE = "CLAUSE"
    OTHER = "OTHER"


class Split(Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


class CorpusFormat(Enum):
    CANONICAL = "canonical"
    COAM = "coam"
    STREUSLE = "streusle"


def is_contiguous(indices) -> bool:
    """True when the sorted index set forms a gap-free integer range."""
    indices = tuple(indices)
    return indices[-1] - indices[0] + 1 == len(indices)


@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    lemma: str | None = None
    upos: str | None = None
    head: int | None = None
    deprel: str | None = None


@dataclass(frozen=True)
class MweAnnotation:
    token_indices: tuple[int, ...]
    mwe_type: MweType

    def __post_init__(self):
        idx = self.token_indices
        if len(idx) < 2:
            raise ValueError(f"MWE needs at least 2 tokens, got {list(idx)}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"MWE indices must be strictly increasing, got {list(idx)}")

    @property
    def width(self) -> int:
        return self.token_indices[-1] - self.token_indices[0] + 1

    @property
    def contiguous(self) -> bool:
        return is_contiguous(self.token_indices)


@dataclass(frozen=True)
class Sentence:
    id: str
    tokens: tuple[Token, ...]
    mwes: tuple[MweAnnotation, ...]
    split: Split

    def __post_init__(self):
        n = len(self.tokens)
        for pos, tok in enumerate(self.tokens):
            if tok.index != pos:
                raise ValueError(
                    f"sentence {self.id!r}: token at position {pos} has index {tok.index}"
                )
            if tok.head is not None:
                if not 0 <= tok.head < n:
                    raise ValueError(
                        f"sentence {self.id!r}: token {pos} head {tok.head} out of range"
                    )
                if tok.head == tok.index:
                    raise ValueError(f"sentence {self.id!r}: token {pos} is its own head")
        seen = set()
        for mwe in self.mwes:
            if mwe.token_indices[-1] >= n:
                raise ValueError(
                    f"sentence {self.id!r}: MWE index {mwe.token_indices[-1]} out of range "
                    f"for {n} tokens"
                )
            if mwe.token_indices in seen:
                raise ValueError(
                    f"sentence {self.id!r}: duplicate MWE over {list(mwe.token_indices)}"
                )
            seen.add(mwe.token_indices)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Corpus:
    name: str
    sentences: tuple[Sentence, ...]

    def __post_init__(self):
        counts = Counter(s.id for s in self.sentences)
        dupes = [sid for sid, c in counts.items() if c > 1]
        if dupes:
            raise ValueError(f"duplicate sentence ids: {dupes}")

    def __len__(self) -> int:
        return len(self.sentences)

    def by_id(self, sentence_id: str) -> Sentence:
        try:
            return self._index[sentence_id]
        except AttributeError:
            object.__setattr__(self, "_index", {s.id: s for s in self.sentences})
            return self._index[sentence_id]

    def split_sentences(self, split: Split) -> tuple[Sentence, ...]:
        return tuple(s for s in self.sentences if s.split == split)


# ---------------------------------------------------------------------------
# STREUSLE category harmonization

_TYPE_MAP: dict[str, MweType] | None = None


def _load_type_map() -> dict[str, MweType]:
    global _TYPE_MAP
    if _TYPE_MAP is None:
        raw = json.loads(
            resources.files("spanforge").joinpath("data/streusle_type_map.json").read_text("utf-8")
        )
        table = {}
        for label, coarse in raw.items():
            mapped = MweType(coarse)
            if mapped is MweType.CLAUSE:
                raise ValueError(f"type map entry {label!r} maps to CLAUSE, which is not allowed")
            table[label] = mapped
        _TYPE_MAP = table
    return _TYPE_MAP


def map_streusle_type(fine_label: str) -> MweType:
    """Map a fine-grained STREUSLE category to one of the five coarse types."""
    table = _load_type_map()
    try:
        return table[fine_label]
    except KeyError:
        raise FormatError(f"unknown STREUSLE category {fine_label!r}") from None


# ---------------------------------------------------------------------------
# Loading

_SPLITS = {s.value: s for s in Split}


def _parse_split(value, where: str) -> Split:
    if value not in _SPLITS:
        raise FormatError(f"{where}: unknown split {value!r}")
    return _SPLITS[value]


def _parse_mwe_indices(raw, where: str) -> tuple[int, ...]:
    if not isinstance(raw, list) or not all(isinstance(i, int) for i in raw):
        raise FormatError(f"{where}: MWE indices must be a list of integers, got {raw!r}")
    return tuple(raw)


def _sorted_mwes(mwes) -> tuple[MweAnnotation, ...]:
    return tuple(sorted(mwes, key=lambda m: (m.token_indices, m.mwe_type.value)))


def _canonical_sentence(rec: dict, where: str) -> Sentence:
    tokens = []
    for pos, traw in enumerate(rec.get("tokens", [])):
        if not isinstance(traw, dict) or "surface" not in traw:
            raise FormatError(f"{where}: token {pos} must be an object with a 'surface' field")
        tokens.append(
            Token(
                index=pos,
                surface=traw["surface"],
                lemma=traw.get("lemma"),
                upos=traw.get("upos"),
                head=traw.get("head"),
                deprel=traw.get("deprel"),
            )
        )
    mwes = []
    for mraw in rec.get("mwes", []):
        indices = _parse_mwe_indices(mraw.get("indices"), where)
        try:
            mwe_type = MweType(mraw.get("type"))
        except ValueError:
            raise FormatError(f"{where}: unknown MWE type {mraw.get('type')!r}") from None
        mwes.append((indices, mwe_type))
    return _build_sentence(rec.get("id"), tokens, mwes, rec.get("split"), where)


def _coam_sentence(rec: dict, where: str) -> Sentence:
    tokens = []
    for pos, traw in enumerate(rec.get("tokens", [])):
        if not isinstance(traw, str):
            raise FormatError(f"{where}: COAM tokens are bare surface strings, got {traw!r}")
        tokens.append(Token(index=pos, surface=traw))
    mwes = []
    for mraw in rec.get("mwes", []):
        indices = _parse_mwe_indices(mraw.get("indices"), where)
        try:
            mwe_type = MweType(mraw.get("type"))
        except ValueError:
            raise FormatError(f"{where}: unknown MWE type {mraw.get('type')!r}") from None
        mwes.append((indices, mwe_type))
    return _build_sentence(rec.get("id"), tokens, mwes, rec.get("split"), where)


def _streusle_sentence(rec: dict, where: str) -> Sentence:
    tokens = []
    for pos, traw in enumerate(rec.get("toks", [])):
        if not isinstance(traw, dict) or "word" not in traw:
            raise FormatError(f"{where}: tok {pos} must be an object with a 'word' field")
        num = traw.get("num")
        if num != pos + 1:
            raise FormatError(f"{where}: tok {pos} has num {num!r}, expected {pos + 1}")
        head = traw.get("head")
        if head is not None:
            head = None if head == 0 else head - 1
        tokens.append(
            Token(
                index=pos,
                surface=traw["word"],
                lemma=traw.get("lemma"),
                upos=traw.get("upos"),
                head=head,
                deprel=traw.get("deprel"),
            )
        )
    mwes = []
    for mraw in rec.get("mwes", []):
        toknums = _parse_mwe_indices(mraw.get("toknums"), where)
        indices = tuple(t - 1 for t in toknums)
        mwes.append((indices, map_streusle_type(mraw.get("category"))))
    return _build_sentence(rec.get("sent_id"), tokens, mwes, rec.get("split"), where)


def _build_sentence(sid, tokens, mwes, split, where: str) -> Sentence:
    if not isinstance(sid, str) or not sid:
        raise FormatError(f"{where}: missing or empty sentence id")
    split = _parse_split(split, where)
    try:
        annotations = _sorted_mwes(MweAnnotation(idx, typ) for idx, typ in mwes)
        return Sentence(id=sid, tokens=tuple(tokens), mwes=annotations, split=split)
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


def load_corpus(path, format: CorpusFormat = CorpusFormat.CANONICAL, name: str | None = None) -> Corpus:
    """Load and validate a corpus file in one of the supported formats."""
    path = Path(path)
    if name is None:
        name = path.stem
    sentences = []
    if format is CorpusFormat.STREUSLE:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: invalid JSON ({exc.msg})") from exc
        if not isinstance(data, list):
            raise FormatError(f"{path}: expected a top-level JSON array of sentences")
        for recno, rec in enumerate(data, start=1):
            sentences.append(_streusle_sentence(rec, f"{path}: sentence {recno}"))
    else:
        parse = _canonical_sentence if format is CorpusFormat.CANONICAL else _coam_sentence
        for lineno, rec in iter_jsonl(path):
            sentences.append(parse(rec, f"{path}: record {lineno}"))
    try:
        return Corpus(name=name, sentences=tuple(sentences))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def sentence_record(sentence: Sentence) -> dict:
    """Canonical-format record for one sentence, with stable key order."""
    tokens = []
    for tok in sentence.tokens:
        t = {"surface": tok.surface}
        if tok.lemma is not None:
            t["lemma"] = tok.lemma
        if tok.upos is not None:
            t["upos"] = tok.upos
        if tok.head is not None:
            t["head"] = tok.head
        if tok.deprel is not None:
            t["deprel"] = tok.deprel
        tokens.append(t)
    mwes = [
        {"indices": list(m.token_indices), "type": m.mwe_type.value}
        for m in _sorted_mwes(sentence.mwes)
    ]
    return {"id": sentence.id, "split": sentence.split.value, "tokens": tokens, "mwes": mwes}


def save_corpus(corpus: Corpus, path) -> None:
    """Write a corpus in the canonical format (deterministic bytes)."""
    write_jsonl(path, (sentence_record(s) for s in corpus.sentences))


# ---------------------------------------------------------------------------
# Summary statistics

@dataclass
class CorpusStats:
    sentences_per_split: dict = field(default_factory=dict)
    mwes_per_split: dict = field(default_factory=dict)
    type_histogram: dict = field(default_factory=dict)
    continuity: dict = field(default_factory=lambda: {"continuous": 0, "discontinuous": 0})
    span_length_histogram: dict = field(default_factory=dict)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    stats = CorpusStats()
    for split in Split:
        stats.sentences_per_split[split.value] = 0
        stats.mwes_per_split[split.value] = 0
    for sent in corpus.sentences:
        stats.sentences_per_split[sent.split.value] += 1
        for mwe in sent.mwes:
            stats.mwes_per_split[sent.split.value] += 1
            stats.type_histogram[mwe.mwe_type.value] = (
                stats.type_histogram.get(mwe.mwe_type.value, 0) + 1
            )
            key = "continuous" if mwe.contiguous else "discontinuous"
            stats.continuity[key] += 1
            stats.span_length_histogram[mwe.width] = (
                stats.span_length_histogram.get(mwe.width, 0) + 1
            )
    return stats
