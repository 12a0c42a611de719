"""Per-token probability exchange format and the lexicon baseline scorer.

The probability file is the contract between any scorer (neural or not)
and the reconstruction stage: three aligned sequences per sentence, one
value per token, each in [0, 1], exchanged at token granularity.

The baseline scorer needs no trained model: it memorizes the member-word
sequences of training MWEs (lemma when present, else surface, lowercased)
and fires 1.0 boundary/interior probabilities wherever a memorized
sequence recurs, contiguously or with a bounded gap. Matching marks the
union over all occurrences, so overlapping hits take the elementwise max.
"""

from dataclasses import dataclass, field

from ._jsonl import iter_jsonl, write_jsonl
from .corpus import Corpus, Sentence, Split
from .errors import ConfigError, FormatError, SchemaError

# A memorized sequence of k members may spread over at most k + MAX_GAP
# tokens: 11 skipped positions mirrors the width-13 cap with 2 boundaries.
MAX_GAP = 11


@dataclass(frozen=True)
class TokenProbabilities:
    sentence_id: str
    p_start: tuple[float, ...]
    p_end: tuple[float, ...]
    p_inside: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.p_start) == len(self.p_end) == len(self.p_inside)):
            raise ValueError(f"sentence {self.sentence_id!r}: probability lengths differ")
        for name, seq in (("p_start", self.p_start), ("p_end", self.p_end),
                          ("p_inside", self.p_inside)):
            for v in seq:
                if not 0.0 <= v <= 1.0:
                    raise ValueError(
                        f"sentence {self.sentence_id!r}: {name} value {v} outside [0, 1]"
                    )

    def __len__(self) -> int:
        return len(self.p_start)


@dataclass
class MweLexicon:
    entries: dict = field(default_factory=dict)  # tuple[str, ...] -> count

    def __len__(self) -> int:
        return len(self.entries)


def _token_key(token) -> str:
    return (token.lemma if token.lemma is not None else token.surface).lower()


def _mwe_key(sentence: Sentence, indices) -> tuple[str, ...]:
    return tuple(_token_key(sentence.tokens[i]) for i in indices)


def build_lexicon(train: Corpus) -> MweLexicon:
    """Count every distinct gold member-word sequence in the train split."""
    sentences = train.split_sentences(Split.TRAIN)
    if not sentences:
        raise ConfigError(f"corpus {train.name!r} has no train-split sentences")
    lexicon = MweLexicon()
    for sent in sentences:
        for mwe in sent.mwes:
            key = _mwe_key(sent, mwe.token_indices)
            lexicon.entries[key] = lexicon.entries.get(key, 0) + 1
    return lexicon


def _mark_key_occurrences(key, tok_keys, p_start, p_end, p_inside) -> None:
    """Set 1.0 marks for every occurrence of `key` in the token sequence.

    An occurrence assigns members to strictly increasing positions whose
    total width is at most len(key) + MAX_GAP. Instead of enumerating
    occurrences (combinatorial on repeated words) this walks the state
    graph (member_rank, position): a state is marked when it is reachable
    from a viable occurrence start and can still be completed.
    """
    k = len(key)
    n = len(tok_keys)
    for s0 in range(n - k + 1):
        if tok_keys[s0] != key[0]:
            continue
        limit = min(n, s0 + k + MAX_GAP)  # exclusive bound on member positions
        memo = {}

        def completable(rank, pos):
            if rank == k - 1:
                return True
            state = (rank, pos)
            if state not in memo:
                memo[state] = False  # guards the recursion, then overwritten
                memo[state] = any(
                    tok_keys[q] == key[rank + 1] and completable(rank + 1, q)
                    for q in range(pos + 1, limit)
                )
            return memo[state]

        if not completable(0, s0):
            continue
        p_start[s0] = 1.0
        stack = [(0, s0)]
        visited = set()
        while stack:
            rank, pos = stack.pop()
            if (rank, pos) in visited:
                continue
            visited.add((rank, pos))
            if rank == k - 1:
                p_end[pos] = 1.0
                continue
            for q in range(pos + 1, limit):
                if tok_keys[q] == key[rank + 1] and completable(rank + 1, q):
                    if 0 < rank + 1 < k - 1:
                        p_inside[q] = 1.0
                    stack.append((rank + 1, q))


def baseline_score(sentence: Sentence, lexicon: MweLexicon) -> TokenProbabilities:
    n = len(sentence)
    tok_keys = [_token_key(t) for t in sentence.tokens]
    p_start = [0.0] * n
    p_end = [0.0] * n
    p_inside = [0.0] * n
    for key in sorted(lexicon.entries):
        if len(key) <= n:
            _mark_key_occurrences(key, tok_keys, p_start, p_end, p_inside)
    return TokenProbabilities(
        sentence_id=sentence.id,
        p_start=tuple(p_start),
        p_end=tuple(p_end),
        p_inside=tuple(p_inside),
    )


def score_corpus(corpus: Corpus, lexicon: MweLexicon) -> dict:
    return {s.id: baseline_score(s, lexicon) for s in corpus.sentences}


def _round6(values) -> list[float]:
    return [round(float(v), 6) for v in values]


def write_probabilities(probabilities: dict, path) -> None:
    """Serialize sentence_id -> TokenProbabilities, values at 6 decimals."""
    write_jsonl(
        path,
        (
            {
                "sentence_id": p.sentence_id,
                "p_start": _round6(p.p_start),
                "p_end": _round6(p.p_end),
                "p_inside": _round6(p.p_inside),
            }
            for p in probabilities.values()
        ),
    )


def load_probabilities(path) -> dict:
    out = {}
    for lineno, rec in iter_jsonl(path):
        where = f"{path}: record {lineno}"
        try:
            probs = TokenProbabilities(
                sentence_id=rec["sentence_id"],
                p_start=tuple(float(v) for v in rec["p_start"]),
                p_end=tuple(float(v) for v in rec["p_end"]),
                p_inside=tuple(float(v) for v in rec["p_inside"]),
            )
        except (KeyError, TypeError):
            raise FormatError(
                f"{where}: expected sentence_id, p_start, p_end, p_inside"
            ) from None
        except ValueError as exc:
            raise FormatError(f"{where}: {exc}") from None
        if probs.sentence_id in out:
            raise FormatError(f"{where}: duplicate sentence_id {probs.sentence_id!r}")
        out[probs.sentence_id] = probs
    return out


def validate_probabilities(probabilities: dict, corpus: Corpus) -> None:
    ids = {s.id for s in corpus.sentences}
    for sid in probabilities:
        if sid not in ids:
            raise SchemaError(f"probability file references unknown sentence id {sid!r}")
    for sent in corpus.sentences:
        probs = probabilities.get(sent.id)
        if probs is None:
            raise SchemaError(f"no probabilities for sentence {sent.id!r}")
        if len(probs) != len(sent):
            raise SchemaError(
                f"sentence {sent.id!r}: probability length {len(probs)} "
                f"does not match {len(sent)} tokens"
            )
