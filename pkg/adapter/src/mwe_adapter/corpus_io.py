"""Readers and writers for the toolkit's exchange file formats.

The adapter talks to the toolkit only through files: the canonical
corpus format (JSON lines), the projection artifact (single JSON
document with a SHA-256 payload digest), the feature file and the
probability file. This module implements those contracts locally so the
adapter has no code dependency on the toolkit package.
"""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path


class ExchangeError(Exception):
    pass


@dataclass(frozen=True)
class SimpleToken:
    surface: str
    lemma: str | None = None
    upos: str | None = None
    head: int | None = None


@dataclass(frozen=True)
class SimpleSentence:
    id: str
    split: str
    tokens: tuple[SimpleToken, ...]
    mwe_indices: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.tokens)


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def read_corpus(path) -> list[SimpleSentence]:
    sentences = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExchangeError(f"{path}: record {lineno}: invalid JSON ({exc.msg})")
            tokens = tuple(
                SimpleToken(
                    surface=t["surface"],
                    lemma=t.get("lemma"),
                    upos=t.get("upos"),
                    head=t.get("head"),
                )
                for t in rec["tokens"]
            )
            mwes = tuple(tuple(m["indices"]) for m in rec.get("mwes", []))
            sentences.append(
                SimpleSentence(
                    id=rec["id"], split=rec["split"], tokens=tokens, mwe_indices=mwes
                )
            )
    return sentences


def read_projections(path) -> dict:
    """Projection artifact -> {sentence_id: (start, end, inside)}.

    Verifies the payload digest before trusting the labels.
    """
    doc = json.loads(Path(path).read_text("utf-8"))
    payload = doc["projections"]
    actual = hashlib.sha256(_dumps(payload).encode("utf-8")).hexdigest()
    if actual != doc["checksum"]:
        raise ExchangeError(
            f"{path}: projection digest mismatch (expected {doc['checksum']}, "
            f"actual {actual})"
        )
    return {
        rec["sentence_id"]: (rec["start"], rec["end"], rec["inside"]) for rec in payload
    }


def read_features(path) -> dict:
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out[rec["sentence_id"]] = (rec["inside_np"], rec["dep_heads"])
    return out


def write_features(records, path) -> None:
    """records: iterable of (sentence_id, inside_np, dep_heads)."""
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for sid, inside_np, dep_heads in records:
            fh.write(
                _dumps(
                    {"sentence_id": sid, "inside_np": list(inside_np),
                     "dep_heads": list(dep_heads)}
                )
            )
            fh.write("\n")
    tmp.replace(path)


def write_probabilities(records, path) -> None:
    """records: iterable of (sentence_id, p_start, p_end, p_inside)."""
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for sid, p_start, p_end, p_inside in records:
            fh.write(
                _dumps(
                    {
                        "sentence_id": sid,
                        "p_start": [round(float(v), 6) for v in p_start],
                        "p_end": [round(float(v), 6) for v in p_end],
                        "p_inside": [round(float(v), 6) for v in p_inside],
                    }
                )
            )
            fh.write("\n")
    tmp.replace(path)
