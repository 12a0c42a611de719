"""Span annotations to per-token start/end/inside bit vectors.

A token gets start=1 when it opens some MWE, end=1 when it closes one,
and inside=1 when it is a strict-interior member of one. Two MWEs that
share a boundary token collapse onto the same bit; `boundary_collisions`
counts those positions so the loss is measurable instead of silent.

Projections for a whole corpus are stored as a versioned artifact whose
payload is protected by a SHA-256 digest. The digest covers only the
serialized projections, not the version string, so re-versioning
identical content is detectable.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from ._jsonl import dumps
from .corpus import Corpus, Sentence
from .errors import FormatError, IntegrityError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LabelProjection:
    sentence_id: str
    start: tuple[int, ...]
    end: tuple[int, ...]
    inside: tuple[int, ...]


@dataclass(frozen=True)
class ProjectionArtifact:
    version: str
    corpus_name: str
    projections: tuple[LabelProjection, ...]
    checksum: str


def project(sentence: Sentence) -> LabelProjection:
    n = len(sentence)
    start = [0] * n
    end = [0] * n
    inside = [0] * n
    for mwe in sentence.mwes:
        idx = mwe.token_indices
        start[idx[0]] = 1
        end[idx[-1]] = 1
        for t in idx[1:-1]:
            inside[t] = 1
    return LabelProjection(
        sentence_id=sentence.id, start=tuple(start), end=tuple(end), inside=tuple(inside)
    )


def boundary_collisions(sentence: Sentence) -> int:
    """Number of positions where two or more MWEs share a start or an end."""
    starts = {}
    ends = {}
    for mwe in sentence.mwes:
        starts[mwe.token_indices[0]] = starts.get(mwe.token_indices[0], 0) + 1
        ends[mwe.token_indices[-1]] = ends.get(mwe.token_indices[-1], 0) + 1
    return sum(1 for c in starts.values() if c > 1) + sum(1 for c in ends.values() if c > 1)


def _payload_records(projections) -> list[dict]:
    return [
        {
            "sentence_id": p.sentence_id,
            "start": list(p.start),
            "end": list(p.end),
            "inside": list(p.inside),
        }
        for p in projections
    ]


def payload_digest(payload_records: list[dict]) -> str:
    return hashlib.sha256(dumps(payload_records).encode("utf-8")).hexdigest()


def file_digest(path) -> str:
    """SHA-256 of raw file bytes; used for run provenance."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_artifact(corpus: Corpus, version: str) -> ProjectionArtifact:
    projections = []
    for sent in corpus.sentences:
        collided = boundary_collisions(sent)
        if collided:
            logger.warning(
                "sentence %s: %d boundary collision(s), overlapping MWE boundaries "
                "collapse to one bit",
                sent.id,
                collided,
            )
        projections.append(project(sent))
    projections = tuple(projections)
    checksum = payload_digest(_payload_records(projections))
    return ProjectionArtifact(
        version=version, corpus_name=corpus.name, projections=projections, checksum=checksum
    )


def write_artifact(corpus: Corpus, version: str, path) -> ProjectionArtifact:
    artifact = build_artifact(corpus, version)
    doc = {
        "version": artifact.version,
        "corpus_name": artifact.corpus_name,
        "checksum": artifact.checksum,
        "projections": _payload_records(artifact.projections),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(doc))
        fh.write("\n")
    return artifact


def read_artifact(path) -> ProjectionArtifact:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON ({exc.msg})") from exc
    for key in ("version", "corpus_name", "checksum", "projections"):
        if key not in doc:
            raise FormatError(f"{path}: missing field {key!r}")
    actual = payload_digest(doc["projections"])
    if actual != doc["checksum"]:
        raise IntegrityError(
            f"{path}: projection payload digest mismatch: "
            f"expected {doc['checksum']}, actual {actual}"
        )
    projections = []
    for recno, rec in enumerate(doc["projections"], start=1):
        try:
            projections.append(
                LabelProjection(
                    sentence_id=rec["sentence_id"],
                    start=tuple(rec["start"]),
                    end=tuple(rec["end"]),
                    inside=tuple(rec["inside"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}: projection record {recno}: {exc}") from None
    return ProjectionArtifact(
        version=doc["version"],
        corpus_name=doc["corpus_name"],
        projections=tuple(projections),
        checksum=doc["checksum"],
    )
