"""Feature extraction: NP chunk tags and dependency heads per sentence.

Sources, in order of preference:

1. A spaCy pipeline (when installed and its model is available): noun
   chunks give the inside/outside-NP tags, the parser gives heads.
2. The corpus itself, when its tokens carry upos and head fields: NP
   tags fall back to a POS-run rule (determiner/adjective/noun runs
   ending in a noun).
3. Nothing: all-zero tags and null heads; these sentences are counted
   and reported, never silently invented.
"""

from dataclasses import dataclass, field

from .corpus_io import SimpleSentence

_NP_POS = {"DET", "ADJ", "NOUN", "PROPN", "NUM"}
_NP_HEAD = {"NOUN", "PROPN"}


@dataclass
class ExtractionReport:
    via_pipeline: int = 0
    via_corpus: int = 0
    null_heads: int = 0
    failures: list = field(default_factory=list)  # (sentence_id, message)


def _load_spacy(model: str):
    try:
        import spacy
    except ImportError:
        return None
    try:
        return spacy.load(model, exclude=["lemmatizer", "ner"])
    except Exception:
        return None


def _np_tags_from_upos(sentence: SimpleSentence) -> list[int]:
    n = len(sentence)
    inside = [0] * n
    i = 0
    while i < n:
        if sentence.tokens[i].upos in _NP_POS:
            j = i
            while j + 1 < n and sentence.tokens[j + 1].upos in _NP_POS:
                j += 1
            if sentence.tokens[j].upos in _NP_HEAD:
                for k in range(i, j + 1):
                    inside[k] = 1
            i = j + 1
        else:
            i += 1
    return inside


def _from_spacy(nlp, sentence: SimpleSentence):
    from spacy.tokens import Doc

    doc = Doc(nlp.vocab, words=[t.surface for t in sentence.tokens])
    for _, component in nlp.pipeline:
        doc = component(doc)
    inside = [0] * len(sentence)
    for chunk in doc.noun_chunks:
        for i in range(chunk.start, chunk.end):
            inside[i] = 1
    heads = []
    for tok in doc:
        heads.append(None if tok.head.i == tok.i else tok.head.i)
    return inside, heads


def extract_features(sentences, spacy_model: str = "en_core_web_sm"):
    """Yield (sentence_id, inside_np, dep_heads) for every sentence.

    Returns (records, report). Sentences the pipeline cannot handle are
    emitted with null heads and recorded in the report.
    """
    nlp = _load_spacy(spacy_model)
    records = []
    report = ExtractionReport()
    for sent in sentences:
        if nlp is not None:
            try:
                inside, heads = _from_spacy(nlp, sent)
                records.append((sent.id, inside, heads))
                report.via_pipeline += 1
                continue
            except Exception as exc:
                report.failures.append((sent.id, str(exc)))
        if all(t.upos is not None for t in sent.tokens):
            inside = _np_tags_from_upos(sent)
            heads = [t.head for t in sent.tokens]
            records.append((sent.id, inside, heads))
            report.via_corpus += 1
        else:
            records.append((sent.id, [0] * len(sent), [None] * len(sent)))
            report.null_heads += 1
            if nlp is None:
                report.failures.append((sent.id, "no pipeline and no corpus upos"))
    return records, report


def capped_distance_rows(dep_heads, cap: int = 5) -> list[list[int]]:
    """All-pairs shortest path lengths over head links, capped; plain BFS."""
    n = len(dep_heads)
    adj = [[] for _ in range(n)]
    for i, h in enumerate(dep_heads):
        if h is not None and 0 <= h < n:
            adj[i].append(h)
            adj[h].append(i)
    rows = []
    for src in range(n):
        dist = [cap] * n
        dist[src] = 0
        frontier = [src]
        d = 0
        seen = {src}
        while frontier and d < cap:
            d += 1
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        dist[v] = min(d, cap)
                        nxt.append(v)
            frontier = nxt
        rows.append(dist)
    return rows


def mean_distance_buckets(dep_heads, cap: int = 5) -> list[int]:
    """Per-token bucket: mean capped distance to other tokens, rounded."""
    n = len(dep_heads)
    if n < 2:
        return [0] * n
    rows = capped_distance_rows(dep_heads, cap)
    buckets = []
    for i in range(n):
        mean = (sum(rows[i]) - rows[i][i]) / (n - 1)
        buckets.append(min(cap, max(0, round(mean))))
    return buckets
