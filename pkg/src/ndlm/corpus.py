"""Corpus ingestion: documents, queries, relevance judgments, vocabulary.

File formats are line oriented and UTF-8:

* corpus / query files: one ``<id>\\t<token token ...>`` line per item
* qrels: TREC four-column ``<query_id> <iter> <doc_id> <rel>`` with rel in {0,1}
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace. No punctuation handling."""
    return text.lower().split()


@dataclass(frozen=True)
class Vocabulary:
    """Distinct terms in byte-wise lexicographic order, ids in [0, |V|)."""

    terms: tuple[str, ...]
    index: dict[str, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[str, ...]
    counts: dict[int, int]


@dataclass(frozen=True)
class Query:
    id: str
    tokens: tuple[str, ...]
    counts: dict[int, int]
    length: int


@dataclass(frozen=True)
class Corpus:
    documents: dict[str, Document]
    vocabulary: Vocabulary
    total_counts: list[int]

    def doc_ids(self) -> list[str]:
        return sorted(self.documents)


@dataclass(frozen=True)
class RelevanceJudgments:
    relevant: dict[str, set[str]]


def build_vocabulary(token_lists) -> Vocabulary:
    """Sorted distinct tokens across all lists; fails on an empty union.

    Sorting Python strings orders them by code point, which coincides with
    byte-wise lexicographic order of their UTF-8 encodings.
    """
    distinct = set()
    for tokens in token_lists:
        distinct.update(tokens)
    if not distinct:
        raise ValueError("empty vocabulary")
    terms = tuple(sorted(distinct))
    return Vocabulary(terms=terms, index={t: i for i, t in enumerate(terms)})


def _count_in_vocab(tokens, vocab: Vocabulary) -> tuple[dict[int, int], int]:
    """(sparse term-id counts, number of in-vocabulary tokens)."""
    counts: dict[int, int] = {}
    kept = 0
    for tok in tokens:
        tid = vocab.index.get(tok)
        if tid is None:
            continue
        counts[tid] = counts.get(tid, 0) + 1
        kept += 1
    return counts, kept


def _parse_id_line(line: str, path: str, lineno: int) -> tuple[str, list[str]]:
    if "\t" not in line:
        raise ValueError(f"{path}:{lineno}: expected '<id>\\t<tokens>', no tab found")
    item_id, text = line.split("\t", 1)
    if not item_id:
        raise ValueError(f"{path}:{lineno}: empty id")
    return item_id, tokenize(text)


def load_corpus(path: str) -> Corpus:
    """Read a corpus file and build vocabulary plus corpus-wide term counts."""
    raw: list[tuple[str, list[str]]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            doc_id, tokens = _parse_id_line(line, path, lineno)
            if doc_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate doc id {doc_id!r}")
            seen.add(doc_id)
            raw.append((doc_id, tokens))

    vocab = build_vocabulary(tokens for _, tokens in raw)
    total = [0] * len(vocab)
    documents: dict[str, Document] = {}
    for doc_id, tokens in raw:
        counts, _ = _count_in_vocab(tokens, vocab)
        for tid, c in counts.items():
            total[tid] += c
        documents[doc_id] = Document(id=doc_id, tokens=tuple(tokens), counts=counts)
    return Corpus(documents=documents, vocabulary=vocab, total_counts=total)


def save_corpus(corpus: Corpus, path: str) -> None:
    """Write documents sorted by id, one `<id>\\t<tokens>` line each."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc_id in corpus.doc_ids():
            fh.write(f"{doc_id}\t{' '.join(corpus.documents[doc_id].tokens)}\n")


def load_queries(path: str, vocab: Vocabulary) -> list[Query]:
    """Read queries in corpus line format; out-of-vocabulary tokens are
    dropped from the counts with a warning (they never enter the score)."""
    queries: list[Query] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            query_id, tokens = _parse_id_line(line, path, lineno)
            if query_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate query id {query_id!r}")
            seen.add(query_id)
            counts, kept = _count_in_vocab(tokens, vocab)
            dropped = len(tokens) - kept
            if dropped:
                logger.warning(
                    "query %s: dropped %d out-of-vocabulary token(s)",
                    query_id,
                    dropped,
                )
            queries.append(
                Query(id=query_id, tokens=tuple(tokens), counts=counts, length=kept)
            )
    return queries


def load_qrels(path: str) -> RelevanceJudgments:
    """TREC qrels; only rel=1 lines enter the relevant sets."""
    relevant: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            fields = stripped.split()
            if len(fields) != 4:
                raise ValueError(
                    f"{path}:{lineno}: expected 4 fields "
                    f"'<query_id> <iter> <doc_id> <rel>', got {len(fields)}"
                )
            query_id, _, doc_id, rel = fields
            if rel not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: relevance must be 0 or 1, got {rel!r}")
            if rel == "1":
                relevant.setdefault(query_id, set()).add(doc_id)
    return RelevanceJudgments(relevant=relevant)
