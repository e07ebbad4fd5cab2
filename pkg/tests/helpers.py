"""Shared fixture-building helpers for the test suite."""

from ndlm.corpus import Corpus, Document, Query, Vocabulary, build_vocabulary


def corpus_of(doc_tokens: dict[str, list[str]]) -> Corpus:
    """Build a Corpus in memory, independently of the file loader."""
    vocab = build_vocabulary(doc_tokens.values())
    total = [0] * len(vocab)
    documents = {}
    for doc_id, tokens in doc_tokens.items():
        counts: dict[int, int] = {}
        for tok in tokens:
            tid = vocab.index[tok]
            counts[tid] = counts.get(tid, 0) + 1
            total[tid] += 1
        documents[doc_id] = Document(id=doc_id, tokens=tuple(tokens), counts=counts)
    return Corpus(documents=documents, vocabulary=vocab, total_counts=total)


def query_of(tokens, vocab: Vocabulary, qid: str = "q") -> Query:
    """Build a Query against a vocabulary, dropping OOV tokens from counts."""
    counts: dict[int, int] = {}
    kept = 0
    for tok in tokens:
        tid = vocab.index.get(tok)
        if tid is None:
            continue
        counts[tid] = counts.get(tid, 0) + 1
        kept += 1
    return Query(id=qid, tokens=tuple(tokens), counts=counts, length=kept)
