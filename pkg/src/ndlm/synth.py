"""Synthetic topic-clustered retrieval collections for hermetic experiments.

Each topic owns a disjoint 50-term vocabulary; a 20-term pool is shared by
all topics. Documents draw tokens 80% from their topic, 20% from the pool;
queries draw 5-15 tokens the same way. All documents sharing a query's
topic are marked relevant. Everything is driven by one SplitMix64 stream,
so a seed pins the output files byte for byte.
"""

from __future__ import annotations

from .prng import SplitMix64

TOPIC_TERMS = 50
SHARED_TERMS = 20
TOPIC_TOKEN_PROB = 0.8
DOC_LEN_MIN, DOC_LEN_MAX = 60, 120
QUERY_LEN_MIN, QUERY_LEN_MAX = 5, 15


def _ids(prefix: str, n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def _draw_tokens(rng: SplitMix64, topic_terms: list[str], shared: list[str], length: int):
    tokens = []
    for _ in range(length):
        if rng.next_unit() < TOPIC_TOKEN_PROB:
            tokens.append(topic_terms[rng.randbelow(len(topic_terms))])
        else:
            tokens.append(shared[rng.randbelow(len(shared))])
    return tokens


def generate(
    seed: int, n_docs: int, n_queries: int, n_topics: int
) -> tuple[list[str], list[str], list[str]]:
    """Returns (corpus lines, query lines, qrel lines), without newlines.

    Topics are assigned round-robin, so n_docs >= n_topics guarantees every
    query at least one relevant document.
    """
    if min(n_docs, n_queries, n_topics) < 1:
        raise ValueError("doc, query, and topic counts must all be >= 1")
    if n_docs < n_topics:
        raise ValueError(
            f"need at least one doc per topic: {n_docs} docs < {n_topics} topics"
        )

    topic_vocab = [
        [f"t{t:02d}w{i:02d}" for i in range(TOPIC_TERMS)] for t in range(n_topics)
    ]
    shared = [f"shared{i:02d}" for i in range(SHARED_TERMS)]
    doc_ids = _ids("d", n_docs)
    query_ids = _ids("q", n_queries)

    rng = SplitMix64(seed)
    corpus_lines = []
    for i, doc_id in enumerate(doc_ids):
        length = DOC_LEN_MIN + rng.randbelow(DOC_LEN_MAX - DOC_LEN_MIN + 1)
        tokens = _draw_tokens(rng, topic_vocab[i % n_topics], shared, length)
        corpus_lines.append(f"{doc_id}\t{' '.join(tokens)}")

    query_lines = []
    qrel_lines = []
    for j, query_id in enumerate(query_ids):
        topic = j % n_topics
        length = QUERY_LEN_MIN + rng.randbelow(QUERY_LEN_MAX - QUERY_LEN_MIN + 1)
        tokens = _draw_tokens(rng, topic_vocab[topic], shared, length)
        query_lines.append(f"{query_id}\t{' '.join(tokens)}")
        for i, doc_id in enumerate(doc_ids):
            if i % n_topics == topic:
                qrel_lines.append(f"{query_id} 0 {doc_id} 1")

    return corpus_lines, query_lines, qrel_lines


def write_collection(
    seed: int,
    n_docs: int,
    n_queries: int,
    n_topics: int,
    corpus_path: str,
    queries_path: str,
    qrels_path: str,
) -> None:
    corpus_lines, query_lines, qrel_lines = generate(seed, n_docs, n_queries, n_topics)
    for path, lines in (
        (corpus_path, corpus_lines),
        (queries_path, query_lines),
        (qrels_path, qrel_lines),
    ):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
