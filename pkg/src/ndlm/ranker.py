"""Interpolated document LM and ranking, plus cosine baselines.

The final per-document model mixes three components:

    alpha * background + beta * document MLE + gamma * generated LM

alpha must be strictly positive so the mixture never assigns zero to a
vocabulary term; the document MLE stays raw. With gamma = 0 the mixture
collapses to Jelinek-Mercer smoothing with lambda = alpha, computed so the
reduction is bit-exact, and neither embeddings nor generator parameters are
touched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .corpus import Corpus, Document, Query
from .encoder import EmbeddingStore
from .generator import GeneratorParams, forward_lm
from .unigram import UnigramLM, background_lm, log_query_likelihood, mle_lm

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class InterpolationWeights:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha!r}")
        if self.beta < 0 or self.gamma < 0:
            raise ValueError("beta and gamma must be >= 0")
        total = self.alpha + self.beta + self.gamma
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")


DEFAULT_WEIGHTS = InterpolationWeights(alpha=0.3, beta=0.3, gamma=0.4)


@dataclass(frozen=True)
class RankedList:
    query_id: str
    entries: list[tuple[str, float]]

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]


def interpolated_lm(
    p_bg: UnigramLM,
    p_doc_mle: UnigramLM,
    p_enhanced: UnigramLM | None,
    weights: InterpolationWeights,
) -> UnigramLM:
    """Three-way mixture; p_enhanced may be omitted only when gamma = 0."""
    if len(p_bg) != len(p_doc_mle):
        raise ValueError("models cover different vocabularies")
    mixed = weights.alpha * p_bg.probs + weights.beta * p_doc_mle.probs
    if weights.gamma != 0.0:
        if p_enhanced is None:
            raise ValueError("gamma > 0 requires the generated component model")
        if len(p_enhanced) != len(p_bg):
            raise ValueError("models cover different vocabularies")
        mixed = mixed + weights.gamma * p_enhanced.probs
    return UnigramLM(mixed)


class InterpolatedScorer:
    """Scores queries against cached per-document interpolated models.

    The mixture is query independent, so each document's model is built
    once and reused across queries.
    """

    def __init__(
        self,
        corpus: Corpus,
        weights: InterpolationWeights,
        theta: GeneratorParams | None = None,
        embeddings: EmbeddingStore | None = None,
    ):
        if weights.gamma != 0.0:
            if theta is None or embeddings is None:
                raise ValueError(
                    "gamma > 0 requires generator parameters and embeddings"
                )
            if theta.vocab_size != len(corpus.vocabulary):
                raise ValueError(
                    f"checkpoint vocab size {theta.vocab_size} does not match "
                    f"corpus vocabulary size {len(corpus.vocabulary)}"
                )
        self._corpus = corpus
        self._weights = weights
        self._theta = theta
        self._embeddings = embeddings
        self._p_bg = background_lm(corpus)
        self._cache: dict[str, UnigramLM] = {}

    def lm_for(self, doc_id: str) -> UnigramLM:
        lm = self._cache.get(doc_id)
        if lm is None:
            doc = self._corpus.documents[doc_id]
            p_mle = mle_lm(doc.counts, len(self._corpus.vocabulary))
            p_enh = None
            if self._weights.gamma != 0.0:
                p_enh = forward_lm(self._theta, self._embeddings.get(doc_id))
            lm = interpolated_lm(self._p_bg, p_mle, p_enh, self._weights)
            self._cache[doc_id] = lm
        return lm

    def __call__(self, query: Query, doc: Document) -> float:
        return log_query_likelihood(query, self.lm_for(doc.id))


def score_document(
    query: Query,
    doc: Document,
    corpus: Corpus,
    weights: InterpolationWeights,
    theta: GeneratorParams | None = None,
    embeddings: EmbeddingStore | None = None,
) -> float:
    """One-shot scoring; use InterpolatedScorer when ranking whole corpora."""
    p_bg = background_lm(corpus)
    p_mle = mle_lm(doc.counts, len(corpus.vocabulary))
    p_enh = None
    if weights.gamma != 0.0:
        if theta is None or embeddings is None:
            raise ValueError("gamma > 0 requires generator parameters and embeddings")
        p_enh = forward_lm(theta, embeddings.get(doc.id))
    return log_query_likelihood(query, interpolated_lm(p_bg, p_mle, p_enh, weights))


def _sorted_entries(entries: list[tuple[str, float]]) -> list[tuple[str, float]]:
    for doc_id, score in entries:
        if math.isnan(score):
            raise ValueError(f"NaN score for doc {doc_id!r}")
    return sorted(entries, key=lambda item: (-item[1], item[0]))


def rank(
    query: Query, corpus: Corpus, scorer: Callable[[Query, Document], float]
) -> RankedList:
    """Score every document; sort score-descending, ties by ascending id.

    -inf scores are legal and end up last, ordered among themselves by id.
    """
    entries = [
        (doc_id, scorer(query, corpus.documents[doc_id]))
        for doc_id in corpus.doc_ids()
    ]
    return RankedList(query_id=query.id, entries=_sorted_entries(entries))


def _cosine_sparse(a: dict[int, int], b: dict[int, int]) -> float:
    if not a or not b:
        return 0.0
    dot = sum(c * b[t] for t, c in a.items() if t in b)
    norm_a = math.sqrt(sum(c * c for c in a.values()))
    norm_b = math.sqrt(sum(c * c for c in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def vsm_rank(query: Query, corpus: Corpus) -> RankedList:
    """Cosine between raw term-frequency vectors."""
    entries = [
        (doc_id, _cosine_sparse(query.counts, corpus.documents[doc_id].counts))
        for doc_id in corpus.doc_ids()
    ]
    return RankedList(query_id=query.id, entries=_sorted_entries(entries))


def embedding_rank(
    query_id: str, query_embedding: np.ndarray, store: EmbeddingStore
) -> RankedList:
    """Cosine between the query embedding and every stored doc vector."""
    q = np.asarray(query_embedding, dtype=np.float64)
    if q.shape != (store.dim,):
        raise ValueError(
            f"query embedding has shape {q.shape}, store dimension is {store.dim}"
        )
    q_norm = float(np.linalg.norm(q))
    entries = []
    for doc_id in sorted(store.vectors):
        vec = store.vectors[doc_id]
        d_norm = float(np.linalg.norm(vec))
        if q_norm == 0.0 or d_norm == 0.0:
            score = 0.0
        else:
            score = float(np.dot(q, vec) / (q_norm * d_norm))
        entries.append((doc_id, score))
    return RankedList(query_id=query_id, entries=_sorted_entries(entries))
