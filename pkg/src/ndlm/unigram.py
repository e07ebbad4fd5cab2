"""Unigram language models and query-likelihood scoring primitives.

All probabilities live in dense float64 vectors indexed by vocabulary id.
Natural logarithms throughout. Scores of -inf (a query term the model
cannot generate) are legal values, not errors: they rank last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Query

_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class UnigramLM:
    """A probability distribution over the vocabulary.

    Entries must be non-negative and sum to 1 within 1e-9; violations are
    rejected at construction so downstream code never sees a broken model.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", p)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probability vector must be 1-d and non-empty")
        if not np.all(np.isfinite(p)):
            raise ValueError("probability vector has non-finite entries")
        if np.any(p < 0):
            raise ValueError("probability vector has negative entries")
        total = float(p.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def __len__(self) -> int:
        return int(self.probs.size)


def mle_lm(counts: dict[int, int], vocab_size: int) -> UnigramLM:
    """Maximum-likelihood model: counts normalized by their sum."""
    probs = np.zeros(vocab_size, dtype=np.float64)
    total = 0
    for tid, c in counts.items():
        if c < 0:
            raise ValueError("degenerate LM: negative count")
        probs[tid] = c
        total += c
    if total <= 0:
        raise ValueError("degenerate LM: no observed tokens")
    probs /= total
    return UnigramLM(probs)


def background_lm(corpus: Corpus) -> UnigramLM:
    """Corpus-wide term distribution, strictly positive on the vocabulary
    (every vocabulary term occurs in some document by construction)."""
    counts = np.asarray(corpus.total_counts, dtype=np.float64)
    return UnigramLM(counts / counts.sum())


def smooth_jm(p_doc: UnigramLM, p_bg: UnigramLM, lam: float) -> UnigramLM:
    """Jelinek-Mercer smoothing: (1 - lam) * doc + lam * background."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"smoothing weight must lie in [0, 1], got {lam!r}")
    if len(p_doc) != len(p_bg):
        raise ValueError("models cover different vocabularies")
    return UnigramLM((1.0 - lam) * p_doc.probs + lam * p_bg.probs)


def query_lm(query: Query, vocab_size: int) -> UnigramLM:
    """MLE distribution of the query's in-vocabulary tokens."""
    if query.length == 0:
        raise ValueError("empty query after OOV filtering")
    return mle_lm(query.counts, vocab_size)


def log_query_likelihood(query: Query, lm: UnigramLM) -> float:
    """Sum of c(w,Q) * log lm[w]; -inf when the model misses a query term.

    An empty query scores 0 against every model (empty product).
    """
    probs = lm.probs
    total = 0.0
    for tid in sorted(query.counts):
        p = float(probs[tid])
        if p == 0.0:
            return float("-inf")
        total += query.counts[tid] * math.log(p)
    return total


def cross_entropy(p: UnigramLM, q: UnigramLM) -> float:
    """H(P || Q) = -sum p[t] log q[t], with 0 log 0 = 0; +inf when Q lacks
    mass on P's support."""
    if len(p) != len(q):
        raise ValueError("models cover different vocabularies")
    support = p.probs > 0
    qs = q.probs[support]
    if np.any(qs == 0.0):
        return float("inf")
    return float(-np.dot(p.probs[support], np.log(qs)))
