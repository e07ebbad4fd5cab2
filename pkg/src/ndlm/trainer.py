"""Training loop for the generator: three objectives, negative sampling,
SGD/Adam updates, and a finite-difference gradient checker.

Determinism contract: (data, config, seed) fully determine the trained
parameters. Sampling runs on a single SplitMix64 stream and updates are
strictly sequential, so reruns are bit-identical.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .corpus import Corpus, Query, RelevanceJudgments
from .encoder import EmbeddingStore
from .generator import (
    GeneratorParams,
    Gradient,
    cross_entropy_from_logits,
    forward_logits,
    grad_ce_logits,
    init_params,
    logsumexp,
)
from .prng import SplitMix64
from .unigram import query_lm

logger = logging.getLogger(__name__)

OBJECTIVES = ("direct", "pairwise", "triplewise")
OPTIMIZERS = ("sgd", "adam")
INIT_SCHEMES = ("zero", "gaussian")


@dataclass(frozen=True)
class TrainConfig:
    objective: str
    epochs: int
    seed: int = 0
    learning_rate: float = 1e-3
    negatives_per_positive: int = 1
    margin: float = 1.0
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    init: str = "zero"

    def validate(self) -> None:
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.init not in INIT_SCHEMES:
            raise ValueError(f"unknown init scheme {self.init!r}")
        if self.objective == "pairwise" and self.negatives_per_positive < 1:
            raise ValueError("pairwise training needs negatives_per_positive >= 1")
        if self.objective == "triplewise" and self.negatives_per_positive < 2:
            raise ValueError("triplewise training needs negatives_per_positive >= 2")


@dataclass(frozen=True)
class TrainingInstance:
    query: Query
    positive: str
    negatives: tuple[str, ...]


@dataclass(frozen=True)
class TrainReport:
    loss_history: list[float]
    final_params: GeneratorParams
    seed: int
    config: TrainConfig = field(repr=False)


def loss_direct(
    theta: GeneratorParams, query: Query, pos_embedding: np.ndarray
) -> tuple[float, Gradient]:
    """Cross entropy between the query LM and the generated LM of a
    relevant document."""
    p_q = query_lm(query, theta.vocab_size)
    z = forward_logits(theta, pos_embedding)
    loss = cross_entropy_from_logits(p_q, z)
    dz = grad_ce_logits(p_q, z)
    return loss, Gradient(dW=np.outer(dz, pos_embedding), db=dz)


def loss_pairwise(
    theta: GeneratorParams,
    query: Query,
    pos_embedding: np.ndarray,
    neg_embedding: np.ndarray,
    margin: float = 1.0,
) -> tuple[float, Gradient]:
    """Hinge on the cross-entropy gap: max(0, margin + H_pos - H_neg).

    The subgradient on the inactive side (loss 0, including the kink
    itself) is zero, so satisfied pairs produce no update.
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    p_q = query_lm(query, theta.vocab_size)
    z_pos = forward_logits(theta, pos_embedding)
    z_neg = forward_logits(theta, neg_embedding)
    h_pos = cross_entropy_from_logits(p_q, z_pos)
    h_neg = cross_entropy_from_logits(p_q, z_neg)
    raw = margin + h_pos - h_neg
    if raw <= 0.0:
        shape = (theta.vocab_size, theta.dim)
        return 0.0, Gradient(dW=np.zeros(shape), db=np.zeros(theta.vocab_size))
    dz_pos = grad_ce_logits(p_q, z_pos)
    dz_neg = grad_ce_logits(p_q, z_neg)
    dW = np.outer(dz_pos, pos_embedding) - np.outer(dz_neg, neg_embedding)
    return raw, Gradient(dW=dW, db=dz_pos - dz_neg)


def loss_triplewise(
    theta: GeneratorParams,
    query: Query,
    pos_embedding: np.ndarray,
    neg_embeddings,
) -> tuple[float, Gradient]:
    """Negative log of the softmax over (-H_pos, -H_neg1, -H_neg2): the
    positive must win the three-way preference."""
    if len(neg_embeddings) != 2:
        raise ValueError(
            f"triplewise loss needs exactly two negatives, got {len(neg_embeddings)}"
        )
    p_q = query_lm(query, theta.vocab_size)
    embeds = [pos_embedding, neg_embeddings[0], neg_embeddings[1]]
    logits = [forward_logits(theta, e) for e in embeds]
    scores = np.array(
        [-cross_entropy_from_logits(p_q, z) for z in logits], dtype=np.float64
    )
    lse = logsumexp(scores)
    loss = lse - scores[0]
    p = np.exp(scores - lse)
    dW = np.zeros((theta.vocab_size, theta.dim))
    db = np.zeros(theta.vocab_size)
    for m in range(3):
        coeff = (1.0 if m == 0 else 0.0) - p[m]
        dz = coeff * grad_ce_logits(p_q, logits[m])
        dW += np.outer(dz, embeds[m])
        db += dz
    return float(loss), Gradient(dW=dW, db=db)


def _negatives_needed(config: TrainConfig) -> int:
    if config.objective == "direct":
        return 0
    return config.negatives_per_positive


def _training_pairs(
    queries, qrels: RelevanceJudgments, corpus: Corpus, n_negatives: int
) -> list[tuple[Query, str, list[str]]]:
    """Sorted (query, positive) pairs with each query's non-relevant pool.

    Validates relevant docs against the corpus and pool sizes up front.
    """
    by_id = {q.id: q for q in queries}
    all_ids = corpus.doc_ids()
    pairs = []
    for qid in sorted(qrels.relevant):
        query = by_id.get(qid)
        if query is None:
            continue
        if query.length == 0:
            raise ValueError(f"query {qid!r} has no in-vocabulary tokens")
        relevant = qrels.relevant[qid]
        for did in sorted(relevant):
            if did not in corpus.documents:
                raise ValueError(
                    f"query {qid!r}: relevant doc {did!r} not in corpus"
                )
        pool = [d for d in all_ids if d not in relevant]
        if len(pool) < n_negatives:
            raise ValueError(
                f"query {qid!r}: only {len(pool)} non-relevant docs, "
                f"need {n_negatives}"
            )
        for did in sorted(relevant):
            pairs.append((query, did, pool))
    return pairs


def sample_instances(
    seed: int,
    queries,
    qrels: RelevanceJudgments,
    corpus: Corpus,
    config: TrainConfig,
) -> Iterator[TrainingInstance]:
    """Instance stream over all epochs; one PRNG stream end to end."""
    config.validate()
    n_neg = _negatives_needed(config)
    pairs = _training_pairs(queries, qrels, corpus, n_neg)
    rng = SplitMix64(seed)
    for _ in range(config.epochs):
        for query, positive, pool in pairs:
            if n_neg:
                negatives = tuple(rng.sample_without_replacement(pool, n_neg))
            else:
                negatives = ()
            yield TrainingInstance(query=query, positive=positive, negatives=negatives)


class _Adam:
    def __init__(self, shape, lr, beta1, beta2, eps):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    def step(self, param: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        self.m = self.b1 * self.m + (1.0 - self.b1) * grad
        self.v = self.b2 * self.v + (1.0 - self.b2) * grad * grad
        m_hat = self.m / (1.0 - self.b1**self.t)
        v_hat = self.v / (1.0 - self.b2**self.t)
        param -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _instance_updates(theta, instance, embeddings, config):
    """Yield (loss, Gradient) updates an instance contributes."""
    e_pos = embeddings.get(instance.positive)
    if config.objective == "direct":
        yield loss_direct(theta, instance.query, e_pos)
    elif config.objective == "pairwise":
        for neg in instance.negatives:
            yield loss_pairwise(
                theta, instance.query, e_pos, embeddings.get(neg), config.margin
            )
    else:
        e_negs = [embeddings.get(d) for d in instance.negatives[:2]]
        yield loss_triplewise(theta, instance.query, e_pos, e_negs)


def train(
    corpus: Corpus,
    embeddings: EmbeddingStore,
    queries,
    qrels: RelevanceJudgments,
    config: TrainConfig,
) -> TrainReport:
    config.validate()
    for did in corpus.doc_ids():
        if did not in embeddings:
            raise ValueError(f"no embedding for corpus doc {did!r}")

    vocab_size = len(corpus.vocabulary)
    theta = init_params(vocab_size, embeddings.dim, scheme=config.init, seed=config.seed)
    W, b = theta.W, theta.b

    n_neg = _negatives_needed(config)
    pairs = _training_pairs(queries, qrels, corpus, n_neg)
    if not pairs:
        raise ValueError("no training instances: no loaded query has relevant docs")
    rng = SplitMix64(config.seed)

    if config.optimizer == "adam":
        opt_W = _Adam(W.shape, config.learning_rate, config.beta1, config.beta2, config.epsilon)
        opt_b = _Adam(b.shape, config.learning_rate, config.beta1, config.beta2, config.epsilon)

    loss_history: list[float] = []
    step = 0
    for _ in range(config.epochs):
        epoch_losses: list[float] = []
        for query, positive, pool in pairs:
            if n_neg:
                negatives = tuple(rng.sample_without_replacement(pool, n_neg))
            else:
                negatives = ()
            instance = TrainingInstance(query=query, positive=positive, negatives=negatives)
            for loss, grad in _instance_updates(theta, instance, embeddings, config):
                step += 1
                if not math.isfinite(loss):
                    raise RuntimeError(f"non-finite loss at update step {step}")
                if config.optimizer == "sgd":
                    W -= config.learning_rate * grad.dW
                    b -= config.learning_rate * grad.db
                else:
                    opt_W.step(W, grad.dW)
                    opt_b.step(b, grad.db)
                epoch_losses.append(loss)
        loss_history.append(math.fsum(epoch_losses) / len(epoch_losses))

    if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
        raise RuntimeError(f"non-finite parameters after update step {step}")
    return TrainReport(
        loss_history=loss_history,
        final_params=GeneratorParams(W=W, b=b),
        seed=config.seed,
        config=config,
    )


def _objective_loss(objective, theta, query, pos_embedding, neg_embeddings, margin):
    if objective == "direct":
        return loss_direct(theta, query, pos_embedding)
    if objective == "pairwise":
        if not neg_embeddings:
            raise ValueError("pairwise objective needs a negative embedding")
        return loss_pairwise(theta, query, pos_embedding, neg_embeddings[0], margin)
    if objective == "triplewise":
        return loss_triplewise(theta, query, pos_embedding, list(neg_embeddings)[:2])
    raise ValueError(f"unknown objective {objective!r}")


def gradient_check(
    objective: str,
    theta: GeneratorParams,
    query: Query,
    pos_embedding: np.ndarray,
    neg_embeddings=(),
    margin: float = 1.0,
    step: float = 1e-5,
    max_coords: int = 200,
    seed: int = 0,
) -> float:
    """Max relative error between the analytic gradient and central finite
    differences, over all parameter coordinates (or a seeded sample of
    max_coords for large parameter sets)."""
    if step <= 0:
        raise ValueError("step must be > 0")
    _, grad = _objective_loss(objective, theta, query, pos_embedding, neg_embeddings, margin)

    n_w = theta.W.size
    n_total = n_w + theta.b.size
    coords = list(range(n_total))
    if n_total > max_coords:
        coords = sorted(SplitMix64(seed).sample_without_replacement(coords, max_coords))

    flat_analytic = np.concatenate([grad.dW.ravel(), grad.db])
    max_rel = 0.0
    for c in coords:
        for sign in (+1.0, -1.0):
            W = theta.W.copy()
            b = theta.b.copy()
            if c < n_w:
                W.ravel()[c] += sign * step
            else:
                b[c - n_w] += sign * step
            perturbed = GeneratorParams(W=W, b=b)
            loss, _ = _objective_loss(
                objective, perturbed, query, pos_embedding, neg_embeddings, margin
            )
            if sign > 0:
                f_plus = loss
            else:
                f_minus = loss
        fd = (f_plus - f_minus) / (2.0 * step)
        a = float(flat_analytic[c])
        rel = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
        max_rel = max(max_rel, rel)
    return max_rel
