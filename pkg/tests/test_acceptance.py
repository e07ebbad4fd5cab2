"""Acceptance gate: one test per shipping criterion.

Each test prints one `ACCEPTANCE <name>: PASS` or `... : FAIL` line (visible
under `pytest -s`). The end-to-end chain runs once per session on a synthetic
topic-clustered collection and is shared by the criteria that inspect it.
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from helpers import corpus_of, query_of
from ndlm.cli import entrypoint
from ndlm.encoder import EmbeddingStore, load_embeddings
from ndlm.evaluator import average_precision
from ndlm.generator import (
    GeneratorParams,
    cross_entropy_from_logits,
    forward_lm,
    forward_logits,
    init_params,
    load_params,
)
from ndlm.corpus import load_corpus, load_queries
from ndlm.ranker import InterpolationWeights, interpolated_lm, score_document
from ndlm.trainer import gradient_check
from ndlm.unigram import (
    background_lm,
    cross_entropy,
    log_query_likelihood,
    mle_lm,
    query_lm,
    smooth_jm,
)


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {name}: FAIL")
        raise
    print(f"ACCEPTANCE {name}: PASS")


def read_map(report_path) -> float:
    last = report_path.read_text().splitlines()[-1]
    assert last.startswith("map ")
    return float(last.split(" ")[1])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """synth -> encode -> train -> rank -> eval, plus the gamma-0 contrast,
    on 200 docs / 20 queries / 4 topics with the 32-dim hash encoder."""
    root = tmp_path_factory.mktemp("accept")
    p = {name: root / name for name in (
        "corpus.tsv", "queries.tsv", "qrels.txt", "docs.emb", "gen.ckpt",
        "full.run", "full.eval", "flat.run", "flat.eval",
    )}
    start = time.perf_counter()
    steps = [
        ["synth", "--seed", "7", "--docs", "200", "--queries", "20",
         "--topics", "4", "--out-corpus", str(p["corpus.tsv"]),
         "--out-queries", str(p["queries.tsv"]),
         "--out-qrels", str(p["qrels.txt"])],
        ["encode", "--corpus", str(p["corpus.tsv"]), "--out",
         str(p["docs.emb"]), "--dim", "32", "--seed", "7"],
        ["train", "--corpus", str(p["corpus.tsv"]), "--queries",
         str(p["queries.tsv"]), "--qrels", str(p["qrels.txt"]),
         "--embeddings", str(p["docs.emb"]), "--checkpoint",
         str(p["gen.ckpt"]), "--objective", "pairwise", "--epochs", "50",
         "--seed", "7"],
        ["rank", "--corpus", str(p["corpus.tsv"]), "--queries",
         str(p["queries.tsv"]), "--run", str(p["full.run"]),
         "--checkpoint", str(p["gen.ckpt"]), "--embeddings",
         str(p["docs.emb"])],
        ["eval", "--run", str(p["full.run"]), "--qrels", str(p["qrels.txt"]),
         "--report", str(p["full.eval"])],
        ["rank", "--corpus", str(p["corpus.tsv"]), "--queries",
         str(p["queries.tsv"]), "--run", str(p["flat.run"]),
         "--alpha", "0.5", "--beta", "0.5", "--gamma", "0"],
        ["eval", "--run", str(p["flat.run"]), "--qrels", str(p["qrels.txt"]),
         "--report", str(p["flat.eval"])],
    ]
    for argv in steps:
        assert entrypoint(argv) == 0, argv[0]
    elapsed = time.perf_counter() - start
    return {
        "paths": p,
        "root": root,
        "elapsed": elapsed,
        "map": read_map(p["full.eval"]),
        "map_gamma0": read_map(p["flat.eval"]),
    }


def test_interpolated_scoring_matches_brute_force(long_budget=1.0):
    """Mixture scores recomputed from raw counts with pure-Python loops
    agree with the library for every (query, doc) pair."""
    with criterion("oracle_equivalence"):
        start = time.perf_counter()
        words = [f"w{i:02d}" for i in range(10)]
        rng = np.random.default_rng(50)
        docs = {}
        for i in range(5):
            length = int(rng.integers(8, 25))
            tokens = [words[j] for j in rng.integers(0, 10, length)]
            docs[f"d{i}"] = tokens
        docs["d0"] = docs["d0"] + words  # every term attested at least once
        corpus = corpus_of(docs)
        assert len(corpus.vocabulary) == 10
        dim = 4
        store = EmbeddingStore(
            dim=dim,
            vectors={d: rng.normal(size=dim) for d in corpus.doc_ids()},
        )
        theta = GeneratorParams(
            W=rng.normal(scale=0.7, size=(10, dim)),
            b=rng.normal(scale=0.7, size=10),
        )
        weights = InterpolationWeights(alpha=0.3, beta=0.3, gamma=0.4)
        queries = [
            query_of([words[0], words[3], words[3], words[9]], corpus.vocabulary, "q1"),
            query_of([words[5]], corpus.vocabulary, "q2"),
            query_of([words[2], words[4], words[6], words[8], words[2]], corpus.vocabulary, "q3"),
            query_of(list(words), corpus.vocabulary, "q4"),
        ]
        total_tokens = sum(corpus.total_counts)
        checked = 0
        for q in queries:
            for doc_id, doc in corpus.documents.items():
                e = store.get(doc_id)
                z = [
                    sum(theta.W[t][j] * e[j] for j in range(dim)) + theta.b[t]
                    for t in range(10)
                ]
                mz = max(z)
                exps = [math.exp(v - mz) for v in z]
                denom = sum(exps)
                expected = 0.0
                for tid in sorted(q.counts):
                    p = (
                        weights.alpha * (corpus.total_counts[tid] / total_tokens)
                        + weights.beta * (doc.counts.get(tid, 0) / len(doc.tokens))
                        + weights.gamma * (exps[tid] / denom)
                    )
                    expected += q.counts[tid] * math.log(p)
                got = score_document(q, doc, corpus, weights, theta, store)
                assert abs(got - expected) <= 1e-12, (q.id, doc_id)
                checked += 1
        assert checked == 20
        assert time.perf_counter() - start < long_budget


def test_query_model_cross_entropy_is_mean_negative_log_likelihood():
    """H(query model, doc model) times query length equals the negated
    log-likelihood score, for 100 seeded random pairs."""
    with criterion("cross_entropy_identity"):
        rng = np.random.default_rng(51)
        words = [f"w{i:02d}" for i in range(8)]
        vocab = corpus_of({"d": words}).vocabulary
        finite_pairs = 0
        for trial in range(100):
            probs = rng.random(8) + 0.01
            probs /= probs.sum()
            if trial % 10 == 9:
                # force one query term to probability zero: both views of
                # the score must then be infinite together.
                probs[0] = 0.0
                probs /= probs.sum()
            from ndlm.unigram import UnigramLM

            lm = UnigramLM(probs)
            n_tokens = int(rng.integers(1, 12))
            tokens = [words[j] for j in rng.integers(0, 8, n_tokens)]
            if trial % 10 == 9:
                tokens[0] = words[0]
            q = query_of(tokens, vocab, f"q{trial}")
            lql = log_query_likelihood(q, lm)
            ce = cross_entropy(query_lm(q, 8), lm)
            if math.isfinite(lql):
                assert abs(ce - (-lql / q.length)) <= 1e-12
                finite_pairs += 1
            else:
                assert lql == -math.inf and ce == math.inf
        assert finite_pairs == 90


def test_analytic_gradients_match_finite_differences():
    """All three objectives, 50 random instances each, central differences
    with step 1e-5; pairwise instances kept off the hinge kink."""
    with criterion("gradient_suite"):
        start = time.perf_counter()
        rng = np.random.default_rng(52)
        worst = {"direct": 0.0, "pairwise": 0.0, "triplewise": 0.0}

        def random_instance(need_negatives):
            vocab_size = int(rng.integers(3, 11))
            dim = int(rng.integers(1, 5))
            words = [f"w{i:02d}" for i in range(vocab_size)]
            vocab = corpus_of({"d": words}).vocabulary
            theta = GeneratorParams(
                W=rng.normal(scale=0.6, size=(vocab_size, dim)),
                b=rng.normal(scale=0.6, size=vocab_size),
            )
            n_tokens = int(rng.integers(1, 9))
            tokens = [words[j] for j in rng.integers(0, vocab_size, n_tokens)]
            q = query_of(tokens, vocab, "q")
            pos = rng.normal(size=dim)
            negs = [rng.normal(size=dim) for _ in range(need_negatives)]
            return theta, q, pos, negs

        def hinge_raw(theta, q, pos, neg, margin):
            p_q = query_lm(q, theta.vocab_size)
            h_pos = cross_entropy_from_logits(p_q, forward_logits(theta, pos))
            h_neg = cross_entropy_from_logits(p_q, forward_logits(theta, neg))
            return margin + h_pos - h_neg

        margin = 1.0
        for objective, n_neg in (("direct", 0), ("pairwise", 1), ("triplewise", 2)):
            done = 0
            while done < 50:
                theta, q, pos, negs = random_instance(n_neg)
                if objective == "pairwise":
                    if abs(hinge_raw(theta, q, pos, negs[0], margin)) < 1e-3:
                        continue
                err = gradient_check(
                    objective, theta, q, pos, negs, margin=margin, step=1e-5
                )
                worst[objective] = max(worst[objective], err)
                done += 1
        for objective, err in worst.items():
            assert err < 1e-4, (objective, err)
        assert time.perf_counter() - start < 10.0


def test_every_language_model_is_normalized(pipeline):
    """Every probability vector the pipeline builds on the synthetic corpus
    sums to 1 within 1e-9 with no negative entries; the three-way mixtures
    are strictly positive everywhere."""
    with criterion("normalization_suite"):
        p = pipeline["paths"]
        corpus = load_corpus(str(p["corpus.tsv"]))
        queries = load_queries(str(p["queries.tsv"]), corpus.vocabulary)
        store = load_embeddings(str(p["docs.emb"]))
        theta = load_params(str(p["gen.ckpt"]))
        weights = InterpolationWeights(alpha=0.3, beta=0.3, gamma=0.4)
        vocab_size = len(corpus.vocabulary)

        def check(lm, strict=False):
            assert abs(lm.probs.sum() - 1.0) <= 1e-9
            assert np.all(lm.probs >= 0.0)
            if strict:
                assert np.all(lm.probs > 0.0)

        bg = background_lm(corpus)
        check(bg)
        for doc in corpus.documents.values():
            mle = mle_lm(doc.counts, vocab_size)
            enh = forward_lm(theta, store.get(doc.id))
            check(mle)
            check(smooth_jm(mle, bg, 0.5))
            check(enh)
            check(interpolated_lm(bg, mle, enh, weights), strict=True)
        for q in queries:
            check(query_lm(q, vocab_size))


def test_gamma_zero_run_matches_smoothed_baseline_bytes(pipeline):
    """Turning the learned model's weight to zero and splitting the rest as
    (lambda, 1-lambda) reproduces the smoothed baseline's run file exactly."""
    with criterion("reduction_identity"):
        p = pipeline["paths"]
        root = pipeline["root"]
        for lam in ("0.5", "0.3"):
            mix, base = root / f"mix{lam}.run", root / f"base{lam}.run"
            alpha, beta = lam, repr(1.0 - float(lam))
            assert entrypoint(
                ["rank", "--corpus", str(p["corpus.tsv"]), "--queries",
                 str(p["queries.tsv"]), "--run", str(mix), "--alpha", alpha,
                 "--beta", beta, "--gamma", "0", "--tag", "contrast"]
            ) == 0
            assert entrypoint(
                ["rank", "--corpus", str(p["corpus.tsv"]), "--queries",
                 str(p["queries.tsv"]), "--run", str(base), "--baseline",
                 "qlm", "--lambda", lam, "--tag", "contrast"]
            ) == 0
            assert mix.read_bytes() == base.read_bytes()


def test_average_precision_hand_oracles():
    """Perfect ranking, relevant at ranks 1 and 3 of 2, and nothing
    retrieved give exactly 1, 5/6, and 0."""
    with criterion("evaluator_oracle"):
        assert average_precision(["r1", "r2", "n1"], {"r1", "r2"}) == 1.0
        got = average_precision(["r1", "n1", "r2", "n2"], {"r1", "r2"})
        assert got == float(Fraction(5, 6))
        assert average_precision(["n1", "n2", "n3"], {"r1"}) == 0.0


def test_synthetic_end_to_end_beats_flat_mixture(pipeline):
    """Trained interpolated ranking reaches MAP >= 0.90 on the synthetic
    collection and is at least as good as the untrained gamma-0 mixture,
    inside the one-minute budget."""
    with criterion("synthetic_end_to_end"):
        assert pipeline["map"] >= 0.90, pipeline["map"]
        assert pipeline["map"] >= pipeline["map_gamma0"], (
            pipeline["map"], pipeline["map_gamma0"],
        )
        assert pipeline["elapsed"] < 60.0, pipeline["elapsed"]


def test_repeating_the_pipeline_is_byte_identical(pipeline):
    """encode -> train -> rank -> eval rerun with the same seeds writes
    byte-identical embedding, checkpoint, run, and report files."""
    with criterion("determinism"):
        p = pipeline["paths"]
        root = pipeline["root"]
        redo = {name: root / f"redo.{name}" for name in (
            "docs.emb", "gen.ckpt", "full.run", "full.eval",
        )}
        steps = [
            ["encode", "--corpus", str(p["corpus.tsv"]), "--out",
             str(redo["docs.emb"]), "--dim", "32", "--seed", "7"],
            ["train", "--corpus", str(p["corpus.tsv"]), "--queries",
             str(p["queries.tsv"]), "--qrels", str(p["qrels.txt"]),
             "--embeddings", str(redo["docs.emb"]), "--checkpoint",
             str(redo["gen.ckpt"]), "--objective", "pairwise",
             "--epochs", "50", "--seed", "7"],
            ["rank", "--corpus", str(p["corpus.tsv"]), "--queries",
             str(p["queries.tsv"]), "--run", str(redo["full.run"]),
             "--checkpoint", str(redo["gen.ckpt"]), "--embeddings",
             str(redo["docs.emb"])],
            ["eval", "--run", str(redo["full.run"]), "--qrels",
             str(p["qrels.txt"]), "--report", str(redo["full.eval"])],
        ]
        for argv in steps:
            assert entrypoint(argv) == 0, argv[0]
        for name, redo_path in redo.items():
            assert redo_path.read_bytes() == p[name].read_bytes(), name
