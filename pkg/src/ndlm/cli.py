"""Command-line surface: encode, train, rank, eval, gradcheck, synth.

Settings resolve in precedence order: command-line flag, then the NLM_SEED
environment variable (seed only), then the `--config` file, then built-in
defaults. Exit codes: 0 success, 1 validation or config error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import evaluator, synth
from .config import load_config
from .corpus import Document, load_corpus, load_qrels, load_queries
from .encoder import encode_corpus, encode_document, load_embeddings, save_embeddings
from .generator import (
    cross_entropy_from_logits,
    forward_logits,
    init_params,
    load_params,
    save_params,
)
from .ranker import (
    InterpolatedScorer,
    InterpolationWeights,
    embedding_rank,
    rank,
    vsm_rank,
)
from .trainer import (
    OBJECTIVES,
    OPTIMIZERS,
    INIT_SCHEMES,
    TrainConfig,
    gradient_check,
    sample_instances,
    train,
)
from .unigram import (
    background_lm,
    log_query_likelihood,
    mle_lm,
    query_lm,
    smooth_jm,
)

DEFAULT_DIM = 32
DEFAULT_LAMBDA = 0.5
DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_GAMMA = 0.3, 0.3, 0.4
DEFAULT_EPOCHS = 50
DEFAULT_LR = 1e-3
# The error statistic floors its denominator at 1e-8; central differences
# at step 1e-5 leave roundoff noise around 1e-3 on coordinates whose true
# gradient sits below that floor, so the pass bar must clear the noise.
DEFAULT_GRADCHECK_THRESHOLD = 1e-2
DEFAULT_NEGATIVES = {"direct": 0, "pairwise": 1, "triplewise": 2}

_KNOWN_CONFIG_KEYS = {
    "corpus", "queries", "qrels", "embeddings", "checkpoint", "run", "report",
    "log", "tag", "baseline", "out", "from_file", "dim", "seed", "encoder_seed",
    "lambda", "alpha", "beta", "gamma", "objective", "learning_rate", "epochs",
    "negatives", "margin", "optimizer", "init", "step", "threshold",
    "instances", "docs", "topics", "out_corpus", "out_queries", "out_qrels",
}


class _Resolver:
    """flag > NLM_SEED (seed keys) > config file > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config: dict[str, str] = {}
        if getattr(args, "config", None):
            self.config = load_config(args.config)
            unknown = set(self.config) - _KNOWN_CONFIG_KEYS
            if unknown:
                raise ValueError(
                    f"unknown config key(s): {', '.join(sorted(unknown))}"
                )

    def get(self, key: str, default=None, cast=str, required: bool = False):
        attr = "lam" if key == "lambda" else key
        value = getattr(self.args, attr, None)
        if value is not None:
            return value
        if key == "seed":
            env = os.environ.get("NLM_SEED")
            if env is not None:
                try:
                    return cast(env)
                except ValueError:
                    raise ValueError(f"NLM_SEED is not a valid seed: {env!r}") from None
        if key in self.config:
            raw = self.config[key]
            try:
                return cast(raw)
            except ValueError:
                raise ValueError(f"config key {key!r}: bad value {raw!r}") from None
        if required and default is None:
            raise ValueError(f"missing required setting {key!r} (use --{key.replace('_', '-')})")
        return default

    def choice(self, key: str, allowed, default=None, required: bool = False):
        value = self.get(key, default=default, required=required)
        if value is not None and value not in allowed:
            raise ValueError(f"{key} must be one of {', '.join(allowed)}, got {value!r}")
        return value


def _add_config_flag(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat 'key = value' config file; flags win")


def cmd_encode(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    corpus_path = res.get("corpus", required=True)
    out = res.get("out", required=True)
    corpus = load_corpus(corpus_path)
    from_file = res.get("from_file")
    dim = res.get("dim", cast=int)
    if from_file:
        store = load_embeddings(from_file)
        if dim is not None and dim != store.dim:
            raise ValueError(
                f"external embeddings have dim {store.dim}, expected {dim}"
            )
        missing = [d for d in corpus.doc_ids() if d not in store]
        if missing:
            raise ValueError(f"external embeddings missing doc {missing[0]!r}")
    else:
        seed = res.get("seed", default=0, cast=int)
        store = encode_corpus(corpus, dim if dim is not None else DEFAULT_DIM, seed)
    save_embeddings(store, out)
    return 0


class _SmoothedQLMScorer:
    """Jelinek-Mercer document models, cached per document."""

    def __init__(self, corpus, lam: float):
        self._corpus = corpus
        self._lam = lam
        self._p_bg = background_lm(corpus)
        self._cache = {}

    def __call__(self, query, doc) -> float:
        lm = self._cache.get(doc.id)
        if lm is None:
            p_mle = mle_lm(doc.counts, len(self._corpus.vocabulary))
            lm = smooth_jm(p_mle, self._p_bg, self._lam)
            self._cache[doc.id] = lm
        return log_query_likelihood(query, lm)


def cmd_rank(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    corpus = load_corpus(res.get("corpus", required=True))
    queries = load_queries(res.get("queries", required=True), corpus.vocabulary)
    run_path = res.get("run", required=True)
    tag = res.get("tag", default="ndlm")
    baseline = res.choice("baseline", ("qlm", "vsm", "embed"))

    if baseline is None:
        weights = InterpolationWeights(
            alpha=res.get("alpha", default=DEFAULT_ALPHA, cast=float),
            beta=res.get("beta", default=DEFAULT_BETA, cast=float),
            gamma=res.get("gamma", default=DEFAULT_GAMMA, cast=float),
        )
        theta = None
        store = None
        if weights.gamma != 0.0:
            theta = load_params(res.get("checkpoint", required=True))
            store = load_embeddings(res.get("embeddings", required=True))
        scorer = InterpolatedScorer(corpus, weights, theta, store)
        ranked = [rank(q, corpus, scorer) for q in queries]
    elif baseline == "qlm":
        lam = res.get("lambda", default=DEFAULT_LAMBDA, cast=float)
        scorer = _SmoothedQLMScorer(corpus, lam)
        ranked = [rank(q, corpus, scorer) for q in queries]
    elif baseline == "vsm":
        ranked = [vsm_rank(q, corpus) for q in queries]
    else:
        store = load_embeddings(res.get("embeddings", required=True))
        seed = res.get("encoder_seed", default=0, cast=int)
        ranked = []
        for q in queries:
            pseudo = Document(id=q.id, tokens=q.tokens, counts={})
            qvec = encode_document(pseudo, store.dim, seed)
            ranked.append(embedding_rank(q.id, qvec, store))
    evaluator.write_run(ranked, run_path, tag)
    return 0


def _train_config(res: _Resolver) -> TrainConfig:
    objective = res.choice("objective", OBJECTIVES, required=True)
    negatives = res.get(
        "negatives", default=DEFAULT_NEGATIVES[objective], cast=int
    )
    config = TrainConfig(
        objective=objective,
        epochs=res.get("epochs", default=DEFAULT_EPOCHS, cast=int),
        seed=res.get("seed", default=0, cast=int),
        learning_rate=res.get("learning_rate", default=DEFAULT_LR, cast=float),
        negatives_per_positive=negatives,
        margin=res.get("margin", default=1.0, cast=float),
        optimizer=res.choice("optimizer", OPTIMIZERS, default="adam"),
        init=res.choice("init", INIT_SCHEMES, default="zero"),
    )
    config.validate()
    return config


def cmd_train(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    config = _train_config(res)
    corpus = load_corpus(res.get("corpus", required=True))
    queries = load_queries(res.get("queries", required=True), corpus.vocabulary)
    qrels = load_qrels(res.get("qrels", required=True))
    store = load_embeddings(res.get("embeddings", required=True))
    checkpoint = res.get("checkpoint", required=True)

    report = train(corpus, store, queries, qrels, config)
    save_params(report.final_params, checkpoint)

    log_lines = [
        f"epoch {n} loss {repr(loss)}"
        for n, loss in enumerate(report.loss_history, start=1)
    ]
    for line in log_lines:
        print(line)
    log_path = res.get("log")
    if log_path:
        with open(log_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(log_lines) + "\n")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    runs = evaluator.read_run(res.get("run", required=True))
    qrels = load_qrels(res.get("qrels", required=True))
    report = evaluator.mean_average_precision(runs, qrels)
    report_path = res.get("report")
    if report_path:
        evaluator.write_report(report, report_path)
    print(f"map {repr(report.map)}")
    return 0


def _hinge_kink_distance(theta, query, pos_emb, neg_emb, margin: float) -> float:
    p_q = query_lm(query, theta.vocab_size)
    h_pos = cross_entropy_from_logits(p_q, forward_logits(theta, pos_emb))
    h_neg = cross_entropy_from_logits(p_q, forward_logits(theta, neg_emb))
    return abs(margin + h_pos - h_neg)


def cmd_gradcheck(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    config = _train_config(res)
    corpus = load_corpus(res.get("corpus", required=True))
    queries = load_queries(res.get("queries", required=True), corpus.vocabulary)
    qrels = load_qrels(res.get("qrels", required=True))
    store = load_embeddings(res.get("embeddings", required=True))
    step = res.get("step", default=1e-5, cast=float)
    threshold = res.get("threshold", default=DEFAULT_GRADCHECK_THRESHOLD, cast=float)
    n_instances = res.get("instances", default=5, cast=int)

    theta = init_params(
        len(corpus.vocabulary), store.dim, scheme=config.init, seed=config.seed
    )
    worst = 0.0
    checked = 0
    for instance in sample_instances(config.seed, queries, qrels, corpus, config):
        if checked >= n_instances:
            break
        if config.objective == "pairwise":
            # central differences straddle the hinge kink; the analytic
            # subgradient is only comparable away from it
            distance = _hinge_kink_distance(
                theta, instance.query, store.get(instance.positive),
                store.get(instance.negatives[0]), config.margin,
            )
            if distance < 1e-3:
                continue
        err = gradient_check(
            config.objective,
            theta,
            instance.query,
            store.get(instance.positive),
            [store.get(d) for d in instance.negatives],
            margin=config.margin,
            step=step,
            seed=config.seed,
        )
        worst = max(worst, err)
        checked += 1
    print(f"objective {config.objective} instances {checked} max_rel_err {repr(worst)}")
    return 0 if worst < threshold else 1


def cmd_synth(args: argparse.Namespace) -> int:
    res = _Resolver(args)
    synth.write_collection(
        seed=res.get("seed", default=0, cast=int),
        n_docs=res.get("docs", required=True, cast=int),
        n_queries=res.get("queries", required=True, cast=int),
        n_topics=res.get("topics", required=True, cast=int),
        corpus_path=res.get("out_corpus", required=True),
        queries_path=res.get("out_queries", required=True),
        qrels_path=res.get("out_qrels", required=True),
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ndlm",
        description=(
            "Query-likelihood retrieval with a trainable softmax document "
            "LM interpolated over background and MLE models."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="write document embeddings")
    p.add_argument("--corpus", help="corpus file: one '<id>\\t<tokens>' line per doc")
    p.add_argument("--out", help="output embedding file")
    p.add_argument("--dim", type=int, help=f"hash encoder dimension (default {DEFAULT_DIM})")
    p.add_argument("--seed", type=int, help="hash encoder seed (default 0)")
    p.add_argument(
        "--from-file",
        dest="from_file",
        help="validate and canonicalize an external embedding file instead of hashing",
    )
    _add_config_flag(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train the LM generator")
    p.add_argument("--corpus")
    p.add_argument("--queries", help="query file, same line format as the corpus")
    p.add_argument("--qrels", help="TREC qrels file")
    p.add_argument("--embeddings", help="embedding file from 'encode'")
    p.add_argument("--checkpoint", help="output parameter checkpoint")
    p.add_argument("--log", help="optional output training log ('epoch <n> loss <v>')")
    p.add_argument("--objective", choices=list(OBJECTIVES))
    p.add_argument("--learning-rate", dest="learning_rate", type=float,
                   help=f"default {DEFAULT_LR}")
    p.add_argument("--epochs", type=int, help=f"default {DEFAULT_EPOCHS}")
    p.add_argument("--seed", type=int, help="default 0; NLM_SEED overrides config")
    p.add_argument("--negatives", type=int,
                   help="negatives per positive (default: pairwise 1, triplewise 2)")
    p.add_argument("--margin", type=float, help="pairwise hinge margin (default 1)")
    p.add_argument("--optimizer", choices=list(OPTIMIZERS), help="default adam")
    p.add_argument("--init", choices=list(INIT_SCHEMES), help="default zero")
    _add_config_flag(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rank", help="rank the corpus for every query")
    p.add_argument("--corpus")
    p.add_argument("--queries")
    p.add_argument("--run", help="output TREC run file")
    p.add_argument("--tag", help="run tag written in column 6 (default ndlm)")
    p.add_argument("--baseline", choices=["qlm", "vsm", "embed"],
                   help="score with a baseline instead of the interpolated model")
    p.add_argument("--alpha", type=float, help=f"background weight (default {DEFAULT_ALPHA})")
    p.add_argument("--beta", type=float, help=f"doc MLE weight (default {DEFAULT_BETA})")
    p.add_argument("--gamma", type=float, help=f"generated LM weight (default {DEFAULT_GAMMA})")
    p.add_argument("--lambda", dest="lam", type=float,
                   help=f"qlm baseline smoothing (default {DEFAULT_LAMBDA})")
    p.add_argument("--checkpoint", help="generator checkpoint (needed when gamma > 0)")
    p.add_argument("--embeddings", help="embedding file (needed when gamma > 0 or baseline embed)")
    p.add_argument("--encoder-seed", dest="encoder_seed", type=int,
                   help="hash seed for query vectors in the embed baseline (default 0)")
    _add_config_flag(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="mean average precision of a run file")
    p.add_argument("--run")
    p.add_argument("--qrels")
    p.add_argument("--report", help="optional output report file")
    _add_config_flag(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference check of training gradients")
    p.add_argument("--corpus")
    p.add_argument("--queries")
    p.add_argument("--qrels")
    p.add_argument("--embeddings")
    p.add_argument("--objective", choices=list(OBJECTIVES))
    p.add_argument("--margin", type=float)
    p.add_argument("--negatives", type=int)
    p.add_argument("--step", type=float, help="finite-difference step (default 1e-5)")
    p.add_argument("--threshold", type=float,
                   help="fail when max relative error reaches this "
                        f"(default {DEFAULT_GRADCHECK_THRESHOLD})")
    p.add_argument("--instances", type=int, help="instances to check (default 5)")
    p.add_argument("--seed", type=int)
    p.add_argument("--init", choices=list(INIT_SCHEMES))
    p.add_argument("--learning-rate", dest="learning_rate", type=float, help=argparse.SUPPRESS)
    p.add_argument("--epochs", type=int, help=argparse.SUPPRESS)
    p.add_argument("--optimizer", choices=list(OPTIMIZERS), help=argparse.SUPPRESS)
    _add_config_flag(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("synth", help="generate a synthetic topic-clustered collection")
    p.add_argument("--seed", type=int, help="default 0")
    p.add_argument("--docs", type=int)
    p.add_argument("--queries", type=int)
    p.add_argument("--topics", type=int)
    p.add_argument("--out-corpus", dest="out_corpus")
    p.add_argument("--out-queries", dest="out_queries")
    p.add_argument("--out-qrels", dest="out_qrels")
    _add_config_flag(p)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entrypoint(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(message)s")
    try:
        return main(argv)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        code = exc.code
        if code in (None, 0):
            return 0
        return 1
