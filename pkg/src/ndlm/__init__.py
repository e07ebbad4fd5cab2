"""Neural document language modeling toolkit for query-likelihood retrieval.

A corpus of pre-tokenized documents is indexed into unigram statistics; a
frozen document encoder supplies fixed-dimension embeddings; a trainable
affine-softmax generator maps each embedding to an enhanced document
language model; and the final ranker interpolates background, maximum
likelihood, and enhanced models into one distribution scored against
queries by log likelihood. Training, ranking, and MAP evaluation are all
deterministic given their seeds.
"""

from ndlm.corpus import (
    Corpus,
    Document,
    Query,
    RelevanceJudgments,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    load_qrels,
    load_queries,
    save_corpus,
    tokenize,
)
from ndlm.unigram import (
    UnigramLM,
    background_lm,
    cross_entropy,
    log_query_likelihood,
    mle_lm,
    query_lm,
    smooth_jm,
)
from ndlm.encoder import (
    EmbeddingStore,
    encode_corpus,
    encode_document,
    hash_token_vector,
    load_embeddings,
    save_embeddings,
)
from ndlm.generator import (
    GeneratorParams,
    Gradient,
    cross_entropy_from_logits,
    forward_lm,
    forward_logits,
    grad_ce_logits,
    grad_params,
    init_params,
    load_params,
    save_params,
)
from ndlm.trainer import (
    TrainConfig,
    TrainingInstance,
    TrainReport,
    gradient_check,
    loss_direct,
    loss_pairwise,
    loss_triplewise,
    sample_instances,
    train,
)
from ndlm.ranker import (
    InterpolatedScorer,
    InterpolationWeights,
    RankedList,
    embedding_rank,
    interpolated_lm,
    rank,
    score_document,
    vsm_rank,
)
from ndlm.evaluator import (
    EvalReport,
    average_precision,
    mean_average_precision,
    read_run,
    write_run,
)

__version__ = "0.1.0"
