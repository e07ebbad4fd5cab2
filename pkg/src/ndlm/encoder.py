"""Document encoder: deterministic hash embeddings and the embedding file.

The hash encoder is a stand-in for any real pretrained encoder. It is pinned
down to the bit level (FNV-1a-64 + SplitMix64) so independently written
implementations produce identical vectors. External encoders interoperate
through the file format instead:

    dim <d>
    <doc_id>\\t<c1> <c2> ... <cd>

with each component serialized as the shortest decimal that round-trips the
underlying binary64 value. Round trips are bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Document
from .prng import SplitMix64, fnv1a64


@dataclass(frozen=True)
class EmbeddingStore:
    dim: int
    vectors: dict[str, np.ndarray]

    def get(self, doc_id: str) -> np.ndarray:
        vec = self.vectors.get(doc_id)
        if vec is None:
            raise ValueError(f"no embedding stored for doc id {doc_id!r}")
        return vec

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.vectors


def hash_token_vector(token: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic pseudo-random vector for one token, components in [-1, 1).

    The stream starts at seed XOR fnv1a64(token); component i is the (i+1)-th
    SplitMix64 output mapped through ((x >> 11) / 2**53) * 2 - 1.
    """
    if dim < 1:
        raise ValueError(f"embedding dimension must be >= 1, got {dim}")
    rng = SplitMix64(seed ^ fnv1a64(token.encode("utf-8")))
    return np.array([rng.next_unit() * 2.0 - 1.0 for _ in range(dim)])


def encode_document(doc: Document, dim: int, seed: int) -> np.ndarray:
    """Mean of token vectors (with multiplicity), L2-normalized.

    Empty documents map to the zero vector, left unnormalized.
    """
    if not doc.tokens:
        return np.zeros(dim, dtype=np.float64)
    total = np.zeros(dim, dtype=np.float64)
    for tok in doc.tokens:
        total += hash_token_vector(tok, dim, seed)
    mean = total / len(doc.tokens)
    norm = float(np.linalg.norm(mean))
    if norm > 0.0:
        mean /= norm
    return mean


def encode_corpus(corpus: Corpus, dim: int, seed: int) -> EmbeddingStore:
    vectors = {
        doc_id: encode_document(corpus.documents[doc_id], dim, seed)
        for doc_id in corpus.doc_ids()
    }
    return EmbeddingStore(dim=dim, vectors=vectors)


def _format_vector(vec: np.ndarray) -> str:
    # repr of a Python float is the shortest decimal that round-trips.
    return " ".join(repr(float(c)) for c in vec)


def save_embeddings(store: EmbeddingStore, path: str) -> None:
    for doc_id, vec in store.vectors.items():
        if len(vec) != store.dim:
            raise ValueError(
                f"vector for {doc_id!r} has {len(vec)} components, store dim is {store.dim}"
            )
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"vector for {doc_id!r} has non-finite components")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"dim {store.dim}\n")
        for doc_id in sorted(store.vectors):
            fh.write(f"{doc_id}\t{_format_vector(store.vectors[doc_id])}\n")


def load_embeddings(path: str) -> EmbeddingStore:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split()
        if len(parts) != 2 or parts[0] != "dim" or not parts[1].isdigit():
            raise ValueError(f"{path}:1: expected header 'dim <d>', got {header!r}")
        dim = int(parts[1])
        if dim < 1:
            raise ValueError(f"{path}:1: dimension must be >= 1, got {dim}")
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected '<doc_id>\\t<components>'")
            doc_id, rest = line.split("\t", 1)
            if doc_id in vectors:
                raise ValueError(f"{path}:{lineno}: duplicate doc id {doc_id!r}")
            fields = rest.split()
            if len(fields) != dim:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim} components, got {len(fields)}"
                )
            try:
                vec = np.array([float(f) for f in fields], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad component: {exc}") from None
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"{path}:{lineno}: non-finite component")
            vectors[doc_id] = vec
    return EmbeddingStore(dim=dim, vectors=vectors)
