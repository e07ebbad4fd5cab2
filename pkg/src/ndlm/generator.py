"""Affine-plus-softmax language-model generator with analytic gradients.

A document embedding e is mapped to logits z = W e + b and then through a
softmax into an enhanced document LM. Losses are computed from logits via
logsumexp so they stay finite even where the softmax itself underflows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .unigram import UnigramLM


@dataclass(frozen=True, eq=False)
class GeneratorParams:
    """Weight matrix (vocab_size x dim) and bias (vocab_size)."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if W.ndim != 2 or b.ndim != 1 or W.shape[0] != b.shape[0]:
            raise ValueError(f"inconsistent parameter shapes {W.shape} / {b.shape}")
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def vocab_size(self) -> int:
        return self.W.shape[0]

    @property
    def dim(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True, eq=False)
class Gradient:
    dW: np.ndarray
    db: np.ndarray


def init_params(
    vocab_size: int,
    dim: int,
    scheme: str = "zero",
    seed: int = 0,
    scale: float = 0.01,
) -> GeneratorParams:
    """Zero init by default: the initial LM is uniform and runs are
    reproducible without any seed. Seeded Gaussian init is opt-in."""
    if vocab_size < 1 or dim < 1:
        raise ValueError("vocab_size and dim must be >= 1")
    if scheme == "zero":
        return GeneratorParams(
            W=np.zeros((vocab_size, dim)), b=np.zeros(vocab_size)
        )
    if scheme == "gaussian":
        rng = np.random.default_rng(seed)
        return GeneratorParams(
            W=rng.normal(0.0, scale, size=(vocab_size, dim)),
            b=rng.normal(0.0, scale, size=vocab_size),
        )
    raise ValueError(f"unknown init scheme {scheme!r}")


def forward_logits(theta: GeneratorParams, e: np.ndarray) -> np.ndarray:
    if e.shape != (theta.dim,):
        raise ValueError(
            f"embedding has shape {e.shape}, parameters expect ({theta.dim},)"
        )
    return theta.W @ e + theta.b


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = np.exp(z - z.max())
    return shifted / shifted.sum()


def forward_lm(theta: GeneratorParams, e: np.ndarray) -> UnigramLM:
    """Enhanced document LM: softmax(W e + b), max-subtracted for stability."""
    return UnigramLM(_softmax(forward_logits(theta, e)))


def _check_logits(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    return z


def logsumexp(z: np.ndarray) -> float:
    m = float(z.max())
    return m + float(np.log(np.exp(z - m).sum()))


def cross_entropy_from_logits(p_q: UnigramLM, z: np.ndarray) -> float:
    """H(p_q || softmax(z)) = logsumexp(z) - sum p_q[t] z[t]; always finite."""
    z = _check_logits(z)
    if len(p_q) != z.size:
        raise ValueError("dimension mismatch between distribution and logits")
    return logsumexp(z) - float(np.dot(p_q.probs, z))


def grad_ce_logits(p_q: UnigramLM, z: np.ndarray) -> np.ndarray:
    """d/dz of cross_entropy_from_logits: softmax(z) - p_q."""
    z = _check_logits(z)
    if len(p_q) != z.size:
        raise ValueError("dimension mismatch between distribution and logits")
    return _softmax(z) - p_q.probs


def grad_params(dz: np.ndarray, e: np.ndarray) -> Gradient:
    """Chain rule through z = W e + b: dW = outer(dz, e), db = dz."""
    dz = np.asarray(dz, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    if dz.ndim != 1 or e.ndim != 1:
        raise ValueError("dz and e must be vectors")
    return Gradient(dW=np.outer(dz, e), db=dz.copy())


def save_params(theta: GeneratorParams, path: str) -> None:
    def fmt(vec) -> str:
        return " ".join(repr(float(x)) for x in vec)

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"vocab {theta.vocab_size} dim {theta.dim}\n")
        fh.write(fmt(theta.b) + "\n")
        for row in theta.W:
            fh.write(fmt(row) + "\n")


def load_params(path: str) -> GeneratorParams:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split()
        if (
            len(parts) != 4
            or parts[0] != "vocab"
            or parts[2] != "dim"
            or not parts[1].isdigit()
            or not parts[3].isdigit()
        ):
            raise ValueError(
                f"{path}:1: expected header 'vocab <n> dim <d>', got {header!r}"
            )
        vocab_size, dim = int(parts[1]), int(parts[3])
        if vocab_size < 1 or dim < 1:
            raise ValueError(f"{path}:1: vocab and dim must be >= 1")

        def parse(lineno: int, line: str, want: int) -> np.ndarray:
            fields = line.split()
            if len(fields) != want:
                raise ValueError(
                    f"{path}:{lineno}: expected {want} values, got {len(fields)}"
                )
            try:
                vec = np.array([float(f) for f in fields], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value: {exc}") from None
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            return vec

        b_line = fh.readline().rstrip("\n")
        if not b_line:
            raise ValueError(f"{path}:2: missing bias line")
        b = parse(2, b_line, vocab_size)
        W = np.empty((vocab_size, dim), dtype=np.float64)
        for i in range(vocab_size):
            line = fh.readline().rstrip("\n")
            if not line:
                raise ValueError(f"{path}:{3 + i}: missing weight row {i}")
            W[i] = parse(3 + i, line, dim)
        trailing = fh.readline()
        if trailing.strip():
            raise ValueError(f"{path}: unexpected content after {vocab_size} weight rows")
    return GeneratorParams(W=W, b=b)
