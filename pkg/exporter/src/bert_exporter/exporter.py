"""Batched [CLS] extraction into the plain-text embedding format."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExportJob:
    """One export request. The model is never defaulted."""

    corpus_path: str
    model: str
    max_sequence_length: int
    output_path: str
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self):
        if self.max_sequence_length < 1:
            raise ValueError("max_sequence_length must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def read_corpus(path: str) -> list[tuple[str, str]]:
    """Read `<doc_id>\\t<text>` lines, preserving file order."""
    docs: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            doc_id, sep, text = line.partition("\t")
            if not sep or not doc_id:
                raise ValueError(f"{path}:{lineno}: expected '<doc_id>\\t<text>'")
            if doc_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate document id {doc_id!r}")
            seen.add(doc_id)
            docs.append((doc_id, text))
    if not docs:
        raise ValueError(f"{path}: no documents")
    return docs


def load_encoder(model_name: str, device: str = "cpu"):
    """Load tokenizer and encoder; eval mode so dropout never fires."""
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_name)
    model = AutoModel.from_pretrained(model_name)
    model.to(device)
    model.eval()
    return tokenizer, model


def export_with(tokenizer, model, job: ExportJob) -> None:
    """Encode every document and write the embedding file.

    The tokenizer supplies its own [CLS]/[SEP] framing; sequences over the
    budget lose their tail with a warning. Output lines follow corpus order
    no matter how the batching falls.
    """
    import torch

    docs = read_corpus(job.corpus_path)
    limit = getattr(model.config, "max_position_embeddings", None)
    if limit is not None and job.max_sequence_length > limit:
        raise ValueError(
            f"max_sequence_length {job.max_sequence_length} exceeds the "
            f"model's positional limit {limit}"
        )
    hidden = int(model.config.hidden_size)
    lines = [f"dim {hidden}"]
    with torch.no_grad():
        for start in range(0, len(docs), job.batch_size):
            batch = docs[start : start + job.batch_size]
            for doc_id, text in batch:
                try:
                    ids = tokenizer(
                        text, add_special_tokens=True, truncation=False
                    )["input_ids"]
                except Exception as exc:
                    raise ValueError(
                        f"tokenizer failed on document {doc_id!r}: {exc}"
                    ) from exc
                if len(ids) > job.max_sequence_length:
                    logger.warning(
                        "document %s: %d tokens truncated to %d",
                        doc_id, len(ids), job.max_sequence_length,
                    )
            encoded = tokenizer(
                [text for _, text in batch],
                padding=True,
                truncation=True,
                max_length=job.max_sequence_length,
                return_tensors="pt",
            ).to(model.device)
            output = model(**encoded)
            # [CLS] sits at position 0 under right padding
            cls = output.last_hidden_state[:, 0, :].cpu()
            for (doc_id, _), vector in zip(batch, cls):
                values = [float(v) for v in vector]
                if not all(math.isfinite(v) for v in values):
                    raise ValueError(f"non-finite vector for document {doc_id!r}")
                lines.append(doc_id + "\t" + " ".join(repr(v) for v in values))
    with open(job.output_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def export_embeddings(job: ExportJob) -> None:
    tokenizer, model = load_encoder(job.model, job.device)
    export_with(tokenizer, model, job)
