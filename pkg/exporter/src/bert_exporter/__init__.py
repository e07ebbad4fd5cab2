"""Offline transformer document encoder.

Runs a pretrained encoder over a tab-separated corpus file and writes one
final-layer [CLS] vector per document in the plain-text embedding format
(`dim <d>` header, then `<doc_id> <c1> ... <cd>` lines).
"""

from .exporter import ExportJob, export_embeddings, export_with, load_encoder, read_corpus

__all__ = [
    "ExportJob",
    "export_embeddings",
    "export_with",
    "load_encoder",
    "read_corpus",
]
