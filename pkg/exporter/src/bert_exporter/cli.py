"""Command-line entry: export --corpus <path> --model <name> --max-len <n> --out <path>."""

from __future__ import annotations

import argparse
import logging
import sys

from .exporter import ExportJob, export_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="export",
        description=(
            "Run a pretrained transformer encoder over a corpus file and "
            "write one final-layer [CLS] vector per document."
        ),
    )
    parser.add_argument(
        "--corpus", required=True, help="one '<doc_id>\\t<text>' line per document"
    )
    parser.add_argument(
        "--model", required=True,
        help="pretrained checkpoint name or local path (no default)",
    )
    parser.add_argument(
        "--max-len", dest="max_len", type=int, required=True,
        help="token budget per document, [CLS] and [SEP] included",
    )
    parser.add_argument("--out", required=True, help="output embedding file")
    parser.add_argument("--device", default="cpu", help="inference device (default cpu)")
    parser.add_argument(
        "--batch-size", dest="batch_size", type=int, default=8,
        help="documents per forward pass (default 8)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        corpus_path=args.corpus,
        model=args.model,
        max_sequence_length=args.max_len,
        output_path=args.out,
        device=args.device,
        batch_size=args.batch_size,
    )
    export_embeddings(job)
    return 0


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
        return 0 if exc.code in (None, 0) else 1
