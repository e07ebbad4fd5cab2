"""Non-interpolated MAP over TREC-style run files and qrels.

Average precision is accumulated in exact rational arithmetic and converted
to float once, so textbook values like 5/6 come out exactly. Relevant
documents missing from a ranking contribute zero precision; queries judged
in the qrels but absent from the run score 0 with a warning.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .corpus import RelevanceJudgments
from .ranker import RankedList

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalReport:
    per_query_ap: dict[str, float]
    map: float


def average_precision(ranked: Sequence[str], relevant: set[str]) -> float:
    """Mean of precision@k over the ranks k that hold relevant documents."""
    if not relevant:
        raise ValueError("empty relevant set")
    hits = 0
    seen: set[str] = set()
    total = Fraction(0)
    for k, doc_id in enumerate(ranked, start=1):
        if doc_id in relevant and doc_id not in seen:
            seen.add(doc_id)
            hits += 1
            total += Fraction(hits, k)
    return float(total / len(relevant))


def mean_average_precision(
    runs: Iterable[RankedList], qrels: RelevanceJudgments
) -> EvalReport:
    by_query: dict[str, list[str]] = {}
    for ranked in runs:
        by_query[ranked.query_id] = ranked.doc_ids()

    judged = sorted(qid for qid in qrels.relevant if qrels.relevant[qid])
    if not judged:
        raise ValueError("qrels contain no query with relevant documents")
    if not any(qid in by_query for qid in judged):
        raise ValueError("no judged query appears in the run")

    for qid in sorted(by_query):
        if qid not in qrels.relevant:
            logger.warning("run query %s has no relevance judgments; ignored", qid)

    per_query: dict[str, float] = {}
    for qid in judged:
        ranked = by_query.get(qid)
        if ranked is None:
            logger.warning("judged query %s missing from run; scored 0", qid)
            per_query[qid] = 0.0
        else:
            per_query[qid] = average_precision(ranked, qrels.relevant[qid])
    return EvalReport(
        per_query_ap=per_query,
        map=math.fsum(per_query.values()) / len(per_query),
    )


def write_run(ranked_lists: Iterable[RankedList], path: str, tag: str = "ndlm") -> None:
    """TREC run lines: `<query_id> Q0 <doc_id> <rank> <score> <tag>`."""
    if not tag or any(ch.isspace() for ch in tag):
        raise ValueError(f"run tag must be non-empty and whitespace-free, got {tag!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ranked in ranked_lists:
            for position, (doc_id, score) in enumerate(ranked.entries, start=1):
                fh.write(
                    f"{ranked.query_id} Q0 {doc_id} {position} {repr(float(score))} {tag}\n"
                )


def read_run(path: str) -> list[RankedList]:
    """Parse a run file; file order is authoritative for ranking.

    Ranks must count 1..n within each query; a score out of descending
    order only warns, since ties may be broken either way upstream.
    """
    order: list[str] = []
    entries: dict[str, list[tuple[str, float]]] = {}
    docs_seen: dict[str, set[str]] = {}
    disorder_warned: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            fields = stripped.split()
            if len(fields) != 6:
                raise ValueError(
                    f"{path}:{lineno}: expected 6 fields "
                    f"'<query_id> Q0 <doc_id> <rank> <score> <tag>', got {len(fields)}"
                )
            qid, _, doc_id, rank_s, score_s, _tag = fields
            try:
                rank_val = int(rank_s)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad rank {rank_s!r}") from None
            try:
                score = float(score_s)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad score {score_s!r}") from None
            if math.isnan(score):
                raise ValueError(f"{path}:{lineno}: NaN score")
            if qid not in entries:
                order.append(qid)
                entries[qid] = []
                docs_seen[qid] = set()
            expected = len(entries[qid]) + 1
            if rank_val != expected:
                raise ValueError(
                    f"{path}:{lineno}: rank {rank_val} for query {qid!r}, "
                    f"expected {expected} (ranks must count 1..n in file order)"
                )
            if doc_id in docs_seen[qid]:
                raise ValueError(
                    f"{path}:{lineno}: duplicate doc {doc_id!r} for query {qid!r}"
                )
            if (
                entries[qid]
                and score > entries[qid][-1][1]
                and qid not in disorder_warned
            ):
                logger.warning(
                    "%s:%d: scores out of descending order for query %s; "
                    "file order trusted",
                    path,
                    lineno,
                    qid,
                )
                disorder_warned.add(qid)
            docs_seen[qid].add(doc_id)
            entries[qid].append((doc_id, score))
    return [RankedList(query_id=qid, entries=entries[qid]) for qid in order]


def write_report(report: EvalReport, path: str) -> None:
    """Lines `query <id> ap <v>` (sorted by id) then `map <v>`."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for qid in sorted(report.per_query_ap):
            fh.write(f"query {qid} ap {repr(report.per_query_ap[qid])}\n")
        fh.write(f"map {repr(report.map)}\n")
