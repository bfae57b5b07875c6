"""Parsing of line-delimited paper metadata and topic assignment tables."""
from __future__ import annotations

import csv
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, TextIO

logger = logging.getLogger(__name__)

_AND_SPLIT = re.compile(r"\s*,?\s+and\s+|\s*&\s*", re.IGNORECASE)
_DATE_RE = re.compile(r"^(\d{4})-(\d{2})(?:-(\d{2}))?")


class IngestError(ValueError):
    """Raised for unusable input at the file or argument level."""


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    title: str
    abstract: str
    authors: tuple[str, ...]
    categories: tuple[str, ...]
    date: date
    topic_id: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "id": self.paper_id,
            "title": self.title,
            "abstract": self.abstract,
            "authors": list(self.authors),
            "categories": list(self.categories),
            "date": self.date.isoformat(),
            "topic_id": self.topic_id,
        }


@dataclass(frozen=True)
class TopicAssignment:
    paper_id: str
    topic_id: int
    probability: float


@dataclass
class ParseReport:
    """Records plus everything that went wrong on the way."""

    records: list[PaperRecord] = field(default_factory=list)
    skipped: list[tuple[int, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    unassigned: list[str] = field(default_factory=list)

    @property
    def n_parsed(self) -> int:
        return len(self.records)


def split_authors(value) -> list[str]:
    """Accept either a pre-split list or an arXiv-style joined string.

    Joined strings are split on semicolons when present, otherwise on commas
    and the word "and". Exact repeats are dropped, keeping first occurrence.
    """
    if isinstance(value, str):
        text = value.replace("\n", " ").strip()
        if ";" in text:
            parts = text.split(";")
        else:
            parts = []
            for chunk in text.split(","):
                parts.extend(_AND_SPLIT.split(chunk))
    elif isinstance(value, (list, tuple)):
        parts = []
        for item in value:
            if isinstance(item, (list, tuple)):
                # arXiv "authors_parsed" style: [last, first, suffix]
                bits = [str(b).strip() for b in item if str(b).strip()]
                if not bits:
                    continue
                parts.append(" ".join(bits[1:2] + bits[:1] + bits[2:]))
            else:
                parts.append(str(item))
    else:
        raise TypeError(f"authors must be a string or list, got {type(value).__name__}")
    seen = set()
    out = []
    for p in parts:
        p = " ".join(p.split())
        if p and p not in seen:
            seen.add(p)
            out.append(p)
    return out


def parse_date(text: str) -> date:
    """ISO-8601 date; year-month values resolve to the first of the month."""
    m = _DATE_RE.match(str(text).strip())
    if not m:
        raise ValueError(f"unparseable date {text!r}")
    year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3) or 1)
    return date(year, month, day)


def _parse_categories(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return tuple(value.split())
    return tuple(str(v) for v in value)


def parse_record(obj: dict) -> PaperRecord:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    missing = [k for k in ("id", "authors", "date") if k not in obj]
    if missing:
        raise ValueError(f"missing fields: {', '.join(missing)}")
    pid = str(obj["id"]).strip()
    if not pid:
        raise ValueError("empty id")
    authors = split_authors(obj["authors"])
    if not authors:
        raise ValueError("empty author list")
    topic = obj.get("topic_id")
    return PaperRecord(
        paper_id=pid,
        title=str(obj.get("title") or ""),
        abstract=str(obj.get("abstract") or ""),
        authors=tuple(authors),
        categories=_parse_categories(obj.get("categories")),
        date=parse_date(obj["date"]),
        topic_id=None if topic is None or topic == "" else int(topic),
    )


def read_assignments(stream: TextIO) -> tuple[dict[str, TopicAssignment], list[str]]:
    """Read `paper_id,topic_id,probability`; returns assignments and problems."""
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise IngestError("assignment table is empty (header row required)")
    expected = ["paper_id", "topic_id", "probability"]
    if header[:3] != expected:
        raise IngestError(f"assignment header must be {','.join(expected)}, got {','.join(header)}")
    out: dict[str, TopicAssignment] = {}
    problems = []
    for lineno, row in enumerate(reader, start=2):
        if not row or not any(c.strip() for c in row):
            continue
        try:
            pid, tid, prob = row[0].strip(), int(row[1]), float(row[2])
        except (IndexError, ValueError) as exc:
            problems.append(f"line {lineno}: malformed assignment ({exc})")
            continue
        if not 0.0 <= prob <= 1.0:
            problems.append(f"line {lineno}: probability {prob} outside [0, 1]")
            continue
        if pid in out:
            problems.append(f"line {lineno}: second assignment for paper {pid} ignored")
            continue
        out[pid] = TopicAssignment(pid, tid, prob)
    return out, problems


def parse_corpus(
    metadata: Iterable[str],
    assignments: Optional[TextIO] = None,
) -> ParseReport:
    """Parse metadata lines, attaching topic ids from the assignment table.

    Malformed lines and duplicate ids are skipped and reported, never fatal.
    Without an assignment table, any `topic_id` field in the metadata is kept.
    """
    report = ParseReport()
    first_seen: dict[str, int] = {}
    for lineno, line in enumerate(metadata, start=1):
        if not line.strip():
            continue
        try:
            rec = parse_record(json.loads(line))
        except (ValueError, TypeError) as exc:
            report.skipped.append((lineno, f"malformed record: {exc}"))
            continue
        if rec.paper_id in first_seen:
            report.skipped.append(
                (lineno, f"duplicate paper_id {rec.paper_id!r} (lines {first_seen[rec.paper_id]} and {lineno})")
            )
            continue
        first_seen[rec.paper_id] = lineno
        report.records.append(rec)

    if assignments is not None:
        table, problems = read_assignments(assignments)
        report.warnings.extend(problems)
        known = set(first_seen)
        for pid in table:
            if pid not in known:
                report.warnings.append(f"assignment references unknown paper_id {pid!r}")
        report.records = [
            _with_topic(r, table[r.paper_id].topic_id if r.paper_id in table else None)
            for r in report.records
        ]
    report.unassigned = [r.paper_id for r in report.records if r.topic_id is None]
    logger.info(
        "parsed %d records, skipped %d, %d unassigned",
        report.n_parsed, len(report.skipped), len(report.unassigned),
    )
    return report


def _with_topic(rec: PaperRecord, topic: Optional[int]) -> PaperRecord:
    if rec.topic_id == topic:
        return rec
    return PaperRecord(rec.paper_id, rec.title, rec.abstract, rec.authors, rec.categories, rec.date, topic)


def load_corpus(metadata_path, topics_path=None) -> ParseReport:
    with open(metadata_path, encoding="utf-8") as meta:
        if topics_path is None:
            return parse_corpus(meta)
        with open(topics_path, encoding="utf-8", newline="") as topics:
            return parse_corpus(meta, topics)


def filter_by_date(records: Sequence[PaperRecord], start: date, end: date) -> list[PaperRecord]:
    """Records dated within [start, end], both ends inclusive, in input order."""
    if start > end:
        raise ValueError(f"start {start} is after end {end}")
    return [r for r in records if start <= r.date <= end]


def primary_category(records: Iterable[PaperRecord]) -> Optional[str]:
    """Most frequent leading category; ties go to the lexicographically smallest code."""
    counts = Counter(r.categories[0] for r in records if r.categories)
    if not counts:
        return None
    return min(counts, key=lambda c: (-counts[c], c))


def dump_records(records: Iterable[PaperRecord]) -> Iterator[str]:
    for r in records:
        yield json.dumps(r.to_json(), sort_keys=True, ensure_ascii=False) + "\n"


def write_records(records: Iterable[PaperRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(dump_records(records))


def read_records(path) -> list[PaperRecord]:
    """Read the canonical records file written by `write_records`."""
    with open(path, encoding="utf-8") as fh:
        report = parse_corpus(fh)
    if report.skipped:
        lineno, why = report.skipped[0]
        raise IngestError(f"{path}: line {lineno}: {why}")
    return report.records


def group_by_topic(records: Iterable[PaperRecord]) -> dict[int, list[PaperRecord]]:
    groups: dict[int, list[PaperRecord]] = {}
    for r in records:
        if r.topic_id is not None:
            groups.setdefault(r.topic_id, []).append(r)
    return dict(sorted(groups.items()))
