"""Columnar annotation table format (`.lat.tsv`).

One row per clause, eight tab-separated columns: clause index, speaker,
text, one span lane per narrative type (S / E / SE markers), then micro
and macro labels.  Optional `# key: value` metadata lines precede the
header.  Serialization is canonical: metadata lines for fragment id and
topic, the fixed header, single tab separators, canonical label tokens,
and a trailing newline.  See docs/format.md for the full grammar.

Parsing is total: any byte stream yields either a Fragment or a
:class:`LatParseError` naming the offending line.  Semantic breaches
(one-clause spans, labeled interviewer rows, ...) parse fine and are
left to the lint engine.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import BinaryIO, Optional, Union

from .model import (
    Clause,
    Fragment,
    MacroLabel,
    MicroLabel,
    NarrativeSpan,
    NarrativeType,
    Speaker,
    Topic,
)
from .textnorm import normalize_text

HEADER_COLUMNS = (
    "idx",
    "speaker",
    "text",
    "story",
    "habitual",
    "hypothetical",
    "micro",
    "macro",
)
HEADER_LINE = "\t".join(HEADER_COLUMNS)

_SPAN_KINDS = (NarrativeType.STORY, NarrativeType.HABITUAL, NarrativeType.HYPOTHETICAL)

_SPEAKER_TOKENS = {
    "ir": Speaker.INTERVIEWER,
    "ie": Speaker.INTERVIEWEE,
    "interviewer": Speaker.INTERVIEWER,
    "interviewee": Speaker.INTERVIEWEE,
}
_MICRO_TOKENS = {
    "n": MicroLabel.NARRATIVE,
    "narrative": MicroLabel.NARRATIVE,
    "r": MicroLabel.RESTRICTED,
    "restricted": MicroLabel.RESTRICTED,
    "f": MicroLabel.FREE,
    "free": MicroLabel.FREE,
}
_MACRO_TOKENS = {
    "abs": MacroLabel.ABSTRACT,
    "abstract": MacroLabel.ABSTRACT,
    "ori": MacroLabel.ORIENTATION,
    "orientation": MacroLabel.ORIENTATION,
    "com": MacroLabel.COMPLICATION,
    "complication": MacroLabel.COMPLICATION,
    "eva": MacroLabel.EVALUATION,
    "evaluation": MacroLabel.EVALUATION,
    "res": MacroLabel.RESOLUTION,
    "resolution": MacroLabel.RESOLUTION,
    "cod": MacroLabel.CODA,
    "coda": MacroLabel.CODA,
}
_TOPIC_TOKENS = {t.value.lower(): t for t in Topic}


class LatParseError(ValueError):
    """Malformed annotation table; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class LatSerializeError(ValueError):
    """Fragment cannot be represented in the columnar format."""


@dataclass(frozen=True)
class LatRow:
    """One parsed table row, tokens canonicalized but uninterpreted."""

    idx: int
    speaker: Speaker
    text: str
    story: str
    habitual: str
    hypothetical: str
    micro: Optional[MicroLabel]
    macro: Optional[MacroLabel]


def _decode(data: Union[bytes, str]) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise LatParseError(f"not valid UTF-8: {exc}") from None


def parse_lat(source: Union[bytes, str, BinaryIO]) -> Fragment:
    """Parse an annotation table into a Fragment.

    Raises :class:`LatParseError` on structural problems: bad header,
    wrong column count, unknown tokens, duplicate or non-contiguous
    clause indices, and unbalanced span markers.
    """
    if hasattr(source, "read"):
        source = source.read()  # type: ignore[union-attr]
    text = _decode(source)
    text = text.replace("﻿", "")
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")

    fragment_id = ""
    topic = Topic.OTHER
    lineno = 0
    header_seen = False
    rows: list[LatRow] = []

    for raw_line in lines:
        lineno += 1
        if raw_line == "":
            continue
        if not header_seen:
            if raw_line.startswith("#"):
                key, _, value = raw_line[1:].partition(":")
                key = key.strip().lower()
                value = value.strip()
                if key == "fragment_id":
                    fragment_id = value
                elif key == "topic":
                    try:
                        topic = _TOPIC_TOKENS[value.lower()]
                    except KeyError:
                        raise LatParseError(f"unknown topic {value!r}", lineno)
                continue
            if raw_line.split("\t") != list(HEADER_COLUMNS):
                raise LatParseError(
                    f"expected header {HEADER_LINE!r}, got {raw_line!r}", lineno
                )
            header_seen = True
            continue
        rows.append(_parse_row(raw_line, lineno, expected_idx=len(rows) + 1))

    if not header_seen:
        raise LatParseError("missing header row")

    clauses = tuple(
        Clause(r.idx, r.speaker, r.text, micro=r.micro, macro=r.macro) for r in rows
    )
    spans = _reconstruct_spans(rows)
    return Fragment(fragment_id=fragment_id, topic=topic, clauses=clauses, spans=spans)


def _parse_row(raw_line: str, lineno: int, expected_idx: int) -> LatRow:
    cells = raw_line.split("\t")
    if len(cells) != len(HEADER_COLUMNS):
        raise LatParseError(
            f"expected {len(HEADER_COLUMNS)} columns, got {len(cells)}", lineno
        )
    idx_token = cells[0].strip()
    try:
        idx = int(idx_token)
    except ValueError:
        raise LatParseError(f"clause index {idx_token!r} is not an integer", lineno)
    if idx < expected_idx:
        raise LatParseError(f"duplicate clause index {idx}", lineno)
    if idx != expected_idx:
        raise LatParseError(
            f"clause index {idx} breaks the 1..n sequence (expected {expected_idx})",
            lineno,
        )
    speaker_token = cells[1].strip().lower()
    if speaker_token not in _SPEAKER_TOKENS:
        raise LatParseError(f"unknown speaker token {cells[1]!r}", lineno)
    span_cells = []
    for col, cell in zip(("story", "habitual", "hypothetical"), cells[3:6]):
        token = cell.strip().upper()
        if token not in ("", "S", "E", "SE"):
            raise LatParseError(f"unknown {col} span token {cell!r}", lineno)
        span_cells.append(token)
    micro_token = cells[6].strip().lower()
    if micro_token and micro_token not in _MICRO_TOKENS:
        raise LatParseError(f"unknown micro label {cells[6]!r}", lineno)
    macro_token = cells[7].strip().lower()
    if macro_token and macro_token not in _MACRO_TOKENS:
        raise LatParseError(f"unknown macro label {cells[7]!r}", lineno)
    return LatRow(
        idx=idx,
        speaker=_SPEAKER_TOKENS[speaker_token],
        text=normalize_text(cells[2]),
        story=span_cells[0],
        habitual=span_cells[1],
        hypothetical=span_cells[2],
        micro=_MICRO_TOKENS[micro_token] if micro_token else None,
        macro=_MACRO_TOKENS[macro_token] if macro_token else None,
    )


def _reconstruct_spans(rows: list[LatRow]) -> tuple[NarrativeSpan, ...]:
    spans: list[NarrativeSpan] = []
    for kind, column in zip(_SPAN_KINDS, ("story", "habitual", "hypothetical")):
        open_at: Optional[int] = None
        for row in rows:
            token = getattr(row, column)
            if token == "S":
                if open_at is not None:
                    raise LatParseError(
                        f"{kind.value} span marked S at clause {row.idx} while the span "
                        f"opened at clause {open_at} is still unterminated"
                    )
                open_at = row.idx
            elif token == "E":
                if open_at is None:
                    raise LatParseError(
                        f"{kind.value} span marked E at clause {row.idx} without a "
                        f"preceding S"
                    )
                spans.append(NarrativeSpan(kind, open_at, row.idx))
                open_at = None
            elif token == "SE":
                if open_at is not None:
                    raise LatParseError(
                        f"{kind.value} span marked SE at clause {row.idx} while the span "
                        f"opened at clause {open_at} is still unterminated"
                    )
                spans.append(NarrativeSpan(kind, row.idx, row.idx))
        if open_at is not None:
            raise LatParseError(
                f"unterminated {kind.value} span opened at clause {open_at}"
            )
    return tuple(spans)


def serialize_lat(fragment: Fragment) -> bytes:
    """Canonical byte serialization; inverse of :func:`parse_lat`.

    Raises :class:`LatSerializeError` when the fragment cannot be put in
    columnar form: clause text containing tabs or line breaks, spans out
    of the clause range, or same-kind spans sharing rows.
    """
    cells_by_kind: dict[NarrativeType, dict[int, str]] = {k: {} for k in _SPAN_KINDS}
    n = fragment.n_clauses
    by_kind: dict[NarrativeType, list] = {k: [] for k in _SPAN_KINDS}
    for span in fragment.spans:
        if not (1 <= span.start <= n and 1 <= span.end <= n and span.start <= span.end):
            raise LatSerializeError(
                f"span {span.kind.value} ({span.start}, {span.end}) out of range "
                f"for {n} clauses"
            )
        by_kind[span.kind].append(span)
    for kind, kind_spans in by_kind.items():
        kind_spans.sort(key=lambda s: (s.start, s.end))
        for prev, span in zip(kind_spans, kind_spans[1:]):
            if span.start <= prev.end:
                raise LatSerializeError(
                    f"{kind.value} spans ({prev.start}, {prev.end}) and "
                    f"({span.start}, {span.end}) collide; same-kind spans must "
                    f"not overlap in the columnar format"
                )
        lane = cells_by_kind[kind]
        for span in kind_spans:
            if span.start == span.end:
                lane[span.start] = "SE"
            else:
                lane[span.start] = "S"
                lane[span.end] = "E"

    out = io.StringIO()
    out.write(f"# fragment_id: {fragment.fragment_id}\n")
    out.write(f"# topic: {fragment.topic.value}\n")
    out.write(HEADER_LINE + "\n")
    for clause in fragment.clauses:
        if any(ch in clause.text for ch in "\t\n\r"):
            raise LatSerializeError(
                f"clause {clause.id} text contains a tab or line break; "
                f"normalize it first"
            )
        row = (
            str(clause.id),
            clause.speaker.value,
            clause.text,
            cells_by_kind[NarrativeType.STORY].get(clause.id, ""),
            cells_by_kind[NarrativeType.HABITUAL].get(clause.id, ""),
            cells_by_kind[NarrativeType.HYPOTHETICAL].get(clause.id, ""),
            clause.micro.value if clause.micro else "",
            clause.macro.value if clause.macro else "",
        )
        out.write("\t".join(row) + "\n")
    return out.getvalue().encode("utf-8")
