"""Domain types for transcripts, clauses, narrative spans, and labels.

The model mirrors a columnar annotation table: one row per clause, with
per-narrative-type span lanes plus micro and macro function labels.
Values are immutable after construction; edits build new objects.

Construction is deliberately permissive: a :class:`Fragment` may violate
schema invariants (for example a one-clause span).  Enforcement lives in
:mod:`labovkit.lints`, whose Error-level findings define validity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional


class Speaker(Enum):
    """Who produced a clause.  Interviewer units are context only."""

    INTERVIEWER = "IR"
    INTERVIEWEE = "IE"


class MicroLabel(Enum):
    """Temporal character of the information a clause conveys."""

    NARRATIVE = "N"
    RESTRICTED = "R"
    FREE = "F"


class MacroLabel(Enum):
    """Discourse function of a clause within the whole narrative."""

    ABSTRACT = "Abs"
    ORIENTATION = "Ori"
    COMPLICATION = "Com"
    EVALUATION = "Eva"
    RESOLUTION = "Res"
    CODA = "Cod"

    @property
    def full_name(self) -> str:
        return _MACRO_FULL_NAMES[self]


_MACRO_FULL_NAMES = {
    MacroLabel.ABSTRACT: "Abstract",
    MacroLabel.ORIENTATION: "Orientation",
    MacroLabel.COMPLICATION: "Complication",
    MacroLabel.EVALUATION: "Evaluation",
    MacroLabel.RESOLUTION: "Resolution",
    MacroLabel.CODA: "Coda",
}


class NarrativeType(Enum):
    """Genre of a narrative span."""

    STORY = "Story"
    HABITUAL = "Habitual"
    HYPOTHETICAL = "Hypothetical"


class Topic(Enum):
    """Interview topic a fragment responds to."""

    HAPPINESS_HARDSHIP = "HappinessHardship"
    CHALLENGES = "Challenges"
    OTHER = "Other"


class SpanRangeError(ValueError):
    """A span references clause ids outside its fragment."""


@dataclass(frozen=True)
class Clause:
    """One annotation unit: a stretch of speech by a single speaker.

    ``id`` is the 1-based ordinal within the fragment.  Interviewer
    clauses are stored whole (never segmented) and carry no labels.
    """

    id: int
    speaker: Speaker
    text: str
    micro: Optional[MicroLabel] = None
    macro: Optional[MacroLabel] = None


@dataclass(frozen=True)
class NarrativeSpan:
    """Contiguous clause range of one narrative type, S mark to E mark.

    ``end`` is inclusive.  A legal span covers at least two clauses.
    """

    kind: NarrativeType
    start: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def contains(self, clause_id: int) -> bool:
        return self.start <= clause_id <= self.end

    def overlaps(self, other: "NarrativeSpan") -> bool:
        return self.start <= other.end and other.start <= self.end


_KIND_ORDER = {kind: i for i, kind in enumerate(NarrativeType)}


@dataclass(frozen=True)
class Fragment:
    """One interview segment: ordered clauses plus narrative spans.

    Spans are kept in canonical order (by kind, then start, then end) so
    that equal annotations compare equal regardless of insertion order.
    """

    fragment_id: str
    topic: Topic
    clauses: tuple[Clause, ...]
    spans: tuple[NarrativeSpan, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", tuple(self.clauses))
        ordered = sorted(self.spans, key=lambda s: (_KIND_ORDER[s.kind], s.start, s.end))
        object.__setattr__(self, "spans", tuple(ordered))

    def clause(self, clause_id: int) -> Clause:
        for c in self.clauses:
            if c.id == clause_id:
                return c
        raise KeyError(f"no clause {clause_id} in fragment {self.fragment_id!r}")

    def spans_containing(self, clause_id: int) -> tuple[NarrativeSpan, ...]:
        return tuple(s for s in self.spans if s.contains(clause_id))

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)


@dataclass(frozen=True)
class AnnotatorLayer:
    """One annotator's full labeling of a shared transcript fragment.

    ``masses`` is the annotator's clause segmentation over the fragment's
    normalized raw text (see :mod:`labovkit.segmetrics`); clause ids used
    in ``spans``, ``micro`` and ``macro`` index into that segmentation,
    1-based.  During the reference-segmentation stage all layers simply
    carry identical masses.
    """

    annotator_id: str
    fragment_id: str
    masses: tuple[int, ...]
    spans: tuple[NarrativeSpan, ...] = ()
    micro: Mapping[int, MicroLabel] = field(default_factory=dict)
    macro: Mapping[int, MacroLabel] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "masses", tuple(self.masses))
        ordered = sorted(self.spans, key=lambda s: (_KIND_ORDER[s.kind], s.start, s.end))
        object.__setattr__(self, "spans", tuple(ordered))
        object.__setattr__(self, "micro", dict(self.micro))
        object.__setattr__(self, "macro", dict(self.macro))

    @property
    def n_clauses(self) -> int:
        return len(self.masses)

    def referenced_clause_ids(self) -> set[int]:
        ids: set[int] = set()
        for s in self.spans:
            ids.update((s.start, s.end))
        ids.update(self.micro)
        ids.update(self.macro)
        return ids


def clauses_in_span(fragment: Fragment, span: NarrativeSpan) -> tuple[Clause, ...]:
    """Clauses covered by ``span``, in order.

    Raises :class:`SpanRangeError` if the span's ids fall outside the
    fragment's 1..n clause range.
    """
    n = fragment.n_clauses
    if not (1 <= span.start <= n and 1 <= span.end <= n and span.start <= span.end):
        raise SpanRangeError(
            f"span {span.kind.value} ({span.start}, {span.end}) out of range "
            f"for fragment {fragment.fragment_id!r} with {n} clauses"
        )
    return tuple(c for c in fragment.clauses if span.contains(c.id))


@dataclass(frozen=True)
class SpanKindStats:
    """Span count, exact mean length, and clause total for one kind."""

    count: int
    mean_length: Optional[Fraction]
    clauses: int


def span_lengths(fragments: Iterable[Fragment]) -> dict[NarrativeType, SpanKindStats]:
    """Per-kind span counts and mean clause counts over a corpus.

    Means are exact rationals; display rounding happens in the report
    layer.  Kinds with no spans report count 0 and an absent mean.
    """
    counts = {kind: 0 for kind in NarrativeType}
    totals = {kind: 0 for kind in NarrativeType}
    for fragment in fragments:
        for span in fragment.spans:
            counts[span.kind] += 1
            totals[span.kind] += span.length
    out: dict[NarrativeType, SpanKindStats] = {}
    for kind in NarrativeType:
        mean = Fraction(totals[kind], counts[kind]) if counts[kind] else None
        out[kind] = SpanKindStats(counts[kind], mean, totals[kind])
    return out


def interviewee_runs(fragment: Fragment) -> list[tuple[Clause, ...]]:
    """Maximal runs of consecutive interviewee clauses."""
    runs: list[tuple[Clause, ...]] = []
    current: list[Clause] = []
    for clause in fragment.clauses:
        if clause.speaker is Speaker.INTERVIEWEE:
            current.append(clause)
        elif current:
            runs.append(tuple(current))
            current = []
    if current:
        runs.append(tuple(current))
    return runs


def micro_label_counts(fragments: Iterable[Fragment]) -> dict[MicroLabel, int]:
    counts = {label: 0 for label in MicroLabel}
    for fragment in fragments:
        for clause in fragment.clauses:
            if clause.micro is not None:
                counts[clause.micro] += 1
    return counts


def macro_label_counts(fragments: Iterable[Fragment]) -> dict[MacroLabel, int]:
    counts = {label: 0 for label in MacroLabel}
    for fragment in fragments:
        for clause in fragment.clauses:
            if clause.macro is not None:
                counts[clause.macro] += 1
    return counts
