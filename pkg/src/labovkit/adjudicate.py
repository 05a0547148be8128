"""Gold-data construction: majority voting, discussion resolution, and
corpus statistics.

A label wins a unit when it has strictly more votes than any other;
ties and three-way splits are queued for discussion.  Span membership
is voted per clause and narrative type, and decided in-runs shorter
than two clauses are queued rather than auto-fixed.  Every gold label
is traceable either to its vote tally or to an audited resolution.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import (
    AnnotatorLayer,
    Clause,
    Fragment,
    MacroLabel,
    MicroLabel,
    NarrativeSpan,
    NarrativeType,
    Speaker,
    SpanKindStats,
    macro_label_counts,
    micro_label_counts,
    span_lengths,
)

FIELD_MICRO = "micro"
FIELD_MACRO = "macro"
FIELD_SPAN = "span_membership"
VOTE_FIELDS = (FIELD_MICRO, FIELD_MACRO, FIELD_SPAN)

_FIELD_TOKENS = {
    FIELD_MICRO: {label.value for label in MicroLabel},
    FIELD_MACRO: {label.value for label in MacroLabel},
    FIELD_SPAN: {"in", "out"},
}


@dataclass(frozen=True)
class ResolutionRecord:
    """Audit trail of a discussion decision."""

    label: str
    resolvers: tuple[str, ...]
    note: str
    resolved_at: Optional[str] = None


@dataclass(frozen=True)
class VoteOutcome:
    """Vote tally for one unit and field; decided iff not queued."""

    unit: tuple[str, int]
    field: str
    decided: Optional[str]
    needs_discussion: bool
    votes: tuple[str, ...]
    unanimous: bool = False
    span_kind: Optional[NarrativeType] = None
    resolution: Optional[ResolutionRecord] = None

    def __post_init__(self) -> None:
        if (self.decided is None) != self.needs_discussion:
            raise ValueError("decided must be present exactly when not under discussion")


def _check_alignment(layers: Sequence[AnnotatorLayer]) -> None:
    if len(layers) < 2:
        raise ValueError(f"need at least 2 layers, got {len(layers)}")
    first = layers[0]
    for layer in layers[1:]:
        if layer.fragment_id != first.fragment_id or layer.masses != first.masses:
            raise ValueError(
                "layers are not aligned to a shared reference segmentation"
            )


def _tally(unit, field, votes, span_kind=None) -> VoteOutcome:
    counts = Counter(votes)
    ranked = counts.most_common()
    top_label, top_count = ranked[0]
    runner_up = ranked[1][1] if len(ranked) > 1 else 0
    if top_count > runner_up:
        return VoteOutcome(
            unit=unit,
            field=field,
            decided=top_label,
            needs_discussion=False,
            votes=tuple(sorted(votes)),
            unanimous=len(ranked) == 1 and top_count == len(votes),
            span_kind=span_kind,
        )
    return VoteOutcome(
        unit=unit,
        field=field,
        decided=None,
        needs_discussion=True,
        votes=tuple(sorted(votes)),
        span_kind=span_kind,
    )


def majority_vote(layers: Sequence[AnnotatorLayer], field: str) -> list[VoteOutcome]:
    """Vote one field across aligned layers.

    Missing labels are excluded from tallies; units where nobody voted
    produce no outcome.  For span membership, clauses are voted in or
    out per narrative type (a clause is "in" for a layer when any span
    of that type covers it), and decided in-runs shorter than two
    clauses are flipped to the discussion queue.  Output order and
    content are independent of layer order.
    """
    if field not in VOTE_FIELDS:
        raise ValueError(f"field must be one of {VOTE_FIELDS}, got {field!r}")
    _check_alignment(layers)
    fragment_id = layers[0].fragment_id
    n = layers[0].n_clauses

    if field in (FIELD_MICRO, FIELD_MACRO):
        outcomes = []
        for clause_id in range(1, n + 1):
            votes = []
            for layer in layers:
                label = getattr(layer, field).get(clause_id)
                if label is not None:
                    votes.append(label.value)
            if votes:
                outcomes.append(_tally((fragment_id, clause_id), field, votes))
        return outcomes

    outcomes = []
    for kind in NarrativeType:
        per_clause: dict[int, VoteOutcome] = {}
        for clause_id in range(1, n + 1):
            votes = []
            for layer in layers:
                inside = any(
                    s.kind is kind and s.contains(clause_id) for s in layer.spans
                )
                votes.append("in" if inside else "out")
            if "in" not in votes:
                continue
            per_clause[clause_id] = _tally(
                (fragment_id, clause_id), FIELD_SPAN, votes, span_kind=kind
            )
        for clause_id in _short_in_runs(per_clause, n):
            outcome = per_clause[clause_id]
            per_clause[clause_id] = replace(
                outcome, decided=None, needs_discussion=True, unanimous=False
            )
        outcomes.extend(per_clause[c] for c in sorted(per_clause))
    return outcomes


def _short_in_runs(per_clause: dict[int, "VoteOutcome"], n: int) -> list[int]:
    """Clause ids in decided-"in" runs shorter than the 2-clause minimum."""
    flagged = []
    run: list[int] = []
    for clause_id in range(1, n + 2):
        outcome = per_clause.get(clause_id)
        decided_in = outcome is not None and outcome.decided == "in"
        if decided_in:
            run.append(clause_id)
        else:
            if len(run) == 1:
                flagged.extend(run)
            run = []
    return flagged


def resolve_discussion(
    outcome: VoteOutcome,
    resolution: str,
    resolvers: Iterable[str],
    note: str,
    resolved_at: Optional[str] = None,
) -> VoteOutcome:
    """Settle a queued outcome; returns the decided outcome with audit."""
    if not outcome.needs_discussion:
        raise ValueError(f"outcome for unit {outcome.unit} is already decided")
    allowed = _FIELD_TOKENS[outcome.field]
    if resolution not in allowed:
        raise ValueError(
            f"resolution {resolution!r} is not a valid {outcome.field} value "
            f"(expected one of {sorted(allowed)})"
        )
    record = ResolutionRecord(
        label=resolution,
        resolvers=tuple(resolvers),
        note=note,
        resolved_at=resolved_at,
    )
    return replace(
        outcome,
        decided=resolution,
        needs_discussion=False,
        resolution=record,
    )


def build_gold_fragment(
    base: Fragment, outcomes: Sequence[VoteOutcome]
) -> Fragment:
    """Assemble a gold fragment from decided outcomes.

    ``base`` supplies clause ids, speakers, and texts (typically a layer
    materialized over the reference segmentation); every outcome must be
    decided.  Spans are rebuilt from contiguous in-runs per kind.
    """
    pending = [o for o in outcomes if o.needs_discussion]
    if pending:
        units = ", ".join(f"{o.unit[1]}/{o.field}" for o in pending[:5])
        raise ValueError(
            f"{len(pending)} outcome(s) still need discussion (first: {units})"
        )
    micro: dict[int, MicroLabel] = {}
    macro: dict[int, MacroLabel] = {}
    in_span: dict[NarrativeType, set[int]] = {kind: set() for kind in NarrativeType}
    for outcome in outcomes:
        clause_id = outcome.unit[1]
        if outcome.field == FIELD_MICRO:
            micro[clause_id] = MicroLabel(outcome.decided)
        elif outcome.field == FIELD_MACRO:
            macro[clause_id] = MacroLabel(outcome.decided)
        elif outcome.decided == "in":
            assert outcome.span_kind is not None
            in_span[outcome.span_kind].add(clause_id)
    spans = []
    for kind, ids in in_span.items():
        for start, end in _runs(sorted(ids)):
            spans.append(NarrativeSpan(kind, start, end))
    clauses = tuple(
        Clause(
            id=c.id,
            speaker=c.speaker,
            text=c.text,
            micro=micro.get(c.id),
            macro=macro.get(c.id),
        )
        for c in base.clauses
    )
    return Fragment(
        fragment_id=base.fragment_id,
        topic=base.topic,
        clauses=clauses,
        spans=tuple(spans),
    )


def _runs(ids: list[int]) -> list[tuple[int, int]]:
    runs = []
    for clause_id in ids:
        if runs and clause_id == runs[-1][1] + 1:
            runs[-1] = (runs[-1][0], clause_id)
        else:
            runs.append((clause_id, clause_id))
    return runs


@dataclass(frozen=True)
class GoldCorpusStats:
    """Corpus-level label and span distributions.

    ``micro_counts`` maps each micro label to its count and exact share
    of micro-labeled clauses; the report layer truncates shares to whole
    percent for display, matching the published table convention.
    """

    macro_counts: dict[MacroLabel, int]
    micro_counts: dict[MicroLabel, tuple[int, Optional[Fraction]]]
    micro_labeled_total: int
    span_stats: dict[NarrativeType, SpanKindStats]
    clause_totals: tuple[int, int, int]


def corpus_stats(gold: Sequence[Fragment]) -> GoldCorpusStats:
    """Count labels, spans, and speaker totals over gold fragments."""
    macro = macro_label_counts(gold)
    micro_raw = micro_label_counts(gold)
    micro_total = sum(micro_raw.values())
    micro = {
        label: (
            count,
            Fraction(count, micro_total) if micro_total else None,
        )
        for label, count in micro_raw.items()
    }
    total = sum(f.n_clauses for f in gold)
    interviewee = sum(
        1 for f in gold for c in f.clauses if c.speaker is Speaker.INTERVIEWEE
    )
    return GoldCorpusStats(
        macro_counts=macro,
        micro_counts=micro,
        micro_labeled_total=micro_total,
        span_stats=span_lengths(gold),
        clause_totals=(total, interviewee, total - interviewee),
    )
