"""Checkable guideline rules.

Three families:

* structural lints (Error/Warning): the machine-checkable schema rules.
  A fragment is valid exactly when :func:`lint_structure` yields no
  Error-level finding; :func:`validate_fragment` is that predicate.
* segmentation cue lints (Warning): surface-cue heuristics for Japanese
  clause segmentation (formal-noun topic/subject role, unmarked quotes).
  Cue matching is literal substring search over normalized text; ASCII
  (romanized) patterns additionally require word boundaries so that
  e.g. "was" never matches the topic particle "wa".
* shape hints (Info): soft macro-structure tendencies and span-onset
  discourse markers.

Every finding cites a rule id registered in :data:`RULES`; the rule
table with anchors into docs/rules.md is the one source of truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import (
    Clause,
    Fragment,
    MacroLabel,
    MicroLabel,
    NarrativeSpan,
    NarrativeType,
    Speaker,
)
from .segmetrics import Segmentation


class Severity(Enum):
    ERROR = "Error"
    WARNING = "Warning"
    INFO = "Info"


@dataclass(frozen=True)
class Rule:
    rule_id: str
    severity: Severity
    summary: str
    guideline_ref: str
    active: bool = True


RULES: dict[str, Rule] = {
    r.rule_id: r
    for r in [
        Rule(
            "clause-empty-text",
            Severity.ERROR,
            "clause text is empty after normalization",
            "model.clauses",
        ),
        Rule(
            "clause-id-sequence",
            Severity.ERROR,
            "clause ids must run 1..n without gaps or repeats",
            "model.clauses",
        ),
        Rule(
            "span-bounds",
            Severity.ERROR,
            "span references clause ids outside the fragment",
            "spans.marking",
        ),
        Rule(
            "span-min-length",
            Severity.ERROR,
            "a narrative span must cover at least two clauses",
            "spans.min-length",
        ),
        Rule(
            "same-kind-overlap",
            Severity.ERROR,
            "spans of one narrative type must not overlap",
            "spans.overlap",
        ),
        Rule(
            "interviewer-in-span",
            Severity.ERROR,
            "interviewer units belong to no narrative span",
            "speakers.interviewer",
        ),
        Rule(
            "interviewer-labeled",
            Severity.ERROR,
            "interviewer units carry no micro or macro labels",
            "speakers.interviewer",
        ),
        Rule(
            "label-outside-span",
            Severity.ERROR,
            "only clauses inside a narrative span are labeled",
            "labels.scope",
        ),
        Rule(
            "hypothetical-no-micro",
            Severity.ERROR,
            "clauses only inside hypothetical spans take no micro label",
            "labels.hypothetical",
        ),
        Rule(
            "cross-kind-overlap",
            Severity.WARNING,
            "spans of different narrative types overlap here",
            "spans.overlap",
        ),
        Rule(
            "formal-noun-topic-split",
            Severity.WARNING,
            "formal noun in topic role suggests a clause boundary",
            "segmentation.formal-nouns",
        ),
        Rule(
            "formal-noun-subject-merge",
            Severity.WARNING,
            "formal noun in subject/argument role suggests merging",
            "segmentation.formal-nouns",
        ),
        Rule(
            "quote-unmarked-merge",
            Severity.WARNING,
            "boundary inside a quotation without a quotative marker",
            "segmentation.quotes",
        ),
        Rule(
            "abstract-position",
            Severity.INFO,
            "abstracts usually open their span",
            "macro.position",
        ),
        Rule(
            "coda-position",
            Severity.INFO,
            "codas usually close their span",
            "macro.position",
        ),
        Rule(
            "complication-micro-mismatch",
            Severity.INFO,
            "complications and resolutions usually carry micro label N",
            "macro.micro-crosscheck",
        ),
        Rule(
            "span-no-complication",
            Severity.INFO,
            "a labeled span usually contains a complication",
            "macro.completeness",
        ),
        Rule(
            "possible-onset",
            Severity.INFO,
            "onset discourse marker outside any span",
            "spans.onset-markers",
        ),
        Rule(
            "coda-reference-time",
            Severity.INFO,
            "reserved: tense-based coda detection is not implemented",
            "macro.position",
            active=False,
        ),
    ]
}


@dataclass(frozen=True)
class LintFinding:
    """One rule violation or hint, anchored to a clause or atom position."""

    rule_id: str
    severity: Severity
    fragment_id: str
    message: str
    guideline_ref: str
    clause_id: Optional[int] = None
    position: Optional[int] = None


class FragmentValidationError(ValueError):
    """Fragment rejected by the structural rules."""

    def __init__(self, findings: Sequence[LintFinding]):
        self.findings = tuple(findings)
        lines = "; ".join(f"{f.rule_id}: {f.message}" for f in findings)
        super().__init__(f"invalid fragment: {lines}")


def _finding(rule_id: str, fragment_id: str, message: str, clause_id=None, position=None):
    rule = RULES[rule_id]
    return LintFinding(
        rule_id=rule_id,
        severity=rule.severity,
        fragment_id=fragment_id,
        message=message,
        guideline_ref=rule.guideline_ref,
        clause_id=clause_id,
        position=position,
    )


def _sort_key(finding: LintFinding):
    return (
        finding.clause_id if finding.clause_id is not None else 1 << 30,
        finding.position if finding.position is not None else 0,
        finding.rule_id,
        finding.message,
    )


# ---------------------------------------------------------------------------
# Cue configuration.

def _default_fraction() -> Fraction:
    return Fraction(1, 4)


@dataclass(frozen=True)
class RuleConfig:
    """Tunable cue lists; see docs/rules.md for the defaults' rationale."""

    formal_nouns: tuple[str, ...] = (
        "toki",
        "koro",
        "baai",
        "tokoro",
        "とき",
        "時",
        "ころ",
        "頃",
        "場合",
        "ところ",
    )
    topic_particles: tuple[str, ...] = ("wa", "は")
    subject_particles: tuple[str, ...] = ("ga", "no", "が", "の")
    quote_pairs: tuple[tuple[str, str], ...] = (("「", "」"), ("“", "”"), ('"', '"'))
    quote_markers: tuple[str, ...] = ("と", "って", " to", " tte")
    onset_markers: tuple[str, ...] = (
        "a, sou da",
        "sono toki wa",
        "あ、そうだ",
        "そのときは",
        "その時は",
    )
    position_fraction: Fraction = field(default_factory=_default_fraction)

    @classmethod
    def from_dict(cls, doc: dict) -> "RuleConfig":
        kwargs = {}
        for key in (
            "formal_nouns",
            "topic_particles",
            "subject_particles",
            "quote_markers",
            "onset_markers",
        ):
            if key in doc:
                kwargs[key] = tuple(str(x) for x in doc[key])
        if "quote_pairs" in doc:
            kwargs["quote_pairs"] = tuple(
                (str(a), str(b)) for a, b in doc["quote_pairs"]
            )
        if "position_fraction" in doc:
            num, den = doc["position_fraction"]
            kwargs["position_fraction"] = Fraction(int(num), int(den))
        return cls(**kwargs)


DEFAULT_CONFIG = RuleConfig()


# ---------------------------------------------------------------------------
# Structural lints.

def lint_structure(fragment: Fragment) -> list[LintFinding]:
    """Schema rules; Error findings define fragment invalidity."""
    out: list[LintFinding] = []
    fid = fragment.fragment_id
    n = fragment.n_clauses

    for position, clause in enumerate(fragment.clauses, start=1):
        if clause.id != position:
            out.append(
                _finding(
                    "clause-id-sequence",
                    fid,
                    f"clause at position {position} has id {clause.id}",
                    clause_id=clause.id,
                )
            )
        if not clause.text.strip():
            out.append(
                _finding(
                    "clause-empty-text",
                    fid,
                    f"clause {clause.id} has no text",
                    clause_id=clause.id,
                )
            )

    in_range: list[NarrativeSpan] = []
    for span in fragment.spans:
        if not (1 <= span.start <= n and 1 <= span.end <= n and span.start <= span.end):
            out.append(
                _finding(
                    "span-bounds",
                    fid,
                    f"{span.kind.value} span ({span.start}, {span.end}) out of range "
                    f"for {n} clauses",
                    clause_id=min(span.start, n) if n else None,
                )
            )
            continue
        in_range.append(span)
        if span.length < 2:
            out.append(
                _finding(
                    "span-min-length",
                    fid,
                    f"{span.kind.value} span at clause {span.start} covers only "
                    f"{span.length} clause(s); spans need at least 2",
                    clause_id=span.start,
                )
            )
        for clause in fragment.clauses:
            if span.contains(clause.id) and clause.speaker is Speaker.INTERVIEWER:
                out.append(
                    _finding(
                        "interviewer-in-span",
                        fid,
                        f"{span.kind.value} span ({span.start}, {span.end}) covers "
                        f"interviewer clause {clause.id}",
                        clause_id=clause.id,
                    )
                )

    for i, a in enumerate(in_range):
        for b in in_range[i + 1 :]:
            if not a.overlaps(b):
                continue
            at = max(a.start, b.start)
            if a.kind is b.kind:
                out.append(
                    _finding(
                        "same-kind-overlap",
                        fid,
                        f"{a.kind.value} spans ({a.start}, {a.end}) and "
                        f"({b.start}, {b.end}) overlap",
                        clause_id=at,
                    )
                )
            else:
                out.append(
                    _finding(
                        "cross-kind-overlap",
                        fid,
                        f"{a.kind.value} span ({a.start}, {a.end}) and "
                        f"{b.kind.value} span ({b.start}, {b.end}) overlap; "
                        f"check this nesting is intended",
                        clause_id=at,
                    )
                )

    for clause in fragment.clauses:
        labeled = clause.micro is not None or clause.macro is not None
        if clause.speaker is Speaker.INTERVIEWER:
            if labeled:
                out.append(
                    _finding(
                        "interviewer-labeled",
                        fid,
                        f"interviewer clause {clause.id} carries labels",
                        clause_id=clause.id,
                    )
                )
            continue
        containing = [s for s in in_range if s.contains(clause.id)]
        if labeled and not containing:
            out.append(
                _finding(
                    "label-outside-span",
                    fid,
                    f"clause {clause.id} is labeled but lies in no span",
                    clause_id=clause.id,
                )
            )
        if (
            clause.micro is not None
            and containing
            and all(s.kind is NarrativeType.HYPOTHETICAL for s in containing)
        ):
            out.append(
                _finding(
                    "hypothetical-no-micro",
                    fid,
                    f"clause {clause.id} lies only in hypothetical spans and must "
                    f"not carry a micro label",
                    clause_id=clause.id,
                )
            )

    return sorted(out, key=_sort_key)


def validate_fragment(fragment: Fragment) -> None:
    """Raise :class:`FragmentValidationError` unless the fragment is valid.

    Validity is defined as :func:`lint_structure` yielding no Error.
    """
    errors = [f for f in lint_structure(fragment) if f.severity is Severity.ERROR]
    if errors:
        raise FragmentValidationError(errors)


def is_valid_fragment(fragment: Fragment) -> bool:
    return not any(
        f.severity is Severity.ERROR for f in lint_structure(fragment)
    )


# ---------------------------------------------------------------------------
# Segmentation cue lints.

def _is_ascii(token: str) -> bool:
    return token.isascii()


def _word_guarded(text: str, start: int, end: int) -> bool:
    """ASCII patterns must not sit inside a larger ASCII word."""
    if start > 0 and text[start - 1].isascii() and text[start - 1].isalpha():
        return False
    if end < len(text) and text[end].isascii() and text[end].isalpha():
        return False
    return True


def _find_cues(text: str, nouns, particles) -> list[tuple[int, int]]:
    """(start, end) 0-based half-open matches of noun+particle phrases."""
    hits: dict[int, tuple[int, int]] = {}
    for noun in nouns:
        for particle in particles:
            if _is_ascii(noun) != _is_ascii(particle):
                continue
            pattern = f"{noun} {particle}" if _is_ascii(noun) else f"{noun}{particle}"
            search_from = 0
            while True:
                at = text.find(pattern, search_from)
                if at < 0:
                    break
                end = at + len(pattern)
                if not _is_ascii(pattern) or _word_guarded(text, at, end):
                    best = hits.get(end)
                    if best is None or at < best[0]:
                        hits[end] = (at, end)
                search_from = at + 1
    return sorted(hits.values())


def _find_quotes(text: str, pairs) -> list[tuple[int, int]]:
    """(open, close) 0-based char indices of quotation marks."""
    spans = []
    for opener, closer in pairs:
        search_from = 0
        while True:
            at = text.find(opener, search_from)
            if at < 0:
                break
            close = text.find(closer, at + 1)
            if close < 0:
                break
            spans.append((at, close))
            search_from = close + 1
    return sorted(spans)


def _in_interviewer_range(position: int, interviewer_ranges) -> bool:
    return any(start < position <= end for start, end in interviewer_ranges)


def lint_segmentation_cues(
    raw_text: str,
    segmentation: Segmentation,
    fragment_id: str = "",
    interviewer_ranges: Sequence[tuple[int, int]] = (),
    config: RuleConfig = DEFAULT_CONFIG,
    position_offset: int = 0,
    clause_of_position=None,
) -> list[LintFinding]:
    """Surface cues that contradict the given segmentation.

    ``raw_text`` must be normalized and ``segmentation`` must cover it.
    Findings inside ``interviewer_ranges`` (half-open atom ranges) are
    suppressed: interviewer units are never segmented.
    """
    if segmentation.atoms != len(raw_text):
        raise ValueError(
            f"segmentation covers {segmentation.atoms} atoms, text has {len(raw_text)}"
        )
    boundaries = set(segmentation.boundaries())
    out: list[LintFinding] = []

    def emit(rule_id: str, message: str, position: int) -> None:
        if _in_interviewer_range(position, interviewer_ranges):
            return
        clause_id = clause_of_position(position) if clause_of_position else None
        out.append(
            _finding(
                rule_id,
                fragment_id,
                message,
                clause_id=clause_id,
                position=position + position_offset,
            )
        )

    n = len(raw_text)
    for start, end in _find_cues(raw_text, config.formal_nouns, config.topic_particles):
        phrase = raw_text[start:end]
        # `end` is 0-based half-open, so the last phrase atom is position `end`
        if end >= n:
            continue
        if end not in boundaries and end + 1 not in boundaries:
            emit(
                "formal-noun-topic-split",
                f"topic phrase {phrase!r} is not followed by a clause boundary; "
                f"formal-noun topics are segmented separately",
                end,
            )
    for start, end in _find_cues(raw_text, config.formal_nouns, config.subject_particles):
        phrase = raw_text[start:end]
        if end in boundaries or (end < n and end + 1 in boundaries):
            emit(
                "formal-noun-subject-merge",
                f"subject phrase {phrase!r} is followed by a clause boundary; "
                f"formal nouns in subject or argument role are not segmented",
                end if end in boundaries else end + 1,
            )
    for open_at, close_at in _find_quotes(raw_text, config.quote_pairs):
        window = raw_text[close_at + 1 : close_at + 7]
        if any(marker in window for marker in config.quote_markers):
            continue
        for position in sorted(boundaries):
            if open_at + 1 <= position <= close_at:
                emit(
                    "quote-unmarked-merge",
                    f"clause boundary inside a quotation with no quotative marker; "
                    f"unmarked quotes are not segmented",
                    position,
                )

    return sorted(out, key=_sort_key)


def _fragment_cue_inputs(fragment: Fragment):
    """Per interviewee-run analysis text, cut positions, and clause map."""
    runs = []
    current: list[Clause] = []
    for clause in fragment.clauses:
        if clause.speaker is Speaker.INTERVIEWEE:
            current.append(clause)
        else:
            if current:
                runs.append(current)
            current = []
    if current:
        runs.append(current)
    for run in runs:
        text = " ".join(c.text for c in run)
        boundaries = []
        ranges = []
        offset = 0
        for i, clause in enumerate(run):
            start = offset + (1 if i else 0)
            end = start + len(clause.text)
            ranges.append((clause.id, start, end))
            if i < len(run) - 1:
                boundaries.append(end)
            offset = end
        if not text:
            continue

        def clause_of(position: int, ranges=tuple(ranges)) -> Optional[int]:
            for clause_id, start, end in ranges:
                if start < position <= end + 1:
                    return clause_id
            return ranges[-1][0] if ranges else None

        yield text, boundaries, clause_of


def cue_findings_for_fragment(
    fragment: Fragment, config: RuleConfig = DEFAULT_CONFIG
) -> list[LintFinding]:
    """Run the segmentation cue lints over a fragment's clause table."""
    out: list[LintFinding] = []
    for text, boundaries, clause_of in _fragment_cue_inputs(fragment):
        # empty-text clauses (an Error elsewhere) yield degenerate cuts; drop them
        usable = sorted({b for b in boundaries if 1 <= b <= len(text) - 1})
        seg = Segmentation.from_boundaries(len(text), usable)
        out.extend(
            lint_segmentation_cues(
                text,
                seg,
                fragment_id=fragment.fragment_id,
                config=config,
                clause_of_position=clause_of,
            )
        )
    return sorted(out, key=_sort_key)


# ---------------------------------------------------------------------------
# Macro-shape hints.

def lint_macro_shape(
    fragment: Fragment, config: RuleConfig = DEFAULT_CONFIG
) -> list[LintFinding]:
    """Info-level tendencies of well-formed narrative structure."""
    out: list[LintFinding] = []
    fid = fragment.fragment_id
    fraction = config.position_fraction

    def containing(clause_id: int):
        return [
            s
            for s in fragment.spans
            if s.contains(clause_id) and s.kind is not NarrativeType.HYPOTHETICAL
        ]

    for clause in fragment.clauses:
        spans = containing(clause.id)
        if not spans:
            continue
        if clause.macro is MacroLabel.ABSTRACT:
            if all((clause.id - s.start) >= s.length * fraction for s in spans):
                out.append(
                    _finding(
                        "abstract-position",
                        fid,
                        f"abstract at clause {clause.id} sits outside the opening "
                        f"quarter of its span",
                        clause_id=clause.id,
                    )
                )
        if clause.macro is MacroLabel.CODA:
            if all((s.end - clause.id) >= s.length * fraction for s in spans):
                out.append(
                    _finding(
                        "coda-position",
                        fid,
                        f"coda at clause {clause.id} sits outside the closing "
                        f"quarter of its span",
                        clause_id=clause.id,
                    )
                )
        if (
            clause.macro in (MacroLabel.COMPLICATION, MacroLabel.RESOLUTION)
            and clause.micro is not None
            and clause.micro is not MicroLabel.NARRATIVE
        ):
            out.append(
                _finding(
                    "complication-micro-mismatch",
                    fid,
                    f"{clause.macro.full_name} at clause {clause.id} carries micro "
                    f"label {clause.micro.value}; these clauses are usually N",
                    clause_id=clause.id,
                )
            )

    for span in fragment.spans:
        if span.kind is NarrativeType.HYPOTHETICAL:
            continue
        members = [c for c in fragment.clauses if span.contains(c.id)]
        macros = [c.macro for c in members if c.macro is not None]
        if macros and MacroLabel.COMPLICATION not in macros:
            out.append(
                _finding(
                    "span-no-complication",
                    fid,
                    f"{span.kind.value} span ({span.start}, {span.end}) has macro "
                    f"labels but no complication",
                    clause_id=span.start,
                )
            )

    return sorted(out, key=_sort_key)


def hint_span_onsets(
    fragment: Fragment, config: RuleConfig = DEFAULT_CONFIG
) -> list[LintFinding]:
    """Flag onset discourse markers in clauses not covered by any span."""
    out: list[LintFinding] = []
    for clause in fragment.clauses:
        if clause.speaker is not Speaker.INTERVIEWEE:
            continue
        if fragment.spans_containing(clause.id):
            continue
        for marker in config.onset_markers:
            if marker and marker in clause.text:
                out.append(
                    _finding(
                        "possible-onset",
                        fragment.fragment_id,
                        f"clause {clause.id} contains onset marker {marker!r} but "
                        f"lies in no span; a narrative may start here",
                        clause_id=clause.id,
                    )
                )
                break
    return sorted(out, key=_sort_key)


def lint_fragment(
    fragment: Fragment, config: RuleConfig = DEFAULT_CONFIG
) -> list[LintFinding]:
    """All rule families over one fragment, deterministically ordered."""
    out = lint_structure(fragment)
    out += cue_findings_for_fragment(fragment, config)
    out += lint_macro_shape(fragment, config)
    out += hint_span_onsets(fragment, config)
    return out
