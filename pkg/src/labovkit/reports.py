"""Report rendering: JSON documents and aligned text tables.

All metric values are exact rationals internally; this module owns the
display conventions.  JSON reports carry both a float ``value`` and the
``exact`` fraction string, plus the parameters that produced them, and
contain no timestamps, so identical inputs give byte-identical output.

Display rounding: ratios use half-up rounding at the stated precision;
label share percentages are truncated to whole percent, matching the
published table convention (a 48/34/17 row that sums to 99).
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Optional, Sequence

from .adjudicate import GoldCorpusStats, VoteOutcome
from .labelmetrics import LabelAgreementReport
from .lints import LintFinding
from .model import MacroLabel, MicroLabel, NarrativeType
from .segmetrics import BaselineReport, SegAgreementReport
from .wizard import QuestionDescriptor


def round_half_up(value: Fraction, decimals: int = 2) -> str:
    """Exact decimal string with half-up rounding (no float artifacts)."""
    scale = 10**decimals
    scaled = value * scale
    sign = "-" if scaled < 0 else ""
    units = math.floor(abs(scaled) + Fraction(1, 2))
    text = str(units).rjust(decimals + 1, "0")
    if decimals == 0:
        return sign + text
    return f"{sign}{text[:-decimals]}.{text[-decimals:]}"


def floor_percent(share: Fraction) -> int:
    """Whole-percent display share, truncated."""
    return math.floor(share * 100)


def fraction_doc(value: Optional[Fraction]) -> Optional[dict]:
    if value is None:
        return None
    return {"value": float(value), "exact": f"{value.numerator}/{value.denominator}"}


def to_json_bytes(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Fixed-width text table with a header rule."""
    columns = [list(col) for col in zip(headers, *rows)] if rows else [[h] for h in headers]
    widths = [max(len(cell) for cell in col) for col in columns]
    def fmt(cells):
        return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Segmentation agreement.

def seg_report_to_dict(report: SegAgreementReport) -> dict:
    return {
        "report": "segmentation-agreement",
        "params": report.params,
        "mean_b": fraction_doc(report.mean_b),
        "kappa_b": fraction_doc(report.kappa_b),
        "kappa_note": report.kappa_note,
        "bed_per_100": fraction_doc(report.bed_per_100),
        "bed_per_100_by_fragment": (
            {fid: fraction_doc(v) for fid, v in report.bed_per_100_by_fragment.items()}
            if report.bed_per_100_by_fragment is not None
            else None
        ),
        "pairwise_b": [
            {
                "coders": [p.coder_a, p.coder_b],
                "fragment_id": p.fragment_id,
                "b": fraction_doc(p.b),
            }
            for p in report.pairwise_b
        ],
    }


def render_seg_report(report: SegAgreementReport) -> str:
    rows = [
        ["mean B", round_half_up(report.mean_b, 4)],
        [
            "kappa_B",
            round_half_up(report.kappa_b, 4) if report.kappa_b is not None
            else f"undefined ({report.kappa_note})",
        ],
        [
            "BED per 100 positions",
            round_half_up(report.bed_per_100, 2) if report.bed_per_100 is not None
            else "n/a",
        ],
        ["n_t", str(report.params["n_t"])],
        ["coders", ", ".join(report.params["coders"])],
        ["fragments", str(len(report.params["fragments"]))],
    ]
    out = render_table(["metric", "value"], rows)
    pair_rows = [
        [p.fragment_id, f"{p.coder_a}+{p.coder_b}", round_half_up(p.b, 4)]
        for p in report.pairwise_b
    ]
    out += "\n" + render_table(["fragment", "pair", "B"], pair_rows)
    return out


def baseline_report_to_dict(report: BaselineReport) -> dict:
    return {
        "report": "segmentation-random-baseline",
        "params": report.params,
        "kappa_b": {
            "mean": fraction_doc(report.kappa_mean),
            "min": fraction_doc(report.kappa_min),
            "max": fraction_doc(report.kappa_max),
        },
        "bed_per_100": {
            "mean": fraction_doc(report.bed_mean),
            "min": fraction_doc(report.bed_min),
            "max": fraction_doc(report.bed_max),
        },
        "runs": [
            {
                "seed": r.seed,
                "kappa_b": fraction_doc(r.kappa_b),
                "mean_b": fraction_doc(r.mean_b),
                "bed_per_100": fraction_doc(r.bed_per_100),
            }
            for r in report.runs
        ],
    }


def render_baseline_report(report: BaselineReport) -> str:
    def agg(value):
        return round_half_up(value, 4) if value is not None else "undefined"

    rows = [
        ["kappa_B mean", agg(report.kappa_mean)],
        ["kappa_B min", agg(report.kappa_min)],
        ["kappa_B max", agg(report.kappa_max)],
        ["BED/100 mean", agg(report.bed_mean)],
        ["BED/100 min", agg(report.bed_min)],
        ["BED/100 max", agg(report.bed_max)],
        ["seed pairs", str(len(report.runs))],
        ["n_t", str(report.params["n_t"])],
    ]
    return render_table(["metric", "value"], rows)


# ---------------------------------------------------------------------------
# Label agreement.

def label_report_to_dict(report: LabelAgreementReport) -> dict:
    return {
        "report": "label-agreement",
        "params": report.params,
        "alpha": fraction_doc(report.alpha),
        "alpha_note": report.alpha_note,
        "pairable_units": report.pairable_units,
        "label_totals": report.label_totals,
        "exact_match": {
            label: fraction_doc(rate) for label, rate in report.exact_match.items()
        },
        "confusion": [
            {"labels": [a, b], "count": count}
            for (a, b), count in sorted(report.confusion.items())
        ],
    }


def render_label_report(report: LabelAgreementReport) -> str:
    alpha = (
        round_half_up(report.alpha, 4)
        if report.alpha is not None
        else f"undefined ({report.alpha_note})"
    )
    head = render_table(
        ["metric", "value"],
        [
            ["alpha (nominal)", alpha],
            ["pairable units", str(report.pairable_units)],
            ["coders", ", ".join(report.params["coders"])],
        ],
    )
    match_rows = [
        [label, round_half_up(rate, 2), str(report.label_totals.get(label, 0))]
        for label, rate in report.exact_match.items()
    ]
    out = head + "\n" + render_table(["label", "exact match", "times chosen"], match_rows)
    if report.confusion:
        confusion_rows = [
            [a, b, str(count)] for (a, b), count in sorted(report.confusion.items())
        ]
        out += "\n" + render_table(["label", "label", "pairs"], confusion_rows)
    return out


# ---------------------------------------------------------------------------
# Corpus statistics.

def stats_to_dict(stats: GoldCorpusStats) -> dict:
    total, interviewee, interviewer = stats.clause_totals
    return {
        "report": "gold-corpus-stats",
        "clauses": {
            "total": total,
            "interviewee": interviewee,
            "interviewer": interviewer,
        },
        "macro": {
            label.full_name: stats.macro_counts[label] for label in MacroLabel
        },
        "micro": {
            label.value: {
                "count": stats.micro_counts[label][0],
                "share": fraction_doc(stats.micro_counts[label][1]),
                "percent": (
                    floor_percent(stats.micro_counts[label][1])
                    if stats.micro_counts[label][1] is not None
                    else None
                ),
            }
            for label in MicroLabel
        },
        "micro_labeled_total": stats.micro_labeled_total,
        "spans": {
            kind.value: {
                "count": stats.span_stats[kind].count,
                "mean_length": fraction_doc(stats.span_stats[kind].mean_length),
                "clauses": stats.span_stats[kind].clauses,
            }
            for kind in NarrativeType
        },
    }


def render_stats(stats: GoldCorpusStats) -> str:
    total, interviewee, interviewer = stats.clause_totals
    head = render_table(
        ["clauses", "count"],
        [
            ["total", str(total)],
            ["interviewee", str(interviewee)],
            ["interviewer", str(interviewer)],
        ],
    )
    macro_rows = [
        [label.full_name, str(stats.macro_counts[label])] for label in MacroLabel
    ]
    micro_rows = []
    for label in MicroLabel:
        count, share = stats.micro_counts[label]
        percent = f"{floor_percent(share)}%" if share is not None else "-"
        micro_rows.append([label.value, str(count), percent])
    span_rows = []
    for kind in NarrativeType:
        entry = stats.span_stats[kind]
        mean = round_half_up(entry.mean_length, 2) if entry.mean_length is not None else "-"
        span_rows.append([kind.value, str(entry.count), mean])
    return (
        head
        + "\n"
        + render_table(["macro label", "clauses"], macro_rows)
        + "\n"
        + render_table(["micro label", "clauses", "share"], micro_rows)
        + "\n"
        + render_table(["narrative span", "count", "mean length"], span_rows)
    )


# ---------------------------------------------------------------------------
# Lint findings, vote outcomes, wizard questions.

def finding_to_dict(finding: LintFinding) -> dict:
    return {
        "rule_id": finding.rule_id,
        "severity": finding.severity.value,
        "fragment_id": finding.fragment_id,
        "clause_id": finding.clause_id,
        "position": finding.position,
        "message": finding.message,
        "guideline_ref": finding.guideline_ref,
    }


def findings_to_dict(findings: Sequence[LintFinding]) -> dict:
    return {
        "report": "lint-findings",
        "counts": {
            severity: sum(1 for f in findings if f.severity.value == severity)
            for severity in ("Error", "Warning", "Info")
        },
        "findings": [finding_to_dict(f) for f in findings],
    }


def render_findings(findings: Sequence[LintFinding]) -> str:
    if not findings:
        return "no findings\n"
    rows = [
        [
            f.severity.value,
            f.rule_id,
            f.fragment_id,
            str(f.clause_id) if f.clause_id is not None else
            (f"@{f.position}" if f.position is not None else ""),
            f.message,
        ]
        for f in findings
    ]
    return render_table(["severity", "rule", "fragment", "clause", "message"], rows)


def outcome_to_dict(outcome: VoteOutcome) -> dict:
    doc = {
        "fragment_id": outcome.unit[0],
        "clause_id": outcome.unit[1],
        "field": outcome.field,
        "span_kind": outcome.span_kind.value if outcome.span_kind else None,
        "decided": outcome.decided,
        "needs_discussion": outcome.needs_discussion,
        "unanimous": outcome.unanimous,
        "votes": list(outcome.votes),
    }
    if outcome.resolution is not None:
        doc["resolution"] = {
            "label": outcome.resolution.label,
            "resolvers": list(outcome.resolution.resolvers),
            "note": outcome.resolution.note,
            "resolved_at": outcome.resolution.resolved_at,
        }
    return doc


def outcome_from_dict(doc: dict) -> VoteOutcome:
    """Inverse of :func:`outcome_to_dict`; raises ``ValueError`` on bad docs."""
    from .adjudicate import ResolutionRecord

    if not isinstance(doc, dict):
        raise ValueError("outcome must be an object")
    try:
        resolution = None
        if doc.get("resolution"):
            res = doc["resolution"]
            resolution = ResolutionRecord(
                label=str(res["label"]),
                resolvers=tuple(str(r) for r in res.get("resolvers", [])),
                note=str(res.get("note", "")),
                resolved_at=res.get("resolved_at"),
            )
        return VoteOutcome(
            unit=(str(doc["fragment_id"]), int(doc["clause_id"])),
            field=str(doc["field"]),
            decided=doc.get("decided"),
            needs_discussion=bool(doc["needs_discussion"]),
            votes=tuple(str(v) for v in doc.get("votes", [])),
            unanimous=bool(doc.get("unanimous", False)),
            span_kind=NarrativeType(doc["span_kind"]) if doc.get("span_kind") else None,
            resolution=resolution,
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad outcome document: {exc}") from None


def outcomes_to_dict(outcomes: Sequence[VoteOutcome]) -> dict:
    return {
        "report": "adjudication-outcomes",
        "needs_discussion": sum(1 for o in outcomes if o.needs_discussion),
        "outcomes": [outcome_to_dict(o) for o in outcomes],
    }


def render_outcomes(outcomes: Sequence[VoteOutcome]) -> str:
    rows = []
    for o in outcomes:
        field = o.field if o.span_kind is None else f"{o.field}:{o.span_kind.value}"
        rows.append(
            [
                str(o.unit[1]),
                field,
                o.decided if o.decided is not None else "DISCUSS",
                "yes" if o.unanimous else "",
                ",".join(o.votes),
            ]
        )
    return render_table(["clause", "field", "decision", "unanimous", "votes"], rows)


def question_to_dict(question: QuestionDescriptor) -> dict:
    return {
        "node_id": question.node_id,
        "question_en": question.question_en,
        "question_ja": question.question_ja,
        "examples": list(question.examples),
        "terminal": question.terminal,
        "outcome": question.outcome,
    }
