/** View models for the agreement dashboard and adjudication queue. */

import type {
  LabelReport,
  OutcomeDoc,
  SegReport,
} from "./types.js";

export interface MetricRow {
  label: string;
  value: string;
}

function show(value: { value: number } | null, digits = 4): string {
  return value === null ? "undefined" : value.value.toFixed(digits);
}

export function segReportRows(report: SegReport): MetricRow[] {
  return [
    { label: "mean B", value: show(report.mean_b) },
    {
      label: "kappa_B",
      value:
        report.kappa_b !== null
          ? show(report.kappa_b)
          : `undefined (${report.kappa_note ?? ""})`,
    },
    { label: "BED per 100 positions", value: show(report.bed_per_100, 2) },
    { label: "n_t", value: String(report.params.n_t) },
    { label: "coders", value: report.params.coders.join(", ") },
  ];
}

export function pairwiseRows(report: SegReport): string[][] {
  return report.pairwise_b.map((p) => [
    p.fragment_id,
    `${p.coders[0]}+${p.coders[1]}`,
    p.b.value.toFixed(4),
  ]);
}

export function labelReportRows(report: LabelReport): MetricRow[] {
  const rows: MetricRow[] = [
    {
      label: `alpha (${report.params.field || "labels"})`,
      value:
        report.alpha !== null
          ? show(report.alpha)
          : `undefined (${report.alpha_note ?? ""})`,
    },
    { label: "pairable units", value: String(report.pairable_units) },
  ];
  for (const [token, rate] of Object.entries(report.exact_match)) {
    rows.push({ label: `exact match ${token}`, value: rate.value.toFixed(2) });
  }
  return rows;
}

export interface ClauseDisagreement {
  clauseId: number;
  fields: string[];
  needsDiscussion: boolean;
}

/** Per-clause disagreement highlighting for the editor margin. */
export function clauseDisagreements(
  outcomes: OutcomeDoc[],
): Map<number, ClauseDisagreement> {
  const out = new Map<number, ClauseDisagreement>();
  for (const outcome of outcomes) {
    const distinct = new Set(outcome.votes);
    const disagrees = distinct.size > 1;
    if (!disagrees && !outcome.needs_discussion) continue;
    const field =
      outcome.span_kind !== null
        ? `${outcome.field}:${outcome.span_kind}`
        : outcome.field;
    const entry = out.get(outcome.clause_id) ?? {
      clauseId: outcome.clause_id,
      fields: [],
      needsDiscussion: false,
    };
    entry.fields.push(field);
    entry.needsDiscussion = entry.needsDiscussion || outcome.needs_discussion;
    out.set(outcome.clause_id, entry);
  }
  return out;
}

/** Outcomes waiting on a human decision, stable order. */
export function discussionQueue(outcomes: OutcomeDoc[]): OutcomeDoc[] {
  return outcomes
    .filter((o) => o.needs_discussion)
    .sort(
      (a, b) =>
        a.clause_id - b.clause_id ||
        a.field.localeCompare(b.field) ||
        String(a.span_kind).localeCompare(String(b.span_kind)),
    );
}

/** Swap a freshly resolved outcome into the list. */
export function withResolution(
  outcomes: OutcomeDoc[],
  resolved: OutcomeDoc,
): OutcomeDoc[] {
  return outcomes.map((o) =>
    o.clause_id === resolved.clause_id &&
    o.field === resolved.field &&
    o.span_kind === resolved.span_kind
      ? resolved
      : o,
  );
}
