/** Wire types mirroring the service API (see docs/api.md). */

export type SpeakerToken = "IR" | "IE";
export type NarrativeKind = "Story" | "Habitual" | "Hypothetical";
export type MicroToken = "N" | "R" | "F";
export type MacroToken = "Abs" | "Ori" | "Com" | "Eva" | "Res" | "Cod";
export type Severity = "Error" | "Warning" | "Info";

export const NARRATIVE_KINDS: readonly NarrativeKind[] = [
  "Story",
  "Habitual",
  "Hypothetical",
];

export const MACRO_TOKENS: readonly MacroToken[] = [
  "Abs",
  "Ori",
  "Com",
  "Eva",
  "Res",
  "Cod",
];

/** Macro label definitions shown inline in the label panel. */
export const MACRO_DEFINITIONS: Record<MacroToken, string> = {
  Abs: "Abstract: short preview announcing the story's point before it starts.",
  Ori: "Orientation: introduces characters, time, place, or situation.",
  Com: "Complication: reports what happened, the event chain at the core.",
  Eva: "Evaluation: the narrator pauses the story to say why it matters.",
  Res: "Resolution: the outcome that closes the chain of complications.",
  Cod: "Coda: returns to the present and signals that the story is over.",
};

export type SpanTriple = [NarrativeKind, number, number];

export interface LayerDoc {
  annotator_id: string;
  fragment_id: string;
  raw_text_sha256: string;
  masses: number[];
  spans: SpanTriple[];
  micro: Record<string, MicroToken>;
  macro: Record<string, MacroToken>;
  version?: string;
}

export interface ClauseDoc {
  id: number;
  speaker: SpeakerToken;
  text: string;
  micro: MicroToken | null;
  macro: MacroToken | null;
}

export interface FragmentDoc {
  fragment_id: string;
  topic: string;
  clauses: ClauseDoc[];
  spans: SpanTriple[];
}

export interface BundleDoc {
  format: string;
  version: number | string;
  fragment_id: string;
  topic: string;
  raw_text: string;
  raw_text_sha256: string;
  turns: [SpeakerToken, number][];
  layers: LayerDoc[];
  gold: FragmentDoc | null;
}

export interface FragmentSummary {
  fragment_id: string;
  topic: string;
  version: string;
  atoms: number;
  annotators: string[];
  has_gold: boolean;
}

export interface FindingDoc {
  rule_id: string;
  severity: Severity;
  fragment_id: string;
  clause_id: number | null;
  position: number | null;
  message: string;
  guideline_ref: string;
}

export interface FindingsReport {
  report: string;
  counts: Record<Severity, number>;
  findings: FindingDoc[];
}

export interface QuestionDoc {
  node_id: string | null;
  question_en: string;
  question_ja: string;
  examples: string[];
  terminal: boolean;
  outcome: MicroToken | "none" | null;
}

export interface MetricValue {
  value: number;
  exact: string;
}

export interface SegReport {
  report: string;
  params: { n_t: number; coders: string[]; fragments: string[] };
  mean_b: MetricValue;
  kappa_b: MetricValue | null;
  kappa_note: string | null;
  bed_per_100: MetricValue | null;
  pairwise_b: { coders: [string, string]; fragment_id: string; b: MetricValue }[];
}

export interface LabelReport {
  report: string;
  params: { field: string; coders: string[]; units: number };
  alpha: MetricValue | null;
  alpha_note: string | null;
  pairable_units: number;
  label_totals: Record<string, number>;
  exact_match: Record<string, MetricValue>;
  confusion: { labels: [string, string]; count: number }[];
}

export interface ResolutionDoc {
  label: string;
  resolvers: string[];
  note: string;
  resolved_at: string | null;
}

export interface OutcomeDoc {
  fragment_id: string;
  clause_id: number;
  field: "micro" | "macro" | "span_membership";
  span_kind: NarrativeKind | null;
  decided: string | null;
  needs_discussion: boolean;
  unanimous: boolean;
  votes: string[];
  resolution?: ResolutionDoc;
}

export interface OutcomesReport {
  report: string;
  needs_discussion: number;
  outcomes: OutcomeDoc[];
}

export interface StatsReport {
  report: string;
  clauses: { total: number; interviewee: number; interviewer: number };
  macro: Record<string, number>;
  micro: Record<string, { count: number; share: MetricValue | null; percent: number | null }>;
  micro_labeled_total: number;
  spans: Record<string, { count: number; mean_length: MetricValue | null; clauses: number }>;
}
