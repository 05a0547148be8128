/** Editor state: one annotator's layer over one fragment.
 *
 * The state is immutable; every edit returns a new state, which makes
 * undo/redo a plain stack of snapshots. Edits that the service would
 * reject are blocked up front with the same rule ids the lint engine
 * uses, so the UI never persists a state the server refuses.
 */

import type {
  BundleDoc,
  FragmentDoc,
  LayerDoc,
  MacroToken,
  MicroToken,
  NarrativeKind,
  SpanTriple,
  SpeakerToken,
} from "./types.js";
import { NARRATIVE_KINDS } from "./types.js";

export interface SpanMark {
  kind: NarrativeKind;
  start: number;
  end: number;
}

export interface EditorState {
  readonly fragmentId: string;
  readonly topic: string;
  readonly rawText: string;
  readonly turns: ReadonlyArray<readonly [SpeakerToken, number]>;
  readonly masses: ReadonlyArray<number>;
  readonly spans: ReadonlyArray<SpanMark>;
  readonly micro: Readonly<Record<number, MicroToken>>;
  readonly macro: Readonly<Record<number, MacroToken>>;
}

export interface ClauseView {
  id: number;
  speaker: SpeakerToken;
  text: string;
  /** half-open atom range [start, end) into rawText */
  start: number;
  end: number;
  micro: MicroToken | null;
  macro: MacroToken | null;
}

/** An edit the annotation rules forbid; `rule` matches the lint id. */
export class EditBlocked extends Error {
  constructor(
    readonly rule: string,
    message: string,
  ) {
    super(message);
    this.name = "EditBlocked";
  }
}

const KIND_ORDER: Record<NarrativeKind, number> = {
  Story: 0,
  Habitual: 1,
  Hypothetical: 2,
};

function sortSpans(spans: SpanMark[]): SpanMark[] {
  return spans
    .slice()
    .sort(
      (a, b) =>
        KIND_ORDER[a.kind] - KIND_ORDER[b.kind] || a.start - b.start || a.end - b.end,
    );
}

// ---------------------------------------------------------------------------
// Construction and serialization.

export function stateFromBundle(
  bundle: BundleDoc,
  annotatorId: string,
): EditorState {
  const layer = bundle.layers.find((l) => l.annotator_id === annotatorId);
  const turns = bundle.turns.map(([s, n]) => [s, n] as const);
  let masses: number[];
  let spans: SpanMark[] = [];
  let micro: Record<number, MicroToken> = {};
  let macro: Record<number, MacroToken> = {};
  if (layer) {
    masses = layer.masses.slice();
    spans = layer.spans.map(([kind, start, end]) => ({ kind, start, end }));
    micro = remapKeys(layer.micro);
    macro = remapKeys(layer.macro);
  } else if (turns.length > 0) {
    // fresh layer: start from one clause per speaker turn
    masses = turns.map(([, n]) => n);
  } else {
    masses = bundle.raw_text.length > 0 ? [bundle.raw_text.length] : [];
  }
  return {
    fragmentId: bundle.fragment_id,
    topic: bundle.topic,
    rawText: bundle.raw_text,
    turns,
    masses,
    spans: sortSpans(spans),
    micro,
    macro,
  };
}

function remapKeys<T>(doc: Record<string, T>): Record<number, T> {
  const out: Record<number, T> = {};
  for (const [key, value] of Object.entries(doc)) out[Number(key)] = value;
  return out;
}

export function toLayerDoc(
  state: EditorState,
  annotatorId: string,
  digest: string,
): LayerDoc {
  const micro: Record<string, MicroToken> = {};
  for (const id of Object.keys(state.micro).map(Number).sort((a, b) => a - b)) {
    micro[String(id)] = state.micro[id]!;
  }
  const macro: Record<string, MacroToken> = {};
  for (const id of Object.keys(state.macro).map(Number).sort((a, b) => a - b)) {
    macro[String(id)] = state.macro[id]!;
  }
  return {
    annotator_id: annotatorId,
    fragment_id: state.fragmentId,
    raw_text_sha256: digest,
    masses: state.masses.slice(),
    spans: sortSpans(state.spans.slice()).map(
      (s) => [s.kind, s.start, s.end] as SpanTriple,
    ),
    micro,
    macro,
  };
}

/** Fragment document for the fragment-mode /lint endpoint. */
export function toFragmentDoc(state: EditorState): FragmentDoc {
  return {
    fragment_id: state.fragmentId,
    topic: state.topic,
    clauses: clauseViews(state).map((c) => ({
      id: c.id,
      speaker: c.speaker,
      text: c.text.trim(),
      micro: c.micro,
      macro: c.macro,
    })),
    spans: sortSpans(state.spans.slice()).map(
      (s) => [s.kind, s.start, s.end] as SpanTriple,
    ),
  };
}

// ---------------------------------------------------------------------------
// Derived views.

export function boundaries(state: EditorState): number[] {
  const out: number[] = [];
  let total = 0;
  for (const mass of state.masses.slice(0, -1)) {
    total += mass;
    out.push(total);
  }
  return out;
}

interface TurnRange {
  speaker: SpeakerToken;
  start: number;
  end: number;
}

function turnRanges(state: EditorState): TurnRange[] {
  const out: TurnRange[] = [];
  let offset = 0;
  for (const [speaker, length] of state.turns) {
    out.push({ speaker, start: offset, end: offset + length });
    offset += length;
  }
  return out;
}

function speakerAt(state: EditorState, start: number, end: number): SpeakerToken {
  for (const turn of turnRanges(state)) {
    if (turn.start <= start && end <= turn.end) return turn.speaker;
  }
  return "IE";
}

export function clauseViews(state: EditorState): ClauseView[] {
  const out: ClauseView[] = [];
  let offset = 0;
  state.masses.forEach((mass, index) => {
    const id = index + 1;
    out.push({
      id,
      speaker: speakerAt(state, offset, offset + mass),
      text: state.rawText.slice(offset, offset + mass),
      start: offset,
      end: offset + mass,
      micro: state.micro[id] ?? null,
      macro: state.macro[id] ?? null,
    });
    offset += mass;
  });
  return out;
}

export function spansContaining(state: EditorState, clauseId: number): SpanMark[] {
  return state.spans.filter((s) => s.start <= clauseId && clauseId <= s.end);
}

/** Clauses whose only span context is hypothetical take no micro label. */
export function isHypotheticalOnly(state: EditorState, clauseId: number): boolean {
  const containing = spansContaining(state, clauseId);
  return containing.length > 0 && containing.every((s) => s.kind === "Hypothetical");
}

export function canLabelMacro(state: EditorState, clauseId: number): boolean {
  const clause = clauseViews(state)[clauseId - 1];
  if (!clause || clause.speaker === "IR") return false;
  return spansContaining(state, clauseId).length > 0;
}

export function canLabelMicro(state: EditorState, clauseId: number): boolean {
  return canLabelMacro(state, clauseId) && !isHypotheticalOnly(state, clauseId);
}

// ---------------------------------------------------------------------------
// Segmentation edits.

export function splitClause(state: EditorState, atomPosition: number): EditorState {
  const atoms = state.rawText.length;
  if (atomPosition < 1 || atomPosition > atoms - 1) {
    throw new EditBlocked("split-out-of-range", `no atom gap at ${atomPosition}`);
  }
  let offset = 0;
  for (let index = 0; index < state.masses.length; index += 1) {
    const mass = state.masses[index]!;
    if (atomPosition === offset) {
      throw new EditBlocked("split-existing", "a boundary already sits here");
    }
    if (atomPosition < offset + mass) {
      const clauseId = index + 1;
      const view = clauseViews(state)[index]!;
      if (view.speaker === "IR") {
        throw new EditBlocked(
          "interviewer-in-span",
          "interviewer units are never segmented",
        );
      }
      const masses = state.masses.slice();
      masses.splice(index, 1, atomPosition - offset, offset + mass - atomPosition);
      return {
        ...state,
        masses,
        spans: sortSpans(
          state.spans.map((s) => ({
            kind: s.kind,
            start: s.start > clauseId ? s.start + 1 : s.start,
            end: s.end >= clauseId ? s.end + 1 : s.end,
          })),
        ),
        micro: shiftLabels(state.micro, clauseId),
        macro: shiftLabels(state.macro, clauseId),
      };
    }
    offset += mass;
  }
  throw new EditBlocked("split-out-of-range", `no atom gap at ${atomPosition}`);
}

function shiftLabels<T>(
  labels: Readonly<Record<number, T>>,
  splitClause: number,
): Record<number, T> {
  // the first half keeps the label; everything after shifts by one
  const out: Record<number, T> = {};
  for (const [key, value] of Object.entries(labels)) {
    const id = Number(key);
    out[id > splitClause ? id + 1 : id] = value;
  }
  return out;
}

export function mergeClauses(state: EditorState, clauseId: number): EditorState {
  if (clauseId < 1 || clauseId >= state.masses.length) {
    throw new EditBlocked("merge-out-of-range", `no clause pair at ${clauseId}`);
  }
  const views = clauseViews(state);
  const left = views[clauseId - 1]!;
  const right = views[clauseId]!;
  if (left.speaker === "IR" || right.speaker === "IR") {
    throw new EditBlocked(
      "interviewer-in-span",
      "interviewer units are never segmented or merged into",
    );
  }
  if (speakerTurnIndex(state, left.start) !== speakerTurnIndex(state, right.start)) {
    throw new EditBlocked("turn-edge", "cannot merge across a speaker turn edge");
  }
  for (const span of state.spans) {
    const newLength = spanLengthAfterMerge(span, clauseId);
    if (newLength !== null && newLength < 2) {
      throw new EditBlocked(
        "span-min-length",
        `merging would shrink a ${span.kind} span below two clauses`,
      );
    }
  }
  const masses = state.masses.slice();
  masses.splice(clauseId - 1, 2, left.end - left.start + (right.end - right.start));
  return {
    ...state,
    masses,
    spans: sortSpans(
      state.spans.map((s) => ({
        kind: s.kind,
        start: s.start > clauseId ? s.start - 1 : s.start,
        end: s.end > clauseId ? s.end - 1 : s.end,
      })),
    ),
    micro: mergeLabels(state.micro, clauseId),
    macro: mergeLabels(state.macro, clauseId),
  };
}

function spanLengthAfterMerge(span: SpanMark, mergedId: number): number | null {
  const start = span.start > mergedId ? span.start - 1 : span.start;
  const end = span.end > mergedId ? span.end - 1 : span.end;
  const length = end - start + 1;
  return length === span.end - span.start + 1 ? null : length;
}

function mergeLabels<T>(
  labels: Readonly<Record<number, T>>,
  mergedId: number,
): Record<number, T> {
  // the left clause's label wins; the right one's is kept only as fallback
  const out: Record<number, T> = {};
  for (const [key, value] of Object.entries(labels)) {
    const id = Number(key);
    if (id === mergedId + 1) {
      if (out[mergedId] === undefined && labels[mergedId] === undefined) {
        out[mergedId] = value;
      }
    } else {
      out[id > mergedId + 1 ? id - 1 : id] = value;
    }
  }
  return out;
}

function speakerTurnIndex(state: EditorState, atom: number): number {
  const ranges = turnRanges(state);
  for (let index = 0; index < ranges.length; index += 1) {
    const turn = ranges[index]!;
    if (turn.start <= atom && atom < turn.end) return index;
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Span edits.

export function paintSpan(
  state: EditorState,
  kind: NarrativeKind,
  startClause: number,
  endClause: number,
): EditorState {
  const n = state.masses.length;
  if (startClause < 1 || endClause > n || startClause > endClause) {
    throw new EditBlocked(
      "span-bounds",
      `span (${startClause}, ${endClause}) is out of range`,
    );
  }
  if (endClause - startClause + 1 < 2) {
    throw new EditBlocked(
      "span-min-length",
      "a narrative span must cover at least two clauses",
    );
  }
  const views = clauseViews(state);
  for (let id = startClause; id <= endClause; id += 1) {
    if (views[id - 1]!.speaker === "IR") {
      throw new EditBlocked(
        "interviewer-in-span",
        `clause ${id} is an interviewer unit`,
      );
    }
  }
  for (const span of state.spans) {
    if (span.kind === kind && span.start <= endClause && startClause <= span.end) {
      throw new EditBlocked(
        "same-kind-overlap",
        `overlaps the ${kind} span (${span.start}, ${span.end})`,
      );
    }
  }
  return {
    ...state,
    spans: sortSpans([...state.spans, { kind, start: startClause, end: endClause }]),
  };
}

export function removeSpan(
  state: EditorState,
  kind: NarrativeKind,
  startClause: number,
): EditorState {
  const spans = state.spans.filter(
    (s) => !(s.kind === kind && s.start === startClause),
  );
  if (spans.length === state.spans.length) {
    throw new EditBlocked("span-bounds", `no ${kind} span starts at ${startClause}`);
  }
  // labels that lose their only span context are dropped with it
  const micro: Record<number, MicroToken> = {};
  const macro: Record<number, MacroToken> = {};
  const next = { ...state, spans };
  for (const [key, value] of Object.entries(state.micro)) {
    if (spansContaining(next, Number(key)).length > 0) micro[Number(key)] = value;
  }
  for (const [key, value] of Object.entries(state.macro)) {
    if (spansContaining(next, Number(key)).length > 0) macro[Number(key)] = value;
  }
  return { ...next, micro, macro };
}

// ---------------------------------------------------------------------------
// Label edits.

export function setMacro(
  state: EditorState,
  clauseId: number,
  token: MacroToken | null,
): EditorState {
  if (token !== null && !canLabelMacro(state, clauseId)) {
    throw new EditBlocked(
      "label-outside-span",
      `clause ${clauseId} is not inside a narrative span (or is interviewer speech)`,
    );
  }
  const macro = { ...state.macro };
  if (token === null) delete macro[clauseId];
  else macro[clauseId] = token;
  return { ...state, macro };
}

/** Micro labels are only written through the wizard outcome. */
export function applyWizardOutcome(
  state: EditorState,
  clauseId: number,
  outcome: MicroToken | "none",
): EditorState {
  if (outcome !== "none" && !canLabelMicro(state, clauseId)) {
    if (isHypotheticalOnly(state, clauseId)) {
      throw new EditBlocked(
        "hypothetical-no-micro",
        `clause ${clauseId} lies only in hypothetical spans and takes no micro label`,
      );
    }
    throw new EditBlocked(
      "label-outside-span",
      `clause ${clauseId} is not inside a narrative span (or is interviewer speech)`,
    );
  }
  const micro = { ...state.micro };
  if (outcome === "none") delete micro[clauseId];
  else micro[clauseId] = outcome;
  return { ...state, micro };
}

// ---------------------------------------------------------------------------
// Undo/redo session.

export interface EditorSession {
  readonly past: ReadonlyArray<EditorState>;
  readonly present: EditorState;
  readonly future: ReadonlyArray<EditorState>;
  /** version token of the bundle state this session read */
  readonly version: string;
  readonly dirty: boolean;
}

export function newSession(state: EditorState, version: string): EditorSession {
  return { past: [], present: state, future: [], version, dirty: false };
}

export function applyEdit(
  session: EditorSession,
  edit: (state: EditorState) => EditorState,
): EditorSession {
  const next = edit(session.present);
  return {
    past: [...session.past, session.present],
    present: next,
    future: [],
    version: session.version,
    dirty: true,
  };
}

export function undo(session: EditorSession): EditorSession {
  if (session.past.length === 0) return session;
  return {
    past: session.past.slice(0, -1),
    present: session.past[session.past.length - 1]!,
    future: [session.present, ...session.future],
    version: session.version,
    dirty: true,
  };
}

export function redo(session: EditorSession): EditorSession {
  if (session.future.length === 0) return session;
  return {
    past: [...session.past, session.present],
    present: session.future[0]!,
    future: session.future.slice(1),
    version: session.version,
    dirty: true,
  };
}

export function markSaved(session: EditorSession, version: string): EditorSession {
  return { ...session, version, dirty: false };
}

export function statesEqual(a: EditorState, b: EditorState): boolean {
  return (
    a.fragmentId === b.fragmentId &&
    a.rawText === b.rawText &&
    JSON.stringify(a.masses) === JSON.stringify(b.masses) &&
    JSON.stringify(sortSpans(a.spans.slice())) ===
      JSON.stringify(sortSpans(b.spans.slice())) &&
    JSON.stringify(a.micro) === JSON.stringify(b.micro) &&
    JSON.stringify(a.macro) === JSON.stringify(b.macro)
  );
}

export { NARRATIVE_KINDS };
