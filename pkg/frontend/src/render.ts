/** DOM rendering: the editor mirrors the columnar table model, one row
 * per clause with per-type span lanes (S/E cells), micro and macro
 * columns, lint findings inline at their clause, and cue suggestions
 * as dismissible chips.
 */

import {
  clauseViews,
  isHypotheticalOnly,
  spansContaining,
  type EditorState,
} from "./editor.js";
import type { FindingDoc, NarrativeKind } from "./types.js";
import { MACRO_TOKENS, NARRATIVE_KINDS } from "./types.js";

export interface EditorHandlers {
  onSplit(atomPosition: number): void;
  onMerge(clauseId: number): void;
  onPaintSpan(kind: NarrativeKind, start: number, end: number): void;
  onRemoveSpan(kind: NarrativeKind, start: number): void;
  onOpenWizard(clauseId: number): void;
  onSetMacro(clauseId: number, token: string | null): void;
  onSelect(clauseId: number): void;
}

function spanCell(state: EditorState, kind: NarrativeKind, clauseId: number): string {
  for (const span of state.spans) {
    if (span.kind !== kind) continue;
    if (span.start === clauseId && span.end === clauseId) return "SE";
    if (span.start === clauseId) return "S";
    if (span.end === clauseId) return "E";
  }
  return "";
}

export function renderEditorTable(
  doc: Document,
  state: EditorState,
  findings: FindingDoc[],
  handlers: EditorHandlers,
  selection: { start: number; end: number } | null = null,
): HTMLTableElement {
  const table = doc.createElement("table");
  table.className = "editor";
  const thead = doc.createElement("thead");
  const head = doc.createElement("tr");
  thead.appendChild(head);
  table.appendChild(thead);
  for (const title of [
    "idx",
    "speaker",
    "text",
    "story",
    "habitual",
    "hypothetical",
    "micro",
    "macro",
    "findings",
  ]) {
    const th = doc.createElement("th");
    th.textContent = title;
    head.appendChild(th);
  }
  const byClause = new Map<number, FindingDoc[]>();
  for (const finding of findings) {
    if (finding.clause_id !== null) {
      const list = byClause.get(finding.clause_id) ?? [];
      list.push(finding);
      byClause.set(finding.clause_id, list);
    }
  }
  const body = doc.createElement("tbody");
  table.appendChild(body);
  const cell = (row: HTMLTableRowElement) => {
    const td = doc.createElement("td");
    row.appendChild(td);
    return td;
  };
  for (const clause of clauseViews(state)) {
    const row = doc.createElement("tr");
    body.appendChild(row);
    row.dataset.clauseId = String(clause.id);
    if (clause.speaker === "IR") row.className = "interviewer";
    if (
      selection &&
      selection.start <= clause.id &&
      clause.id <= selection.end
    ) {
      row.classList.add("selected");
    }
    cell(row).textContent = String(clause.id);
    cell(row).textContent = clause.speaker;
    const textCell = cell(row);
    textCell.className = "text";
    textCell.textContent = clause.text.trim();
    textCell.addEventListener("click", () => handlers.onSelect(clause.id));
    for (const kind of NARRATIVE_KINDS) {
      const lane = cell(row);
      lane.className = `lane lane-${kind.toLowerCase()}`;
      lane.textContent = spanCell(state, kind, clause.id);
      if (lane.textContent === "S" || lane.textContent === "SE") {
        const drop = doc.createElement("button");
        drop.textContent = "×";
        drop.title = `remove this ${kind} span`;
        drop.addEventListener("click", () => handlers.onRemoveSpan(kind, clause.id));
        lane.appendChild(drop);
      }
    }
    const microCell = cell(row);
    microCell.className = "micro";
    const wizardButton = doc.createElement("button");
    wizardButton.textContent = clause.micro ?? "?";
    wizardButton.disabled =
      clause.speaker === "IR" ||
      spansContaining(state, clause.id).length === 0 ||
      isHypotheticalOnly(state, clause.id);
    wizardButton.title = wizardButton.disabled
      ? "micro labels need a non-hypothetical span context"
      : "answer the decision chart";
    wizardButton.addEventListener("click", () => handlers.onOpenWizard(clause.id));
    microCell.appendChild(wizardButton);
    const macroCell = cell(row);
    const select = doc.createElement("select");
    select.disabled = clause.speaker === "IR" || spansContaining(state, clause.id).length === 0;
    const blank = doc.createElement("option");
    blank.value = "";
    blank.textContent = "-";
    select.appendChild(blank);
    for (const token of MACRO_TOKENS) {
      const option = doc.createElement("option");
      option.value = token;
      option.textContent = token;
      if (clause.macro === token) option.selected = true;
      select.appendChild(option);
    }
    select.addEventListener("change", () =>
      handlers.onSetMacro(clause.id, select.value === "" ? null : select.value),
    );
    macroCell.appendChild(select);
    const findingCell = cell(row);
    findingCell.className = "findings";
    for (const finding of byClause.get(clause.id) ?? []) {
      findingCell.appendChild(renderFindingChip(doc, finding, handlers));
    }
  }
  return table;
}

function renderFindingChip(
  doc: Document,
  finding: FindingDoc,
  handlers: EditorHandlers,
): HTMLElement {
  const chip = doc.createElement("span");
  chip.className = `chip chip-${finding.severity.toLowerCase()}`;
  chip.textContent = `${finding.rule_id}`;
  chip.title = finding.message;
  if (finding.rule_id === "formal-noun-topic-split" && finding.position !== null) {
    const split = doc.createElement("button");
    split.textContent = "split here";
    split.addEventListener("click", () => handlers.onSplit(finding.position!));
    chip.appendChild(split);
  }
  if (
    (finding.rule_id === "formal-noun-subject-merge" ||
      finding.rule_id === "quote-unmarked-merge") &&
    finding.clause_id !== null
  ) {
    const merge = doc.createElement("button");
    merge.textContent = "merge";
    merge.addEventListener("click", () => handlers.onMerge(finding.clause_id!));
    chip.appendChild(merge);
  }
  return chip;
}

export function renderMetricList(
  doc: Document,
  rows: { label: string; value: string }[],
): HTMLElement {
  const list = doc.createElement("dl");
  list.className = "metrics";
  for (const row of rows) {
    const dt = doc.createElement("dt");
    dt.textContent = row.label;
    const dd = doc.createElement("dd");
    dd.textContent = row.value;
    list.appendChild(dt);
    list.appendChild(dd);
  }
  return list;
}
