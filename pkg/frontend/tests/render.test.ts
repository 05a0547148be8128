// @vitest-environment happy-dom
import { describe, expect, it, vi } from "vitest";

import { paintSpan, splitClause, stateFromBundle } from "../src/editor.js";
import { renderEditorTable, type EditorHandlers } from "../src/render.js";
import type { BundleDoc, FindingDoc } from "../src/types.js";

const IR = "doko ni ikimashita ka";
const IE = "hajimete kita toki wa ureshikatta desu sorekara mainichi aruita";

function bundle(): BundleDoc {
  return {
    format: "labov-bundle",
    version: 1,
    fragment_id: "r1",
    topic: "Other",
    raw_text: IR + IE,
    raw_text_sha256: "x".repeat(64),
    turns: [
      ["IR", IR.length],
      ["IE", IE.length],
    ],
    layers: [],
    gold: null,
  };
}

function handlers(): EditorHandlers {
  return {
    onSplit: vi.fn(),
    onMerge: vi.fn(),
    onPaintSpan: vi.fn(),
    onRemoveSpan: vi.fn(),
    onOpenWizard: vi.fn(),
    onSetMacro: vi.fn(),
    onSelect: vi.fn(),
  };
}

describe("editor table", () => {
  it("mirrors the columnar model with span lanes", () => {
    let state = stateFromBundle(bundle(), "a1");
    state = splitClause(state, IR.length + 38);
    state = paintSpan(state, "Story", 2, 3);
    const table = renderEditorTable(document, state, [], handlers());
    const rows = Array.from(table.querySelectorAll("tbody tr"));
    const cells = (row: Element) => Array.from(row.querySelectorAll("td"));
    expect(rows).toHaveLength(3);
    expect(cells(rows[0]!)[1]!.textContent).toBe("IR");
    expect(rows[0]!.className).toContain("interviewer");
    // story lane shows S at clause 2, E at clause 3
    expect(cells(rows[1]!)[3]!.textContent).toContain("S");
    expect(cells(rows[2]!)[3]!.textContent).toContain("E");
    // wizard button disabled on the interviewer row, enabled inside the span
    const irWizard = cells(rows[0]!)[6]!.querySelector("button")!;
    const ieWizard = cells(rows[1]!)[6]!.querySelector("button")!;
    expect(irWizard.disabled).toBe(true);
    expect(ieWizard.disabled).toBe(false);
  });

  it("offers a split action on topic-cue suggestions", () => {
    const state = stateFromBundle(bundle(), "a1");
    const finding: FindingDoc = {
      rule_id: "formal-noun-topic-split",
      severity: "Warning",
      fragment_id: "r1",
      clause_id: 2,
      position: IR.length + 21,
      message: "topic phrase is not followed by a clause boundary",
      guideline_ref: "segmentation.formal-nouns",
    };
    const h = handlers();
    const table = renderEditorTable(document, state, [finding], h);
    const chip = table.querySelector(".chip-warning")!;
    expect(chip.textContent).toContain("formal-noun-topic-split");
    (chip.querySelector("button") as HTMLButtonElement).click();
    expect(h.onSplit).toHaveBeenCalledWith(IR.length + 21);
  });

  it("disables micro controls in hypothetical-only context", () => {
    let state = stateFromBundle(bundle(), "a1");
    state = splitClause(state, IR.length + 38);
    state = paintSpan(state, "Hypothetical", 2, 3);
    const table = renderEditorTable(document, state, [], handlers());
    const rows = table.querySelectorAll("tbody tr");
    const wizard = rows[1]!.querySelectorAll("td")[6]!.querySelector("button")!;
    expect(wizard.disabled).toBe(true);
  });
});
