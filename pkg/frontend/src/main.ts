/** Workbench bootstrap: fragment list, editor, wizard dialog, save with
 * optimistic concurrency, and the agreement dashboard.
 */

import { ConflictError, SchemaError, WorkbenchApi } from "./api.js";
import {
  applyEdit,
  applyWizardOutcome,
  markSaved,
  mergeClauses,
  newSession,
  paintSpan,
  redo,
  removeSpan,
  setMacro,
  splitClause,
  stateFromBundle,
  toLayerDoc,
  undo,
  type EditorSession,
  EditBlocked,
  isHypotheticalOnly,
} from "./editor.js";
import {
  clauseDisagreements,
  discussionQueue,
  labelReportRows,
  pairwiseRows,
  segReportRows,
} from "./dashboard.js";
import { renderEditorTable, renderMetricList } from "./render.js";
import type { BundleDoc, FindingDoc, MacroToken, NarrativeKind } from "./types.js";
import { WizardSession } from "./wizard.js";

interface AppState {
  api: WorkbenchApi;
  fragmentId: string | null;
  bundle: (BundleDoc & { version: string }) | null;
  session: EditorSession | null;
  findings: FindingDoc[];
  selection: { start: number; end: number } | null;
  wizard: WizardSession | null;
  wizardClause: number | null;
  status: string;
}

const app: AppState = {
  api: new WorkbenchApi("", readAnnotator()),
  fragmentId: null,
  bundle: null,
  session: null,
  findings: [],
  selection: null,
  wizard: null,
  wizardClause: null,
  status: "",
};

function readAnnotator(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("annotator") ?? "a1";
}

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

async function loadFragmentList(): Promise<void> {
  const list = byId("fragments");
  list.textContent = "";
  for (const summary of await app.api.listFragments()) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = `${summary.fragment_id} (${summary.topic})`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      void openFragment(summary.fragment_id);
    });
    item.appendChild(link);
    list.appendChild(item);
  }
}

async function openFragment(fragmentId: string): Promise<void> {
  const bundle = await app.api.getFragment(fragmentId);
  app.fragmentId = fragmentId;
  app.bundle = bundle;
  app.session = newSession(
    stateFromBundle(bundle, readAnnotator()),
    bundle.version,
  );
  app.selection = null;
  app.wizard = null;
  await refreshFindings();
  renderAll();
}

async function refreshFindings(): Promise<void> {
  if (!app.session || !app.bundle || !app.fragmentId) return;
  const layer = toLayerDoc(
    app.session.present,
    readAnnotator(),
    app.bundle.raw_text_sha256,
  );
  const report = await app.api.lintLayer(app.fragmentId, layer);
  app.findings = report.findings;
}

function edit(step: (state: EditorSession["present"]) => EditorSession["present"]): void {
  if (!app.session) return;
  try {
    app.session = applyEdit(app.session, step);
    app.status = "";
  } catch (error) {
    if (error instanceof EditBlocked) {
      app.status = `blocked (${error.rule}): ${error.message}`;
    } else {
      throw error;
    }
  }
  void refreshFindings().then(renderAll);
  renderAll();
}

async function save(): Promise<void> {
  if (!app.session || !app.bundle || !app.fragmentId) return;
  const layer = toLayerDoc(
    app.session.present,
    readAnnotator(),
    app.bundle.raw_text_sha256,
  );
  try {
    const result = await app.api.putLayer(
      app.fragmentId,
      readAnnotator(),
      layer,
      app.session.version,
    );
    app.session = markSaved(app.session, result.version);
    app.status = "saved";
  } catch (error) {
    if (error instanceof ConflictError) {
      app.status = "someone else saved this fragment; reload to continue";
    } else if (error instanceof SchemaError) {
      app.findings = error.findings;
      app.status = `rejected: ${error.message}`;
    } else {
      throw error;
    }
  }
  renderAll();
}

async function openWizard(clauseId: number): Promise<void> {
  if (!app.session) return;
  app.wizardClause = clauseId;
  app.wizard = new WizardSession(
    app.api,
    clauseId,
    isHypotheticalOnly(app.session.present, clauseId),
  );
  await app.wizard.start();
  renderWizard();
}

async function answerWizard(value: boolean): Promise<void> {
  if (!app.wizard || !app.wizardClause) return;
  const question = await app.wizard.answer(value);
  if (question.terminal && question.outcome !== null) {
    const outcome = question.outcome;
    const clauseId = app.wizardClause;
    edit((state) => applyWizardOutcome(state, clauseId, outcome));
    app.wizard = null;
    app.wizardClause = null;
  }
  renderWizard();
}

function renderWizard(): void {
  const host = byId("wizard");
  host.textContent = "";
  const question = app.wizard?.question;
  if (!app.wizard || !question || question.terminal) return;
  const box = document.createElement("div");
  box.className = "wizard-box";
  const ja = document.createElement("p");
  ja.textContent = question.question_ja;
  const en = document.createElement("p");
  en.textContent = question.question_en;
  box.append(ja, en);
  for (const example of question.examples) {
    const hint = document.createElement("small");
    hint.textContent = example;
    box.appendChild(hint);
  }
  for (const [label, value] of [
    ["yes", true],
    ["no", false],
  ] as const) {
    const button = document.createElement("button");
    button.textContent = label;
    button.addEventListener("click", () => void answerWizard(value));
    box.appendChild(button);
  }
  host.appendChild(box);
}

async function renderDashboard(): Promise<void> {
  if (!app.fragmentId || !app.bundle) return;
  const host = byId("dashboard");
  host.textContent = "";
  if (app.bundle.layers.length < 2) {
    host.textContent = "agreement needs at least two annotator layers";
    return;
  }
  const seg = await app.api.metricsSegmentation(app.fragmentId);
  host.appendChild(renderMetricList(document, segReportRows(seg)));
  const pairs = document.createElement("pre");
  pairs.textContent = pairwiseRows(seg)
    .map((row) => row.join("  "))
    .join("\n");
  host.appendChild(pairs);
  try {
    const labels = await app.api.metricsLabels(app.fragmentId, "micro");
    host.appendChild(renderMetricList(document, labelReportRows(labels)));
  } catch {
    // layers not aligned to a shared segmentation yet
  }
  try {
    const outcomes = (await app.api.adjudicate(app.fragmentId)).outcomes;
    const queue = discussionQueue(outcomes);
    const marks = clauseDisagreements(outcomes);
    const info = document.createElement("p");
    info.textContent = `${queue.length} outcome(s) need discussion; ${marks.size} clause(s) show disagreement`;
    host.appendChild(info);
  } catch {
    // same: adjudication needs aligned layers
  }
}

function renderAll(): void {
  byId("status").textContent = app.status;
  const host = byId("editor");
  host.textContent = "";
  if (!app.session) return;
  const table = renderEditorTable(
    document,
    app.session.present,
    app.findings,
    {
      onSplit: (position) => edit((state) => splitClause(state, position)),
      onMerge: (clauseId) => edit((state) => mergeClauses(state, clauseId)),
      onPaintSpan: (kind, start, end) =>
        edit((state) => paintSpan(state, kind, start, end)),
      onRemoveSpan: (kind, start) => edit((state) => removeSpan(state, kind, start)),
      onOpenWizard: (clauseId) => void openWizard(clauseId),
      onSetMacro: (clauseId, token) =>
        edit((state) => setMacro(state, clauseId, (token as MacroToken) ?? null)),
      onSelect: (clauseId) => {
        if (app.selection === null) {
          app.selection = { start: clauseId, end: clauseId };
        } else {
          app.selection = {
            start: Math.min(app.selection.start, clauseId),
            end: Math.max(app.selection.end, clauseId),
          };
        }
        renderAll();
      },
    },
    app.selection,
  );
  host.appendChild(table);
  renderWizard();
}

function wireToolbar(): void {
  byId("save").addEventListener("click", () => void save());
  byId("undo").addEventListener("click", () => {
    if (app.session) app.session = undo(app.session);
    renderAll();
  });
  byId("redo").addEventListener("click", () => {
    if (app.session) app.session = redo(app.session);
    renderAll();
  });
  byId("reload").addEventListener("click", () => {
    if (app.fragmentId) void openFragment(app.fragmentId);
  });
  byId("refresh-dashboard").addEventListener("click", () => void renderDashboard());
  for (const kind of ["Story", "Habitual", "Hypothetical"] as NarrativeKind[]) {
    byId(`paint-${kind.toLowerCase()}`).addEventListener("click", () => {
      if (app.selection) {
        const { start, end } = app.selection;
        edit((state) => paintSpan(state, kind, start, end));
        app.selection = null;
      } else {
        app.status = "select a clause range first (click first and last clause)";
        renderAll();
      }
    });
  }
}

window.addEventListener("DOMContentLoaded", () => {
  wireToolbar();
  void loadFragmentList();
});
