/** Micro-label wizard session: walks the decision chart one question at
 * a time against the service, seeding the first (span-context) answer
 * from the clause itself so the dialog can only reach labels the chart
 * permits for that context.
 */

import type { WorkbenchApi } from "./api.js";
import type { MicroToken, QuestionDoc } from "./types.js";

const SPAN_CONTEXT_NODE = "hypothetical-only";

export class WizardSession {
  private answers: Record<string, boolean>;
  private current: QuestionDoc | null = null;

  constructor(
    private readonly api: WorkbenchApi,
    readonly clauseId: number,
    inHypotheticalOnly: boolean,
  ) {
    this.answers = { [SPAN_CONTEXT_NODE]: inHypotheticalOnly };
  }

  /** Fetch the question to show (or the terminal outcome). */
  async start(): Promise<QuestionDoc> {
    this.current = await this.api.wizardNext(this.answers);
    return this.current;
  }

  /** Record an answer to the visible question and advance. */
  async answer(value: boolean): Promise<QuestionDoc> {
    if (!this.current || this.current.terminal || this.current.node_id === null) {
      throw new Error("no open question to answer");
    }
    this.answers[this.current.node_id] = value;
    this.current = await this.api.wizardNext(this.answers);
    return this.current;
  }

  get question(): QuestionDoc | null {
    return this.current;
  }

  get done(): boolean {
    return this.current?.terminal ?? false;
  }

  /** Outcome token once terminal: a micro label or "none". */
  get outcome(): MicroToken | "none" {
    if (!this.current?.terminal || this.current.outcome === null) {
      throw new Error("wizard has not reached an outcome");
    }
    return this.current.outcome;
  }

  /** Double-check the outcome against the decide endpoint. */
  async confirm(): Promise<MicroToken | null> {
    return this.api.wizardDecide(this.answers);
  }
}
