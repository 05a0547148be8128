/** Typed client for the annotation service.
 *
 * Every write carries the version token it read (`If-Match`); stale
 * tokens surface as ConflictError (409) so callers can prompt a
 * reload, and schema violations surface as SchemaError (400) carrying
 * the lint findings to render inline.
 */

import type {
  BundleDoc,
  FindingDoc,
  FindingsReport,
  FragmentDoc,
  FragmentSummary,
  LabelReport,
  LayerDoc,
  OutcomeDoc,
  OutcomesReport,
  QuestionDoc,
  SegReport,
  StatsReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly findings: FindingDoc[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** 409: someone else wrote the fragment since we read it. */
export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, message);
    this.name = "ConflictError";
  }
}

/** 400 with lint findings: the layer breaks an annotation rule. */
export class SchemaError extends ApiError {
  constructor(message: string, findings: FindingDoc[]) {
    super(400, message, findings);
    this.name = "SchemaError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface PutLayerResult {
  version: string;
  findings: FindingDoc[];
}

export class WorkbenchApi {
  constructor(
    private readonly baseUrl: string,
    private readonly annotator: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    headers: Record<string, string> = {},
  ): Promise<T> {
    const init: RequestInit = {
      method,
      headers: {
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
        "X-Annotator": this.annotator,
        ...headers,
      },
      ...(body !== undefined ? { body: JSON.stringify(body) } : {}),
    };
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const text = await response.text();
    const doc = text ? JSON.parse(text) : {};
    if (!response.ok) {
      const message = typeof doc.error === "string" ? doc.error : response.statusText;
      if (response.status === 409) throw new ConflictError(message);
      if (response.status === 400 && Array.isArray(doc.findings)) {
        throw new SchemaError(message, doc.findings as FindingDoc[]);
      }
      throw new ApiError(response.status, message);
    }
    return doc as T;
  }

  async listFragments(): Promise<FragmentSummary[]> {
    const doc = await this.request<{ fragments: FragmentSummary[] }>(
      "GET",
      "/fragments",
    );
    return doc.fragments;
  }

  getFragment(fragmentId: string): Promise<BundleDoc & { version: string }> {
    return this.request("GET", `/fragments/${encodeURIComponent(fragmentId)}`);
  }

  getLayer(
    fragmentId: string,
    annotatorId: string,
  ): Promise<LayerDoc & { version: string }> {
    return this.request(
      "GET",
      `/fragments/${encodeURIComponent(fragmentId)}/layers/${encodeURIComponent(annotatorId)}`,
    );
  }

  putLayer(
    fragmentId: string,
    annotatorId: string,
    layer: LayerDoc,
    version: string,
  ): Promise<PutLayerResult> {
    return this.request(
      "PUT",
      `/fragments/${encodeURIComponent(fragmentId)}/layers/${encodeURIComponent(annotatorId)}`,
      layer,
      { "If-Match": version },
    );
  }

  lintFragment(fragment: FragmentDoc): Promise<FindingsReport> {
    return this.request("POST", "/lint", { fragment });
  }

  /** Layer-mode lint: cue findings carry raw-text atom positions. */
  lintLayer(fragmentId: string, layer: LayerDoc): Promise<FindingsReport> {
    return this.request("POST", "/lint", { fragment_id: fragmentId, layer });
  }

  wizardNext(answers: Record<string, boolean>): Promise<QuestionDoc> {
    return this.request("POST", "/wizard/next", { answers });
  }

  async wizardDecide(
    answers: Record<string, boolean>,
  ): Promise<"N" | "R" | "F" | null> {
    const doc = await this.request<{ micro: "N" | "R" | "F" | null }>(
      "POST",
      "/wizard/decide",
      { answers },
    );
    return doc.micro;
  }

  metricsSegmentation(fragmentId: string, nT = 2): Promise<SegReport> {
    return this.request("POST", "/metrics/segmentation", {
      fragment_id: fragmentId,
      n_t: nT,
    });
  }

  metricsLabels(fragmentId: string, field: "micro" | "macro"): Promise<LabelReport> {
    return this.request("POST", "/metrics/labels", {
      fragment_id: fragmentId,
      field,
    });
  }

  adjudicate(
    fragmentId: string,
    field: "micro" | "macro" | "span_membership" | "all" = "all",
  ): Promise<OutcomesReport> {
    return this.request("POST", "/adjudicate", { fragment_id: fragmentId, field });
  }

  resolve(
    outcome: OutcomeDoc,
    resolution: string,
    resolvers: string[],
    note: string,
  ): Promise<OutcomeDoc> {
    return this.request("POST", "/adjudicate/resolve", {
      outcome,
      resolution,
      resolvers,
      note,
    });
  }

  stats(): Promise<StatsReport> {
    return this.request("GET", "/stats");
  }
}
