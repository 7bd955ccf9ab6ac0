/**
 * Typed client for the evaluation API. Every helper throws ApiError on a
 * non-2xx response, carrying the server's message and findings so callers
 * can render them inline.
 */

import { serializeQuery } from "./model.js";
import type { Finding, NodeSummary, QueryTree } from "./model.js";

export interface LogMetadata {
  logId: string;
  counts: { events: number; objects: number };
  eventTypes: string[];
  objectTypes: string[];
  qualifiers: string[];
}

export interface EvaluateResponse {
  resultId: string;
  perNode: Record<string, NodeSummary>;
}

export interface ResultRow {
  vars: Record<string, string>;
  satisfied: boolean;
  cbsExcluded: boolean;
  verdicts: boolean[];
  labels: Record<string, number | null>;
}

export interface ResultPage {
  total: number;
  offset: number;
  limit: number;
  varNames: string[];
  labelNames: string[];
  hasConstraints: boolean;
  rows: ResultRow[];
}

export class ApiError extends Error {
  status: number;
  findings: Finding[];

  constructor(status: number, message: string, findings: Finding[] = []) {
    super(message);
    this.status = status;
    this.findings = findings;
  }
}

async function raise(response: Response): Promise<never> {
  let message = `${response.status} ${response.statusText}`;
  let findings: Finding[] = [];
  try {
    const body = (await response.json()) as { error?: string; findings?: Finding[] };
    if (typeof body.error === "string") message = body.error;
    if (Array.isArray(body.findings)) findings = body.findings;
  } catch {
    // non-JSON error body, keep the status line
  }
  throw new ApiError(response.status, message, findings);
}

export class ApiClient {
  constructor(private base: string = "") {}

  async uploadLog(body: string | Blob, signal?: AbortSignal): Promise<LogMetadata> {
    const response = await fetch(`${this.base}/api/log`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body,
      signal,
    });
    if (!response.ok) await raise(response);
    return (await response.json()) as LogMetadata;
  }

  async logInfo(logId: string, signal?: AbortSignal): Promise<LogMetadata> {
    const response = await fetch(`${this.base}/api/log/${encodeURIComponent(logId)}/info`, {
      signal,
    });
    if (!response.ok) await raise(response);
    return (await response.json()) as LogMetadata;
  }

  async evaluate(logId: string, tree: QueryTree, signal?: AbortSignal): Promise<EvaluateResponse> {
    const response = await fetch(`${this.base}/api/query/evaluate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      // send the canonical form so equal drafts share a server-side result id
      body: JSON.stringify({ logId, tree: JSON.parse(serializeQuery(tree)) }),
      signal,
    });
    if (!response.ok) await raise(response);
    return (await response.json()) as EvaluateResponse;
  }

  async fetchPage(
    resultId: string,
    nodeId: string,
    offset: number,
    limit: number,
    includeBasicOnly: boolean,
    signal?: AbortSignal,
  ): Promise<ResultPage> {
    const params = new URLSearchParams({
      offset: String(offset),
      limit: String(limit),
      includeBasicOnly: includeBasicOnly ? "true" : "false",
    });
    const response = await fetch(
      `${this.base}/api/result/${encodeURIComponent(resultId)}/node/${encodeURIComponent(nodeId)}?${params}`,
      { signal },
    );
    if (!response.ok) await raise(response);
    return (await response.json()) as ResultPage;
  }

  csvUrl(resultId: string, nodeId: string, includeBasicOnly: boolean): string {
    const suffix = includeBasicOnly ? "?includeBasicOnly=true" : "";
    return `${this.base}/api/result/${encodeURIComponent(resultId)}/node/${encodeURIComponent(nodeId)}/export.csv${suffix}`;
  }
}
