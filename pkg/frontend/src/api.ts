/** Thin typed client for the exploration service. */

import {
  Axis,
  Catalog,
  ComponentTooltip,
  ErrorEnvelope,
  ExplorationRequest,
  LinkTooltip,
  SankeyDoc,
} from "./types";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly code: string,
    public readonly field: string | null,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function readError(response: { status: number; json(): Promise<unknown> }): Promise<never> {
  let envelope: ErrorEnvelope | null = null;
  try {
    envelope = (await response.json()) as ErrorEnvelope;
  } catch {
    // non-JSON error body; fall through to the generic message
  }
  if (envelope && typeof envelope === "object" && envelope.error) {
    const { code, field, message } = envelope.error;
    throw new ApiError(message, code, field, response.status);
  }
  throw new ApiError(`request failed with status ${response.status}`, "error", null, response.status);
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const response = await fetch(url, { signal });
  if (!response.ok) await readError(response);
  return (await response.json()) as T;
}

export function fetchCatalog(signal?: AbortSignal): Promise<Catalog> {
  return getJson<Catalog>("/api/catalog", signal);
}

export async function fetchDiagram(
  request: ExplorationRequest,
  signal?: AbortSignal,
): Promise<SankeyDoc> {
  const response = await fetch("/api/diagram", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(request),
    signal,
  });
  if (!response.ok) await readError(response);
  return (await response.json()) as SankeyDoc;
}

export function fetchComponentTooltip(
  state: ExplorationRequest,
  axis: Axis,
  level: string,
  signal?: AbortSignal,
): Promise<ComponentTooltip> {
  const params = new URLSearchParams({ axis, level, state: JSON.stringify(state) });
  return getJson<ComponentTooltip>(`/api/tooltip/component?${params}`, signal);
}

export function fetchLinkTooltip(
  state: ExplorationRequest,
  axisA: Axis,
  levelA: string,
  axisB: Axis,
  levelB: string,
  signal?: AbortSignal,
): Promise<LinkTooltip> {
  const params = new URLSearchParams({
    axisA,
    levelA,
    axisB,
    levelB,
    state: JSON.stringify(state),
  });
  return getJson<LinkTooltip>(`/api/tooltip/link?${params}`, signal);
}

/** Serializes a stream of requests so only the newest one lands: starting
 * a new call aborts the previous in-flight one, and a stale resolution is
 * reported as aborted rather than delivered out of order. */
export class LatestWins {
  private controller: AbortController | null = null;

  async run<T>(task: (signal: AbortSignal) => Promise<T>): Promise<T> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      const result = await task(controller.signal);
      if (controller.signal.aborted) throw new DOMException("superseded", "AbortError");
      return result;
    } finally {
      if (this.controller === controller) this.controller = null;
    }
  }

  abort(): void {
    this.controller?.abort();
    this.controller = null;
  }
}

export function isAbort(error: unknown): boolean {
  return error instanceof DOMException && error.name === "AbortError";
}
