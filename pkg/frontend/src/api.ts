/** Typed client for the read-only map service.
 *
 * Every JSON getter accepts an optional control key; a new request with the
 * same key aborts the one still in flight, so rapid slider moves never
 * apply out of order.
 */

export interface Meta {
  width: number;
  height: number;
  n: number;
  l: number;
  labels: number[];
  anchors: [number, number][];
  palette: [number, number, number][];
  thresholds: number[];
  boundary_kinds: string[];
  survival_normalization: string;
}

export interface QueryResult {
  r: number;
  c: number;
  labels: number[];
  probabilities: number[];
}

export interface CellsResult {
  width: number;
  height: number;
  a: number;
  assigned: number;
  rle: [number, number, number][];
}

export interface BoundariesResult {
  kind: string;
  polylines: [number, number][][];
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(public base: string = "") {}

  private async getJson<T>(path: string, key?: string): Promise<T> {
    let signal: AbortSignal | undefined;
    if (key !== undefined) {
      this.inflight.get(key)?.abort();
      const ctl = new AbortController();
      this.inflight.set(key, ctl);
      signal = ctl.signal;
    }
    const resp = await fetch(this.base + path, { signal });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        detail = ((await resp.json()) as { error?: string }).error ?? detail;
      } catch {
        /* not json */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  meta(): Promise<Meta> {
    return this.getJson<Meta>("/api/meta");
  }

  query(r: number, c: number): Promise<QueryResult> {
    return this.getJson<QueryResult>(`/api/query?r=${r}&c=${c}`, "query");
  }

  cells(a: number): Promise<CellsResult> {
    return this.getJson<CellsResult>(`/api/cells?a=${a}`, "cells");
  }

  boundaries(kind: string): Promise<BoundariesResult> {
    return this.getJson<BoundariesResult>(`/api/boundaries?kind=${kind}`, `boundaries:${kind}`);
  }

  mapUrl(kind: "probabilistic" | "survival"): string {
    return `${this.base}/api/maps/${kind}`;
  }

  cellsImageUrl(a: number): string {
    return `${this.base}/api/cells?a=${a}&format=png`;
  }

  survivalImageUrl(bins: number): string {
    return `${this.base}/api/survival?bins=${bins}`;
  }
}
