import type { QueryResult } from "./api.js";

export type MapKind = "probabilistic" | "survival" | "cells";
export type OverlayKind = "expected" | "meanfield" | "truth";

export interface QueryPoint {
  r: number;
  c: number;
  result: QueryResult;
}

/** What the page is showing; query points stay in selection order. */
export interface ViewState {
  activeMap: MapKind;
  agreement: number; // in (0.5, 1]
  bins: number; // >= 1
  overlays: Set<OverlayKind>;
  queries: QueryPoint[];
  assignedPixels: number | null; // from the latest cells response
}

export function initialState(): ViewState {
  return {
    activeMap: "probabilistic",
    agreement: 0.95,
    bins: 9,
    overlays: new Set(),
    queries: [],
    assignedPixels: null,
  };
}

export function clampAgreement(a: number): number {
  if (!Number.isFinite(a)) return 0.95;
  return Math.min(1.0, Math.max(0.51, a));
}

export function clampBins(k: number): number {
  if (!Number.isFinite(k)) return 9;
  return Math.max(1, Math.round(k));
}

/** Map a click inside the image box to grid coordinates. */
export function gridPointFromClick(
  rect: { left: number; top: number; width: number; height: number },
  gridWidth: number,
  gridHeight: number,
  clientX: number,
  clientY: number,
): { r: number; c: number } | null {
  if (rect.width <= 0 || rect.height <= 0) return null;
  const fx = (clientX - rect.left) / rect.width;
  const fy = (clientY - rect.top) / rect.height;
  if (fx < 0 || fx >= 1 || fy < 0 || fy >= 1) return null;
  return { r: Math.floor(fy * gridHeight), c: Math.floor(fx * gridWidth) };
}
