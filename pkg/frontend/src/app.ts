import { ApiClient, Meta } from "./api.js";
import { renderBars } from "./bars.js";
import {
  MapKind,
  OverlayKind,
  ViewState,
  clampAgreement,
  clampBins,
  gridPointFromClick,
  initialState,
} from "./state.js";
import { showToast } from "./toast.js";

const OVERLAY_COLORS: Record<OverlayKind, string> = {
  expected: "#000000",
  meanfield: "#dc1e1e",
  truth: "#1ea01e",
};

/** The explorer page: map views, click queries, threshold and bin controls.
 *
 * All displayed numbers come from the server; event handlers are chained on
 * one promise so a test can await settled() after dispatching DOM events.
 */
export class ExplorerApp {
  state: ViewState = initialState();
  meta!: Meta;
  private ops: Promise<void> = Promise.resolve();
  private mapBox!: HTMLElement;
  private mapImg!: HTMLImageElement;
  private overlayCanvas!: HTMLCanvasElement;
  private queryPanel!: HTMLElement;
  private assignedEl!: HTMLElement;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
  ) {}

  async init(): Promise<void> {
    this.meta = await this.api.meta();
    this.state.agreement = this.meta.thresholds[0] ?? 0.95;
    this.build();
    this.refreshMap();
    await this.settled();
  }

  /** Resolves once every queued event handler has finished. */
  settled(): Promise<void> {
    return this.ops;
  }

  private enqueue(work: () => Promise<void>): void {
    this.ops = this.ops.then(work).catch((err) => {
      if ((err as Error).name !== "AbortError") {
        showToast(this.root, String((err as Error).message ?? err));
      }
    });
  }

  private build(): void {
    const { width, height } = this.meta;
    this.root.innerHTML = `
      <div class="controls" style="display:flex;gap:16px;align-items:center;flex-wrap:wrap;margin:8px 0;">
        <span class="tabs">
          <button data-map="probabilistic">probabilistic</button>
          <button data-map="survival">survival</button>
          <button data-map="cells">cells</button>
        </span>
        <label>agreement
          <input class="threshold" type="range" min="0.51" max="1.0" step="0.01" value="${this.state.agreement}">
          <span class="threshold-value">${this.state.agreement.toFixed(2)}</span>
        </label>
        <span class="assigned" data-assigned="">assigned: &#8211;</span>
        <label>bins <input class="bins" type="number" min="1" value="${this.state.bins}" style="width:52px"></label>
        <span class="overlays">
          ${(["expected", "meanfield", "truth"] as OverlayKind[])
            .filter((k) => this.meta.boundary_kinds.includes(k))
            .map((k) => `<label><input type="checkbox" data-overlay="${k}">${k}</label>`)
            .join(" ")}
        </span>
      </div>
      <div class="map-box" style="position:relative;display:inline-block;">
        <img class="map-img" width="${width}" height="${height}" alt="summary map">
        <canvas class="overlay" width="${width}" height="${height}"
                style="position:absolute;left:0;top:0;pointer-events:none;"></canvas>
      </div>
      <div class="query-panel"></div>`;

    this.mapBox = this.root.querySelector<HTMLElement>(".map-box")!;
    this.mapImg = this.root.querySelector<HTMLImageElement>(".map-img")!;
    this.overlayCanvas = this.root.querySelector<HTMLCanvasElement>(".overlay")!;
    this.queryPanel = this.root.querySelector<HTMLElement>(".query-panel")!;
    this.assignedEl = this.root.querySelector<HTMLElement>(".assigned")!;

    for (const btn of this.root.querySelectorAll<HTMLButtonElement>("button[data-map]")) {
      btn.addEventListener("click", () => this.setMap(btn.dataset.map as MapKind));
    }
    const slider = this.root.querySelector<HTMLInputElement>(".threshold")!;
    slider.addEventListener("input", () => this.onThreshold(Number(slider.value)));
    const bins = this.root.querySelector<HTMLInputElement>(".bins")!;
    bins.addEventListener("change", () => this.onBins(Number(bins.value)));
    for (const box of this.root.querySelectorAll<HTMLInputElement>("input[data-overlay]")) {
      box.addEventListener("change", () =>
        this.toggleOverlay(box.dataset.overlay as OverlayKind, box.checked),
      );
    }
    this.mapBox.addEventListener("click", (ev) => this.onMapClick(ev as MouseEvent));
  }

  setMap(kind: MapKind): void {
    this.state.activeMap = kind;
    this.refreshMap();
  }

  private refreshMap(): void {
    const { activeMap, agreement, bins } = this.state;
    if (activeMap === "cells") {
      this.mapImg.src = this.api.cellsImageUrl(agreement);
      this.enqueue(async () => {
        const cells = await this.api.cells(agreement);
        this.state.assignedPixels = cells.assigned;
        this.assignedEl.dataset.assigned = String(cells.assigned);
        this.assignedEl.textContent = `assigned: ${cells.assigned}`;
      });
    } else if (activeMap === "survival") {
      this.mapImg.src = this.api.survivalImageUrl(bins);
    } else {
      this.mapImg.src = this.api.mapUrl("probabilistic");
    }
  }

  onThreshold(value: number): void {
    this.state.agreement = clampAgreement(value);
    this.root.querySelector<HTMLElement>(".threshold-value")!.textContent =
      this.state.agreement.toFixed(2);
    if (this.state.activeMap === "cells") this.refreshMap();
  }

  onBins(value: number): void {
    this.state.bins = clampBins(value);
    if (this.state.activeMap === "survival") this.refreshMap();
  }

  toggleOverlay(kind: OverlayKind, on: boolean): void {
    if (on) this.state.overlays.add(kind);
    else this.state.overlays.delete(kind);
    this.enqueue(() => this.drawOverlays());
  }

  private async drawOverlays(): Promise<void> {
    const wanted = [...this.state.overlays];
    const fetched = await Promise.all(wanted.map((k) => this.api.boundaries(k)));
    const ctx = this.overlayCanvas.getContext("2d");
    if (!ctx) return; // drawing surface unavailable; state still updated
    ctx.clearRect(0, 0, this.overlayCanvas.width, this.overlayCanvas.height);
    for (const bounds of fetched) {
      ctx.strokeStyle = OVERLAY_COLORS[bounds.kind as OverlayKind] ?? "#000";
      ctx.lineWidth = 1;
      for (const line of bounds.polylines) {
        if (line.length < 2) continue;
        ctx.beginPath();
        ctx.moveTo(line[0][1], line[0][0]);
        for (const [r, c] of line.slice(1)) ctx.lineTo(c, r);
        ctx.stroke();
      }
    }
  }

  onMapClick(ev: MouseEvent): void {
    const rect = this.mapBox.getBoundingClientRect();
    const point = gridPointFromClick(rect, this.meta.width, this.meta.height, ev.clientX, ev.clientY);
    if (!point) return;
    this.enqueue(async () => {
      const result = await this.api.query(point.r, point.c);
      this.state.queries.push({ r: point.r, c: point.c, result });
      const entry = document.createElement("div");
      entry.className = "query-entry";
      entry.innerHTML = `<div class="query-title" style="font-weight:600;margin:8px 0 2px;">point (${point.r}, ${point.c})</div><div class="query-bars"></div>`;
      this.queryPanel.appendChild(entry);
      renderBars(
        entry.querySelector<HTMLElement>(".query-bars")!,
        result.labels,
        result.probabilities,
        this.meta.palette,
      );
      const marker = document.createElement("div");
      marker.className = "query-marker";
      marker.style.cssText =
        `position:absolute;left:${point.c - 2}px;top:${point.r - 2}px;width:5px;height:5px;` +
        "border-radius:50%;background:#fff;border:1px solid #000;pointer-events:none;";
      this.mapBox.appendChild(marker);
    });
  }
}
