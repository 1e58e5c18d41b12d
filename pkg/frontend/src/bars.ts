/** Bar chart of one destination distribution.
 *
 * Values come from the server verbatim; the only arithmetic here is
 * percentage formatting for display.
 */

function cssColor(rgb: [number, number, number]): string {
  const [r, g, b] = rgb.map((x) => Math.round(x * 255));
  return `rgb(${r},${g},${b})`;
}

export function renderBars(
  root: HTMLElement,
  labels: number[],
  probabilities: number[],
  palette: [number, number, number][],
): void {
  root.innerHTML = labels
    .map((label, i) => {
      const p = probabilities[i];
      const pct = (100 * p).toFixed(0);
      const color = palette[label % palette.length];
      return `
      <div class="bar-row" data-label="${label}" data-prob="${p}"
           style="display:flex;gap:8px;align-items:center;margin:3px 0;">
        <div style="width:70px;font-size:12px;">label ${label}</div>
        <div style="flex:1;height:12px;background:#eee;border-radius:6px;overflow:hidden;">
          <div class="bar-fill" style="width:${100 * p}%;height:100%;background:${cssColor(color)};"></div>
        </div>
        <div class="bar-pct" style="width:44px;text-align:right;font-size:12px;">${pct}%</div>
      </div>`;
    })
    .join("");
}
