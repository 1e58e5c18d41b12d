/** Non-blocking error notices that dismiss themselves. */

export function showToast(root: HTMLElement, message: string, ms = 4000): void {
  let box = root.querySelector<HTMLElement>(".toasts");
  if (!box) {
    box = document.createElement("div");
    box.className = "toasts";
    box.style.cssText = "position:fixed;bottom:12px;right:12px;z-index:10;";
    root.appendChild(box);
  }
  const item = document.createElement("div");
  item.className = "toast";
  item.textContent = message;
  item.style.cssText =
    "background:#b3261e;color:#fff;padding:8px 12px;border-radius:6px;" +
    "margin-top:6px;font-size:13px;max-width:360px;";
  box.appendChild(item);
  setTimeout(() => item.remove(), ms);
}
