import { ApiClient } from "./api.js";
import { ExplorerApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new ExplorerApp(root, new ApiClient(""));
  app.init().catch((err) => {
    root.textContent = `failed to reach the map service: ${err}`;
  });
}
