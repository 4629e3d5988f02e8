import { ApiClient } from "./api.js";
import { CurationApp } from "./app.js";

function curatorFromLocation(): string {
  const params = new URLSearchParams(window.location.search);
  const curator = params.get("curator");
  if (curator) return curator;
  return window.prompt("Curator name?") ?? "";
}

const root = document.getElementById("app");
if (root) {
  const curator = curatorFromLocation();
  const app = new CurationApp(root, new ApiClient(), curator);
  app.start().catch((error) => {
    root.textContent = `Could not load assignment for ${curator || "(nobody)"}: ${error}`;
  });
}
