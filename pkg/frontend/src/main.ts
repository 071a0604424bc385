import { ApiClient } from "./api.js";
import { App } from "./app.js";

declare global {
  interface Window {
    API_BASE?: string;
  }
}

const root = document.getElementById("app");
if (root) {
  const api = new ApiClient(window.API_BASE ?? "");
  new App(root, api).start();
}
