import { PlayServiceClient } from "./api.js";
import { mount } from "./render.js";
import { GameClient } from "./state.js";

// Service base URL: ?service=... query parameter, else same origin.
function baseUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("service");
  return (fromQuery ?? "").replace(/\/$/, "");
}

export function boot(root: HTMLElement): GameClient {
  const client = new GameClient(new PlayServiceClient(baseUrl()));
  mount(root, client);

  // keep the session id in the hash so a refresh restores the innings
  client.subscribe((state) => {
    window.location.hash = state.session ? state.session.id : "";
  });
  const existing = window.location.hash.slice(1);
  if (existing) void client.restore(existing);
  return client;
}

const root = document.getElementById("app");
if (root) boot(root);
