// DOM rendering. The whole app re-renders from the client state on every
// change; at desk scale that is simpler than incremental updates and makes
// the "rendered view mirrors the server" invariant easy to audit.

import { CreateRequest, Rule } from "./api.js";
import { ClientGameState, GameClient, parseScores } from "./state.js";

export interface RenderOptions {
  showStrategy: boolean;
}

export function mount(root: HTMLElement, client: GameClient): void {
  const options: RenderOptions = { showStrategy: true };
  const rerender = (state: ClientGameState) => render(root, client, state, options);
  client.subscribe(rerender);
  render(root, client, client.state, options);
}

function render(
  root: HTMLElement,
  client: GameClient,
  state: ClientGameState,
  options: RenderOptions,
): void {
  root.textContent = "";
  root.appendChild(
    state.session === null
      ? newGameForm(client, state)
      : gamePanel(client, state, options, root),
  );
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function newGameForm(client: GameClient, state: ClientGameState): HTMLElement {
  const panel = el("div", { class: "panel", "data-testid": "new-game-form" });
  panel.appendChild(el("h1", {}, "Hand cricket vs the equilibrium bot"));

  const variant = el("select", { "data-testid": "variant" });
  variant.append(el("option", { value: "1" }, "Variant 1 (miss pays your declared run)"));
  variant.append(el("option", { value: "2", selected: "" }, "Variant 2 (defensive action)"));

  const scores = el("input", {
    "data-testid": "scores",
    value: "1 2 3 4 5 6",
    placeholder: "run values, e.g. 1 2 3 4 5 6",
  });

  const role = el("select", { "data-testid": "role" });
  role.append(el("option", { value: "max", selected: "" }, "bat (score runs)"));
  role.append(el("option", { value: "min" }, "bowl (get them out)"));

  const ruleKind = el("select", { "data-testid": "rule-kind" });
  ruleKind.append(el("option", { value: "fixed", selected: "" }, "end on the w-th out"));
  ruleKind.append(el("option", { value: "geometric" }, "each out ends with probability p"));
  const ruleParam = el("input", { "data-testid": "rule-param", value: "1" });

  const seed = el("input", { "data-testid": "seed", placeholder: "seed (optional)" });

  const errorBox = el("div", { class: "error", "data-testid": "form-error" });
  if (state.error) errorBox.textContent = state.error;

  const start = el("button", { "data-testid": "start" }, "start innings");
  if (state.pending) start.setAttribute("disabled", "");
  start.addEventListener("click", () => {
    let req: CreateRequest;
    try {
      req = buildRequest(
        Number(variant.value) as 1 | 2,
        scores.value,
        role.value as "max" | "min",
        ruleKind.value as Rule["kind"],
        ruleParam.value,
        seed.value,
      );
    } catch (err) {
      errorBox.textContent = err instanceof Error ? err.message : String(err);
      return;
    }
    void client.createGame(req);
  });

  for (const [label, control] of [
    ["variant", variant],
    ["run values", scores],
    ["you play as", role],
    ["ending rule", ruleKind],
    ["rule parameter", ruleParam],
    ["seed", seed],
  ] as const) {
    const row = el("label", { class: "row" }, label + " ");
    row.appendChild(control);
    panel.appendChild(row);
  }
  panel.appendChild(start);
  panel.appendChild(errorBox);
  return panel;
}

/** Validates the form and builds the request; throws without sending on bad input. */
export function buildRequest(
  variant: 1 | 2,
  scoresText: string,
  role: "max" | "min",
  ruleKind: Rule["kind"],
  ruleParamText: string,
  seedText: string,
): CreateRequest {
  const scores = parseScores(scoresText);
  const param = Number(ruleParamText);
  let rule: Rule;
  if (ruleKind === "fixed") {
    if (!Number.isInteger(param) || param < 1) {
      throw new Error("w must be a positive integer");
    }
    rule = { kind: "fixed", w: param };
  } else {
    if (!(param > 0 && param <= 1)) {
      throw new Error("p must lie in (0, 1]");
    }
    rule = { kind: "geometric", p: param };
  }
  const req: CreateRequest = { spec: { variant, scores }, role, rule };
  if (seedText.trim() !== "") {
    const seed = Number(seedText);
    if (!Number.isInteger(seed)) throw new Error("seed must be an integer");
    req.seed = seed;
  }
  return req;
}

function gamePanel(
  client: GameClient,
  state: ClientGameState,
  options: RenderOptions,
  root: HTMLElement,
): HTMLElement {
  const session = state.session!;
  const panel = el("div", { class: "panel", "data-testid": "game-panel" });

  const finished = session.state === "finished";
  const banner = el(
    "div",
    { class: finished ? "banner out" : "banner", "data-testid": "banner" },
    finished ? "OUT - innings over" : `innings running (session ${session.id})`,
  );
  panel.appendChild(banner);

  const totals = el("div", { class: "totals" });
  totals.appendChild(
    el("span", { "data-testid": "totals-human" }, formatScore(session.totals.human)),
  );
  totals.appendChild(el("span", {}, " you / bot "));
  totals.appendChild(
    el("span", { "data-testid": "totals-bot" }, formatScore(session.totals.bot)),
  );
  totals.appendChild(el("span", {}, ` | outs ${session.collisions}`));
  panel.appendChild(totals);

  const buttons = el("div", { class: "actions", "data-testid": "actions" });
  for (let action = 0; action < session.action_count; action++) {
    const button = el(
      "button",
      { "data-action": String(action), "data-testid": `action-${action}` },
      actionLabel(session.run_values, action),
    );
    if (state.pending || finished) button.setAttribute("disabled", "");
    button.addEventListener("click", () => void client.playMove(action));
    buttons.appendChild(button);
  }
  panel.appendChild(buttons);

  if (state.error) {
    panel.appendChild(el("div", { class: "error", "data-testid": "move-error" }, state.error));
  }

  if (session.bot_strategy && options.showStrategy) {
    panel.appendChild(strategyChart(session.bot_strategy, session.run_values));
  }

  panel.appendChild(historyTable(session.history));

  const reset = el("button", { "data-testid": "new-game" }, "new game");
  reset.addEventListener("click", () => client.reset());
  panel.appendChild(reset);
  return panel;
}

function actionLabel(runValues: number[] | undefined, action: number): string {
  if (!runValues) return `action ${action}`;
  if (action === runValues.length) return "defend";
  return `run ${formatScore(runValues[action] ?? action)}`;
}

function formatScore(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(3);
}

function strategyChart(weights: number[], runValues: number[] | undefined): HTMLElement {
  const chart = el("div", { class: "chart", "data-testid": "bot-strategy" });
  chart.appendChild(el("div", {}, "bot plays"));
  const peak = Math.max(...weights);
  weights.forEach((weight, action) => {
    const row = el("div", { class: "bar-row" });
    row.appendChild(el("span", { class: "bar-label" }, actionLabel(runValues, action)));
    const bar = el("div", { class: "bar", "data-weight": weight.toFixed(6) });
    bar.style.width = `${(100 * weight) / peak}%`;
    row.appendChild(bar);
    row.appendChild(el("span", {}, ` ${(100 * weight).toFixed(1)}%`));
    chart.appendChild(row);
  });
  return chart;
}

function historyTable(history: { round: number; human_action: number; bot_action: number; human_delta: number; bot_delta: number; collision: boolean }[]): HTMLElement {
  const table = el("table", { class: "history", "data-testid": "history" });
  const head = el("tr");
  for (const caption of ["round", "you", "bot", "your Δ", "bot Δ", ""]) {
    head.appendChild(el("th", {}, caption));
  }
  table.appendChild(head);
  for (const row of history) {
    const tr = el("tr", { "data-testid": `round-${row.round}` });
    tr.appendChild(el("td", {}, String(row.round)));
    tr.appendChild(el("td", {}, String(row.human_action)));
    tr.appendChild(el("td", {}, String(row.bot_action)));
    tr.appendChild(el("td", {}, formatScore(row.human_delta)));
    tr.appendChild(el("td", {}, formatScore(row.bot_delta)));
    tr.appendChild(el("td", {}, row.collision ? "OUT" : ""));
    table.appendChild(tr);
  }
  return table;
}
