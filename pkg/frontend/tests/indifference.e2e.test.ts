// Service-level indifference: whatever fixed policy the human plays, the
// long-run mean score equals the game value. 500 automated innings with a
// stubborn policy must land within 4 standard errors of 21.

import { expect, inject, test } from "vitest";

import { PlayServiceClient } from "../src/api.js";

const serviceUrl = inject("serviceUrl");

const SESSIONS = 500;
const GAME_VALUE = 21; // variant 2 with runs 1..6

async function playOneInnings(api: PlayServiceClient, seed: number): Promise<number> {
  const summary = await api.createGame({
    spec: { variant: 2, scores: [1, 2, 3, 4, 5, 6] },
    role: "max",
    rule: { kind: "fixed", w: 1 },
    seed,
    reveal_bot_strategy: false,
  });
  let state = summary.state;
  let total = 0;
  while (state !== "finished") {
    const outcome = await api.playMove(summary.id, 2); // always the same action
    state = outcome.state;
    total = outcome.totals.human;
  }
  return total;
}

test(`human mean over ${SESSIONS} sessions is within 4 SE of the game value`, async () => {
  const api = new PlayServiceClient(serviceUrl);
  const totals: number[] = [];
  const queue = Array.from({ length: SESSIONS }, (_, i) => 700_000 + i);
  const workers = Array.from({ length: 8 }, async () => {
    for (;;) {
      const seed = queue.shift();
      if (seed === undefined) return;
      totals.push(await playOneInnings(api, seed));
    }
  });
  await Promise.all(workers);

  expect(totals).toHaveLength(SESSIONS);
  const mean = totals.reduce((a, b) => a + b, 0) / SESSIONS;
  const variance =
    totals.reduce((a, b) => a + (b - mean) ** 2, 0) / (SESSIONS - 1);
  const se = Math.sqrt(variance / SESSIONS);
  const z = (mean - GAME_VALUE) / se;
  expect(Math.abs(z), `mean ${mean.toFixed(2)}, se ${se.toFixed(3)}`).toBeLessThanOrEqual(4);
}, 300_000);
