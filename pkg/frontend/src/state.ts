// Client game state: a thin mirror of the server session view. The server
// is the source of truth; every field shown in the UI comes from its
// payloads, so a failed request leaves the previous state intact.

import {
  ApiError,
  CreateRequest,
  HistoryRow,
  MoveOutcome,
  PlayServiceClient,
  SessionState,
  SessionView,
} from "./api.js";

export type Phase = "idle" | "running" | "finished";

export interface ClientGameState {
  phase: Phase;
  session: SessionView | null;
  pending: boolean;
  error: string | null;
}

export type Listener = (state: ClientGameState) => void;

/** Validate the new-game form before any request is made. */
export function parseScores(text: string): number[] {
  const parts = text.split(/[\s,]+/).filter((p) => p.length > 0);
  if (parts.length === 0) {
    throw new Error("enter at least one score");
  }
  return parts.map((p) => {
    const value = Number(p);
    if (!Number.isFinite(value) || value <= 0) {
      throw new Error(`scores must be positive numbers, got "${p}"`);
    }
    return value;
  });
}

export class GameClient {
  private session: SessionView | null = null;
  private pending = false;
  private error: string | null = null;
  private listeners: Listener[] = [];

  constructor(private readonly api: PlayServiceClient) {}

  get state(): ClientGameState {
    const phase: Phase =
      this.session === null ? "idle" : this.session.state === "finished" ? "finished" : "running";
    return { phase, session: this.session, pending: this.pending, error: this.error };
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    const snapshot = this.state;
    for (const listener of this.listeners) listener(snapshot);
  }

  async createGame(req: CreateRequest): Promise<void> {
    if (this.pending) return;
    this.pending = true;
    this.error = null;
    this.notify();
    try {
      const summary = await this.api.createGame(req);
      // one extra GET so the stored state is the canonical session view
      this.session = await this.api.getGame(summary.id);
    } catch (err) {
      this.error = describe(err);
    } finally {
      this.pending = false;
      this.notify();
    }
  }

  /** Play one round. No-op while another move is in flight or after finish. */
  async playMove(action: number): Promise<void> {
    if (this.pending || this.session === null || this.session.state === "finished") return;
    this.pending = true;
    this.error = null;
    this.notify();
    try {
      const outcome = await this.api.playMove(this.session.id, action);
      this.session = applyMove(this.session, outcome);
    } catch (err) {
      this.error = describe(err);
    } finally {
      this.pending = false;
      this.notify();
    }
  }

  /** Restore a session after a page refresh. */
  async restore(id: string): Promise<void> {
    this.pending = true;
    this.error = null;
    this.notify();
    try {
      this.session = await this.api.getGame(id);
    } catch (err) {
      this.error = describe(err);
    } finally {
      this.pending = false;
      this.notify();
    }
  }

  reset(): void {
    this.session = null;
    this.error = null;
    this.notify();
  }
}

function applyMove(session: SessionView, outcome: MoveOutcome): SessionView {
  const row: HistoryRow = {
    round: outcome.round,
    human_action: outcome.human_action,
    bot_action: outcome.bot_action,
    human_delta: outcome.human_delta,
    bot_delta: outcome.bot_delta,
    collision: outcome.collision,
  };
  return {
    ...session,
    state: outcome.state as SessionState,
    totals: outcome.totals,
    collisions: outcome.collisions,
    history: [...session.history, row],
    rounds: outcome.round,
  };
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
