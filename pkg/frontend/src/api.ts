// Typed client for the play service. Payload shapes mirror the server's
// structured documents; no fields are computed client-side.

export type Role = "max" | "min";
export type SessionState = "running" | "finished";

export interface GameSpec {
  variant?: 1 | 2;
  scores?: number[];
  score_matrix?: number[][];
  cost_matrix?: number[][];
}

export interface Rule {
  kind: "fixed" | "geometric";
  w?: number;
  p?: number;
}

export interface CreateRequest {
  spec: GameSpec;
  role: Role;
  rule?: Rule;
  seed?: number;
  reveal_bot_strategy?: boolean;
}

export interface Totals {
  human: number;
  bot: number;
}

export interface SessionSummary {
  schema_version: number;
  id: string;
  action_count: number;
  human_role: Role;
  rule: Rule;
  state: SessionState;
  totals: Totals;
  collisions: number;
  variant?: 1 | 2;
  run_values?: number[];
  bot_strategy?: number[];
  seed?: number;
}

export interface HistoryRow {
  round: number;
  human_action: number;
  bot_action: number;
  human_delta: number;
  bot_delta: number;
  collision: boolean;
}

export interface SessionView extends SessionSummary {
  history: HistoryRow[];
  rounds: number;
}

export interface MoveOutcome {
  schema_version: number;
  id: string;
  round: number;
  human_action: number;
  bot_action: number;
  human_delta: number;
  bot_delta: number;
  collision: boolean;
  collisions: number;
  totals: Totals;
  state: SessionState;
}

/** Error body from the service, rethrown with its machine-readable code. */
export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(code: string, message: string, status: number) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

export type FetchLike = typeof fetch;

async function request<T>(
  fetchImpl: FetchLike,
  url: string,
  init?: RequestInit,
): Promise<T> {
  const response = await fetchImpl(url, init);
  const body = await response.json();
  if (!response.ok) {
    const err = (body as { error?: { code?: string; message?: string } }).error;
    throw new ApiError(
      err?.code ?? `HTTP${response.status}`,
      err?.message ?? JSON.stringify(body),
      response.status,
    );
  }
  return body as T;
}

export class PlayServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  createGame(req: CreateRequest): Promise<SessionSummary> {
    return request(this.fetchImpl, `${this.baseUrl}/games`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  playMove(id: string, action: number): Promise<MoveOutcome> {
    return request(this.fetchImpl, `${this.baseUrl}/games/${id}/moves`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ action }),
    });
  }

  getGame(id: string): Promise<SessionView> {
    return request(this.fetchImpl, `${this.baseUrl}/games/${id}`);
  }

  health(): Promise<{ status: string; sessions: number }> {
    return request(this.fetchImpl, `${this.baseUrl}/healthz`);
  }
}
