"""Session-oriented HTTP API for playing collision-ending games against the
equilibrium bot.

The bot's mixed strategy is solved once at session creation and frozen; its
draw for a round happens only when the human's action arrives, from a seeded
per-session substream. Because the bot is stationary this is behaviorally
identical to simultaneous play, and a session with an explicit seed replays
to an identical transcript for the same human action sequence.

Sessions live in memory, expire after an idle TTL, and optionally append
their transcript to one JSON-lines file per session id.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Literal, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import _rng
from .errors import (
    ActionOutOfRange,
    InputError,
    RucError,
    SessionFinished,
    UnknownSession,
    UnsolvableSpec,
)
from .handcricket import (
    ScoreProfile,
    v1_equilibrium,
    v1_payoff_matrix,
    v2_equilibrium,
    v2_payoff_matrix,
)
from .matrices import PayoffMatrix, SimplexVector
from .reports import SCHEMA_VERSION, simplex_json
from .simulate import CollisionRule, RngSpec, TrialStream, _draw_threshold
from .solver import solve_reducible

# Cap on the geometric threshold scan; a session cannot humanly reach this
# many collisions, so larger draws are indistinguishable.
THRESHOLD_DRAW_CAP = 100_000


class CapacityExceeded(RucError):
    pass


_STATUS_BY_CODE = {
    "UnknownSession": 404,
    "SessionFinished": 409,
    "ActionOutOfRange": 400,
    "UnsolvableSpec": 400,
    "CapacityExceeded": 503,
}


@dataclass(frozen=True)
class ServiceSettings:
    max_sessions: int = 1024
    ttl_seconds: float = 3600.0
    transcript_dir: Optional[str] = None
    clock: Callable[[], float] = time.monotonic


class MatricesBody(BaseModel):
    score: list[list[float]]
    cost: list[list[float]]


class GameSpecBody(BaseModel):
    variant: Optional[Literal[1, 2]] = None
    scores: Optional[list[float]] = None
    matrices: Optional[MatricesBody] = None


class RuleBody(BaseModel):
    kind: Literal["fixed", "geometric"] = "fixed"
    w: int = 1
    p: Optional[float] = None


class CreateBody(BaseModel):
    spec: GameSpecBody
    role: Literal["max", "min"]
    rule: RuleBody = RuleBody()
    seed: Optional[int] = None
    reveal_bot_strategy: bool = True


class MoveBody(BaseModel):
    action: int


@dataclass
class Session:
    id: str
    variant: Optional[int]
    run_values: Optional[list[float]]
    score_matrix: PayoffMatrix
    cost_matrix: PayoffMatrix
    human_role: str
    bot_strategy: SimplexVector
    bot_cdf: list[float]
    rule: CollisionRule
    threshold: int
    seed: Optional[int]
    bot_stream: TrialStream
    reveal: bool
    state: str
    last_touch: float
    history: list[dict] = field(default_factory=list)
    human_total: float = 0.0
    bot_total: float = 0.0
    collisions: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def action_count(self) -> int:
        return self.score_matrix.n

    def rule_json(self) -> dict[str, Any]:
        if self.rule.kind == "fixed":
            return {"kind": "fixed", "w": self.rule.w}
        return {"kind": "geometric", "p": self.rule.p}

    def summary(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "id": self.id,
            "action_count": self.action_count,
            "human_role": self.human_role,
            "rule": self.rule_json(),
            "state": self.state,
            "totals": {"human": self.human_total, "bot": self.bot_total},
            "collisions": self.collisions,
        }
        if self.variant is not None:
            doc["variant"] = self.variant
            doc["run_values"] = self.run_values
        if self.reveal:
            doc["bot_strategy"] = simplex_json(self.bot_strategy)
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc

    def view(self) -> dict[str, Any]:
        doc = self.summary()
        doc["history"] = list(self.history)
        doc["rounds"] = len(self.history)
        return doc


def _build_equilibrium(spec: GameSpecBody):
    """Returns (variant, run_values, score matrix, cost matrix, equilibrium)."""
    try:
        if spec.variant is not None:
            if not spec.scores:
                raise UnsolvableSpec("variant games need a nonempty scores list")
            profile = ScoreProfile(spec.scores)
            if spec.variant == 1:
                result = v1_equilibrium(profile)
                matrix = v1_payoff_matrix(profile)
            else:
                result = v2_equilibrium(profile)
                matrix = v2_payoff_matrix(profile)
            return spec.variant, [float(s) for s in spec.scores], matrix, matrix, result
        if spec.matrices is not None:
            score = PayoffMatrix(np.array(spec.matrices.score, dtype=np.float64))
            cost = PayoffMatrix(np.array(spec.matrices.cost, dtype=np.float64))
            if score.n != cost.n:
                raise UnsolvableSpec(
                    f"score matrix is {score.n}x{score.n}, cost matrix is {cost.n}x{cost.n}"
                )
            result = solve_reducible(score, cost)
            return None, None, score, cost, result
        raise UnsolvableSpec("spec needs either a variant with scores or raw matrices")
    except UnsolvableSpec:
        raise
    except (RucError, ValueError) as exc:
        raise UnsolvableSpec(str(exc)) from None


def _parse_rule_body(rule: RuleBody) -> CollisionRule:
    try:
        if rule.kind == "fixed":
            return CollisionRule.fixed(rule.w)
        if rule.p is None:
            raise UnsolvableSpec("geometric rule needs parameter p")
        return CollisionRule.geometric(rule.p)
    except InputError as exc:
        raise UnsolvableSpec(str(exc)) from None


class SessionStore:
    def __init__(self, settings: ServiceSettings):
        self.settings = settings
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._transcript_dir: Optional[Path] = None
        if settings.transcript_dir is not None:
            self._transcript_dir = Path(settings.transcript_dir)
            self._transcript_dir.mkdir(parents=True, exist_ok=True)

    def _purge_locked(self, now: float) -> None:
        expired = [
            sid
            for sid, session in self._sessions.items()
            if now - session.last_touch > self.settings.ttl_seconds
        ]
        for sid in expired:
            del self._sessions[sid]

    def add(self, session: Session) -> None:
        with self._lock:
            self._purge_locked(self.settings.clock())
            if len(self._sessions) >= self.settings.max_sessions:
                raise CapacityExceeded(
                    f"session store is full ({self.settings.max_sessions} live sessions)"
                )
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        now = self.settings.clock()
        with self._lock:
            self._purge_locked(now)
            session = self._sessions.get(session_id)
            if session is None:
                raise UnknownSession(f"no session {session_id!r}")
            session.last_touch = now
            return session

    def count(self) -> int:
        with self._lock:
            self._purge_locked(self.settings.clock())
            return len(self._sessions)

    def record(self, session: Session, event: dict[str, Any]) -> None:
        if self._transcript_dir is None:
            return
        path = self._transcript_dir / f"{session.id}.jsonl"
        with path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, sort_keys=True) + "\n")


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings()
    store = SessionStore(settings)
    app = FastAPI(title="ruc play service")
    # browser clients are served from arbitrary origins; no credentials in play
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RucError)
    async def ruc_error_handler(_request: Request, exc: RucError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": store.count()}

    @app.post("/games", status_code=201)
    def create_game(body: CreateBody):
        variant, run_values, score, cost, equilibrium = _build_equilibrium(body.spec)
        rule = _parse_rule_body(body.rule)
        seed = body.seed
        master = seed if seed is not None else secrets.randbits(63)
        trial_rng = RngSpec(master).substream(0)
        threshold = _draw_threshold(rule, trial_rng, THRESHOLD_DRAW_CAP)
        bot_is_max = body.role == "min"
        bot_strategy = equilibrium.max_strategy if bot_is_max else equilibrium.min_strategy
        bot_stream = trial_rng.stream(_rng.PLAYER_MAX if bot_is_max else _rng.PLAYER_MIN)
        session = Session(
            id=secrets.token_hex(8),
            variant=variant,
            run_values=run_values,
            score_matrix=score,
            cost_matrix=cost,
            human_role=body.role,
            bot_strategy=bot_strategy,
            bot_cdf=np.cumsum(bot_strategy.weights).tolist(),
            rule=rule,
            threshold=threshold,
            seed=seed,
            bot_stream=bot_stream,
            reveal=body.reveal_bot_strategy,
            state="running" if threshold > 0 else "finished",
            last_touch=settings.clock(),
        )
        store.add(session)
        store.record(
            session,
            {
                "event": "create",
                "id": session.id,
                "variant": variant,
                "run_values": run_values,
                "human_role": body.role,
                "rule": session.rule_json(),
                "seed": seed,
                "bot_strategy": simplex_json(bot_strategy),
            },
        )
        return session.summary()

    @app.post("/games/{session_id}/moves")
    def submit_move(session_id: str, body: MoveBody):
        session = store.get(session_id)
        with session.lock:
            if session.state != "running":
                raise SessionFinished(f"session {session_id} is finished")
            n = session.action_count
            if not 0 <= body.action < n:
                raise ActionOutOfRange(
                    f"action {body.action} out of range, want 0..{n - 1}"
                )
            u = session.bot_stream.next_uniform()
            bot_action = 0
            while bot_action < n - 1 and u >= session.bot_cdf[bot_action]:
                bot_action += 1
            if session.human_role == "max":
                i, j = body.action, bot_action
                human_delta = float(session.score_matrix.entries[i, j])
                bot_delta = float(session.cost_matrix.entries[i, j])
            else:
                i, j = bot_action, body.action
                human_delta = float(session.cost_matrix.entries[i, j])
                bot_delta = float(session.score_matrix.entries[i, j])
            collision = body.action == bot_action
            session.human_total += human_delta
            session.bot_total += bot_delta
            if collision:
                session.collisions += 1
                if session.collisions >= session.threshold:
                    session.state = "finished"
            record = {
                "round": len(session.history) + 1,
                "human_action": body.action,
                "bot_action": bot_action,
                "human_delta": human_delta,
                "bot_delta": bot_delta,
                "collision": collision,
            }
            session.history.append(record)
            outcome = {
                "schema_version": SCHEMA_VERSION,
                "id": session.id,
                **record,
                "collisions": session.collisions,
                "totals": {"human": session.human_total, "bot": session.bot_total},
                "state": session.state,
            }
            store.record(session, {"event": "move", **record, "state": session.state})
            return outcome

    @app.get("/games/{session_id}")
    def get_game(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return session.view()

    return app
