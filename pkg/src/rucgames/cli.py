"""Command-line entry point.

Subcommands: solve, verify, simulate, handcricket, serve. Reports are either
human-readable text or a single structured JSON document (--format structured)
suitable for golden-file comparison; numbers print at full precision so
strategies round-trip through the verify command.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import _kernels, reports
from .analytics import (
    GameValue,
    best_response_bracket,
    expected_score,
    multi_collision_value,
    multi_collision_variance,
    score_variance,
)
from .errors import (
    DimensionMismatch,
    InputError,
    NotFullSupport,
    NumericalError,
    OutOfRange,
    ParseError,
    ZeroCollisionProbability,
)
from .handcricket import (
    ScoreProfile,
    v1_equilibrium,
    v1_error_bound,
    v1_rho,
    v2_equilibrium,
)
from .matrices import (
    DEFAULT_PERRON_TOL,
    PayoffMatrix,
    SimplexVector,
    parse_matrix_text,
    parse_vector_text,
)
from .simulate import CollisionRule, StrategyAgent, monte_carlo
from .solver import solve_reducible, certify_epsilon

# Sum gate for strategy files fed to `verify`; inputs further off are rejected
# with the measured sum rather than silently renormalized.
VERIFY_SUM_TOL = 1e-9

SCRIPTED_AGENTS = ("copy-last", "cycle", "anti-coordinate")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _load_matrix(path: str) -> PayoffMatrix:
    try:
        return parse_matrix_text(_read(path))
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}", exc.line, exc.column) from None


def _load_game(a_path: str, b_path: str) -> tuple[PayoffMatrix, PayoffMatrix]:
    score = _load_matrix(a_path)
    cost = _load_matrix(b_path)
    if score.n != cost.n:
        raise DimensionMismatch(
            f"score matrix is {score.n}x{score.n} but cost matrix is {cost.n}x{cost.n}"
        )
    return score, cost


def _load_strategy(path: str) -> SimplexVector:
    weights = parse_vector_text(_read(path))
    total = math.fsum(weights.tolist())
    if abs(total - 1.0) > VERIFY_SUM_TOL:
        raise ParseError(f"{path}: strategy must sum to 1, measured sum {total!r}")
    return SimplexVector(weights)


def _parse_rule(text: str) -> CollisionRule:
    kind, _, arg = text.partition(":")
    try:
        if kind == "fixed":
            return CollisionRule.fixed(int(arg) if arg else 1)
        if kind == "geometric":
            return CollisionRule.geometric(float(arg))
    except ValueError:
        raise OutOfRange(f"malformed rule argument {text!r}") from None
    raise OutOfRange(f"unknown rule {text!r}, want fixed:W or geometric:P")


def _copy_last(n: int):
    def callback(opponent_history, _stream):
        return opponent_history[-1] if opponent_history else 0

    return callback


def _cycle(n: int):
    def callback(opponent_history, _stream):
        return len(opponent_history) % n

    return callback


def _anti_coordinate(n: int):
    def callback(opponent_history, _stream):
        return (opponent_history[-1] + 1) % n if opponent_history else 0

    return callback


_SCRIPTED_BUILDERS = {
    "copy-last": _copy_last,
    "cycle": _cycle,
    "anti-coordinate": _anti_coordinate,
}


class _AgentSpecParser:
    """Turns --max-agent / --min-agent values into StrategyAgent instances.

    Forms: uniform | pure:K (zero-based action) | file:PATH | equilibrium
    (the solved strategy for that side) | copy-last | cycle | anti-coordinate.
    """

    def __init__(self, score: PayoffMatrix, cost: PayoffMatrix, tol: float):
        self.score = score
        self.cost = cost
        self.tol = tol
        self._equilibrium = None

    def equilibrium(self):
        if self._equilibrium is None:
            self._equilibrium = solve_reducible(self.score, self.cost, tol=self.tol)
        return self._equilibrium

    def parse(self, text: str, side: str) -> StrategyAgent:
        n = self.score.n
        if text == "uniform":
            return StrategyAgent.stationary(SimplexVector.uniform(n), label="uniform")
        if text == "equilibrium":
            eq = self.equilibrium()
            dist = eq.max_strategy if side == "max" else eq.min_strategy
            return StrategyAgent.stationary(dist, label=f"equilibrium-{side}")
        if text.startswith("pure:"):
            try:
                action = int(text[5:])
            except ValueError:
                raise OutOfRange(f"malformed agent spec {text!r}") from None
            if not 0 <= action < n:
                raise OutOfRange(f"pure action {action} out of range for n={n}")
            return StrategyAgent.stationary(SimplexVector.pure(action, n), label=text)
        if text.startswith("file:"):
            return StrategyAgent.stationary(_load_strategy(text[5:]), label=text)
        if text in _SCRIPTED_BUILDERS:
            return StrategyAgent.scripted(_SCRIPTED_BUILDERS[text](n), label=text)
        raise OutOfRange(
            f"unknown agent spec {text!r}; want uniform, equilibrium, pure:K, "
            f"file:PATH, or one of {', '.join(SCRIPTED_AGENTS)}"
        )


def _fmt_value(value: GameValue) -> str:
    if value.kind == "infinite":
        return "infinite"
    if value.kind == "zero-degenerate":
        return "0 (zero-degenerate)"
    return repr(value.value)


def _fmt_weights(strategy: SimplexVector) -> str:
    return "[" + ", ".join(repr(float(w)) for w in strategy.weights) + "]"


def _emit(args, doc: dict, human_lines: list[str]) -> int:
    if args.format == "structured":
        text = reports.dumps(doc)
    else:
        text = "\n".join(human_lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    score, cost = _load_game(args.score_matrix, args.cost_matrix)
    result = solve_reducible(score, cost, tol=args.tol)
    doc = reports.document(
        "solve", {"tolerance": args.tol, "equilibrium": reports.equilibrium_json(result)}
    )
    cert = result.certificate
    human = [
        f"branch: {result.branch}",
        f"max value: {_fmt_value(result.max_value)}",
        f"min value: {_fmt_value(result.min_value)}",
        f"max strategy: {_fmt_weights(result.max_strategy)}",
        f"min strategy: {_fmt_weights(result.min_strategy)}",
        f"uniqueness: {result.uniqueness}",
        f"certificate: {cert.kind} ({cert.description})",
    ]
    if cert.eps is not None:
        human.append(f"eps: {cert.eps!r}")
    if cert.max_bracket is not None:
        human.append(f"max-player bracket: [{cert.max_bracket[0]!r}, {cert.max_bracket[1]!r}]")
        human.append(f"min-player bracket: [{cert.min_bracket[0]!r}, {cert.min_bracket[1]!r}]")
    return _emit(args, doc, human)


def cmd_verify(args) -> int:
    score, cost = _load_game(args.score_matrix, args.cost_matrix)
    max_strategy = _load_strategy(args.max_strategy)
    min_strategy = _load_strategy(args.min_strategy)
    if max_strategy.n != score.n or min_strategy.n != score.n:
        raise DimensionMismatch(
            f"strategies have {max_strategy.n} and {min_strategy.n} entries, game has {score.n}"
        )
    body: dict = {}
    human: list[str] = []
    try:
        cert = certify_epsilon(score, cost, max_strategy, min_strategy)
        max_response = best_response_bracket(score, min_strategy, role="max")
        min_response = best_response_bracket(cost, max_strategy, role="min")
        body["certified"] = True
        body["certificate"] = reports.certificate_json(cert)
        body["best_deviation_max"] = {
            "action": max_response.best_pure_action,
            "payoff": max_response.beta,
        }
        body["best_deviation_min"] = {
            "action": min_response.best_pure_action,
            "payoff": min_response.alpha,
        }
        human = [
            f"eps: {cert.eps!r}",
            f"max-player bracket: [{cert.max_bracket[0]!r}, {cert.max_bracket[1]!r}]",
            f"min-player bracket: [{cert.min_bracket[0]!r}, {cert.min_bracket[1]!r}]",
            f"best max deviation: pure action {max_response.best_pure_action} "
            f"earning {max_response.beta!r}",
            f"best min deviation: pure action {min_response.best_pure_action} "
            f"paying {min_response.alpha!r}",
        ]
    except NotFullSupport as exc:
        body["certified"] = False
        body["reason"] = {"code": exc.code, "message": str(exc)}
        human = [f"certification unavailable: {exc}"]
    doc = reports.document("verify", body)
    return _emit(args, doc, human)


def _analytic_side(
    matrix: PayoffMatrix,
    x: SimplexVector,
    y: SimplexVector,
    rule: CollisionRule,
    empirical_mean: float,
    std_error: float,
) -> tuple[dict, str]:
    single = expected_score(matrix, x, y)
    if rule.kind == "fixed":
        value = multi_collision_value(matrix, x, y, rule.w)
    elif single.is_finite:
        value = GameValue.finite(single.value / rule.p)
    else:
        value = single
    body: dict = {"mean": reports.game_value_json(value)}
    if rule.kind == "fixed" and single.is_finite:
        try:
            body["variance"] = multi_collision_variance(matrix, x, y, rule.w)
        except ZeroCollisionProbability:
            pass
    if value.is_finite and std_error > 0.0:
        z = (empirical_mean - value.value) / std_error
        body["z_score"] = z
        text = f"analytic mean {value.value!r}, z = {z:+.3f}"
    else:
        text = f"analytic mean {_fmt_value(value)}"
    return body, text


def cmd_simulate(args) -> int:
    score, cost = _load_game(args.score_matrix, args.cost_matrix)
    rule = _parse_rule(args.rule)
    if args.trials < 1:
        raise OutOfRange(f"trials must be at least 1, got {args.trials}")
    specs = _AgentSpecParser(score, cost, args.tol)
    max_agent = specs.parse(args.max_agent, "max")
    min_agent = specs.parse(args.min_agent, "min")
    stats_max, stats_min, truncation_rate = monte_carlo(
        score, cost, max_agent, min_agent, rule, args.trials, args.seed
    )
    body = {
        "seed": args.seed,
        "trials": args.trials,
        "rule": {"kind": rule.kind, "w": rule.w} if rule.kind == "fixed" else {
            "kind": rule.kind,
            "p": rule.p,
        },
        "agents": {"max": max_agent.label, "min": min_agent.label},
        "backend": _kernels.active_backend()
        if max_agent.is_stationary and min_agent.is_stationary
        else "python",
        "empirical": {"max": reports.stats_json(stats_max), "min": reports.stats_json(stats_min)},
        "truncation_rate": truncation_rate,
    }
    human = [
        f"trials: {args.trials}  seed: {args.seed}  rule: {args.rule}",
        f"agents: max={max_agent.label} min={min_agent.label}",
        f"max player: mean {stats_max.mean!r} (se {stats_max.std_error:.3g}), "
        f"variance {stats_max.variance!r}",
        f"min player: mean {stats_min.mean!r} (se {stats_min.std_error:.3g}), "
        f"variance {stats_min.variance!r}",
        f"collision probability: {stats_max.collision_probability!r}  "
        f"mean rounds: {stats_max.expected_rounds!r}",
        f"truncation rate: {truncation_rate!r}",
    ]
    if max_agent.is_stationary and min_agent.is_stationary:
        x, y = max_agent.dist, min_agent.dist
        analytic: dict = {}
        max_body, max_text = _analytic_side(
            score, x, y, rule, stats_max.mean, stats_max.std_error
        )
        min_body, min_text = _analytic_side(
            cost, x, y, rule, stats_min.mean, stats_min.std_error
        )
        analytic["max"] = max_body
        analytic["min"] = min_body
        body["analytic"] = analytic
        human.append(f"max player {max_text}")
        human.append(f"min player {min_text}")
    doc = reports.document("simulate", body)
    return _emit(args, doc, human)


def cmd_handcricket(args) -> int:
    profile = ScoreProfile(args.scores)
    if args.variant == 1:
        lo, hi = v1_rho(profile, tol=args.tol)
        result = v1_equilibrium(profile, tol=args.tol)
        eps = result.certificate.eps or 0.0
        body = {
            "variant": 1,
            "scores": [float(s) for s in args.scores],
            "value_bracket": [lo, hi],
            "equilibrium": reports.equilibrium_json(result),
        }
        human = [
            f"variant 1, scores {list(args.scores)}",
            f"value bracket: [{lo!r}, {hi!r}]",
            f"batter strategy: {_fmt_weights(result.max_strategy)}",
            f"bowler strategy: {_fmt_weights(result.min_strategy)}",
            f"certified eps: {eps!r}",
        ]
        if eps < 1.0 / 3.0:
            min_factor, max_factor, weight_err = v1_error_bound(eps)
            body["error_bounds"] = {
                "eps": eps,
                "batter_value_factor": min_factor,
                "bowler_value_factor": max_factor,
                "strategy_relative_error": weight_err,
            }
            human += [
                "guarantees at this eps:",
                f"  batter keeps at least {min_factor!r} of the value",
                f"  bowler concedes at most {max_factor!r} of the value",
                f"  strategy weights within relative {weight_err!r}",
            ]
    else:
        result = v2_equilibrium(profile)
        body = {
            "variant": 2,
            "scores": [float(s) for s in args.scores],
            "value": result.max_value.value,
            "equilibrium": reports.equilibrium_json(result),
        }
        human = [
            f"variant 2, scores {list(args.scores)}",
            f"value: {result.max_value.value!r} (exact)",
            f"batter strategy: {_fmt_weights(result.max_strategy)}",
            f"bowler strategy: {_fmt_weights(result.min_strategy)}",
        ]
    doc = reports.document("handcricket", body)
    return _emit(args, doc, human)


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceSettings, create_app

    app = create_app(
        ServiceSettings(
            max_sessions=args.max_sessions,
            ttl_seconds=args.ttl_seconds,
            transcript_dir=args.transcript_dir,
        )
    )
    uvicorn.run(app, host=args.bind, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruc",
        description="Solve, verify, and simulate repeated games that end on action collisions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output_flags(p):
        p.add_argument("--format", choices=("human", "structured"), default="human")
        p.add_argument("--out", default=None, help="write the report to PATH instead of stdout")

    p_solve = sub.add_parser("solve", help="compute an equilibrium for a matrix pair")
    p_solve.add_argument("score_matrix")
    p_solve.add_argument("cost_matrix")
    p_solve.add_argument("--tol", type=float, default=DEFAULT_PERRON_TOL)
    add_output_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="certify a strategy pair read from files")
    p_verify.add_argument("score_matrix")
    p_verify.add_argument("cost_matrix")
    p_verify.add_argument("max_strategy")
    p_verify.add_argument("min_strategy")
    add_output_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo play of a matrix pair")
    p_sim.add_argument("score_matrix")
    p_sim.add_argument("cost_matrix")
    p_sim.add_argument(
        "--max-agent",
        default="uniform",
        help="uniform | equilibrium | pure:K | file:PATH | "
        + " | ".join(SCRIPTED_AGENTS),
    )
    p_sim.add_argument("--min-agent", default="uniform", help="same forms as --max-agent")
    p_sim.add_argument("--rule", default="fixed:1", help="fixed:W or geometric:P")
    p_sim.add_argument("--trials", type=int, default=10_000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--tol", type=float, default=DEFAULT_PERRON_TOL)
    add_output_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_hc = sub.add_parser("handcricket", help="closed-form hand-cricket equilibria")
    p_hc.add_argument("--variant", type=int, choices=(1, 2), required=True)
    p_hc.add_argument("scores", type=float, nargs="+")
    p_hc.add_argument("--tol", type=float, default=DEFAULT_PERRON_TOL)
    add_output_flags(p_hc)
    p_hc.set_defaults(func=cmd_handcricket)

    p_serve = sub.add_parser("serve", help="run the interactive play service")
    p_serve.add_argument("--bind", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--max-sessions", type=int, default=1024)
    p_serve.add_argument("--ttl-seconds", type=float, default=3600.0)
    p_serve.add_argument("--transcript-dir", default=None)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
