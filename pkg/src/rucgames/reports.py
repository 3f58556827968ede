"""Structured report documents shared by the CLI and the HTTP service.

One JSON document per invocation, schema-versioned, no timestamps or other
run-dependent noise: identical inputs must serialize byte for byte. Infinite
values appear as the string token "infinite", never a float sentinel.
"""

from __future__ import annotations

import json
from typing import Any

from .analytics import GameValue, ScoreStats
from .matrices import PerronPair, SimplexVector
from .solver import Certificate, EquilibriumResult

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "game_value_json",
    "simplex_json",
    "certificate_json",
    "equilibrium_json",
    "stats_json",
    "perron_json",
    "document",
    "dumps",
]


def game_value_json(value: GameValue) -> dict[str, Any]:
    payload: float | str
    if value.kind == "infinite":
        payload = "infinite"
    elif value.kind == "zero-degenerate":
        payload = 0.0
    else:
        payload = value.value
    return {"kind": value.kind, "value": payload}


def simplex_json(strategy: SimplexVector) -> list[float]:
    return [float(w) for w in strategy.weights]


def certificate_json(certificate: Certificate) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "kind": certificate.kind,
        "description": certificate.description,
    }
    if certificate.eps is not None:
        doc["eps"] = certificate.eps
    if certificate.max_bracket is not None:
        doc["max_bracket"] = list(certificate.max_bracket)
    if certificate.min_bracket is not None:
        doc["min_bracket"] = list(certificate.min_bracket)
    return doc


def equilibrium_json(result: EquilibriumResult) -> dict[str, Any]:
    return {
        "branch": result.branch,
        "max_strategy": simplex_json(result.max_strategy),
        "min_strategy": simplex_json(result.min_strategy),
        "max_value": game_value_json(result.max_value),
        "min_value": game_value_json(result.min_value),
        "certificate": certificate_json(result.certificate),
        "uniqueness": result.uniqueness,
    }


def stats_json(stats: ScoreStats) -> dict[str, Any]:
    return {
        "mean": stats.mean,
        "variance": stats.variance,
        "std_error": stats.std_error,
        "collision_probability": stats.collision_probability,
        "expected_rounds": stats.expected_rounds,
        "trials": stats.trials,
    }


def perron_json(pair: PerronPair) -> dict[str, Any]:
    return {
        "rho_lower": pair.rho_lower,
        "rho_upper": pair.rho_upper,
        "rho": pair.rho,
        "vector": simplex_json(pair.vector),
        "side": pair.side,
        "iterations": pair.iterations,
    }


def document(command: str, body: dict[str, Any]) -> dict[str, Any]:
    doc = {"schema_version": SCHEMA_VERSION, "command": command}
    doc.update(body)
    return doc


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
