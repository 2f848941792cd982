"""Model-file documents and initial-state specs for the CLI.

A model file is JSON::

    {
      "dim": 30,
      "label": "two-photon pump",
      "params": {"alpha2": "1+0i", "kappa": 1.0},
      "hamiltonian": "0",
      "couplings": ["a^2 - alpha2*id"]
    }

Operator fields are expression strings (see :mod:`qstab.expr`); params map
names to complex values given either as numbers or RE+IMi strings. Scalar
square roots are precomputed into params since the grammar has no sqrt.

Initial-state specs: ``coherent:RE+IMi`` | ``fock:N`` | ``mixed:SEED:RANK``.
"""

from __future__ import annotations

import json

from .expr import eval_expr, parse_complex_literal, parse_expr
from .hilbert import (
    DensityOperator,
    coherent_state,
    fock_state,
    pure_density,
    random_density,
)
from .lindblad import SystemModel

__all__ = [
    "ConfigError",
    "model_from_document",
    "load_model_file",
    "parse_init_spec",
]


class ConfigError(ValueError):
    """Malformed model document, CLI arguments, or state spec."""


def _coerce_param(name: str, value) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"param {name!r} must be a number or RE+IMi string")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return parse_complex_literal(value)
        except ValueError as exc:
            raise ConfigError(f"param {name!r}: {exc}") from exc
    raise ConfigError(f"param {name!r} must be a number or RE+IMi string")


def model_from_document(doc: dict) -> tuple[SystemModel, dict[str, complex]]:
    """Build a SystemModel from a parsed model document."""
    if not isinstance(doc, dict):
        raise ConfigError("model document must be a JSON object")
    try:
        dim = doc["dim"]
        ham_text = doc["hamiltonian"]
        coupling_texts = doc["couplings"]
    except KeyError as exc:
        raise ConfigError(f"model document missing field {exc.args[0]!r}") from exc
    if not isinstance(dim, int) or dim < 2:
        raise ConfigError(f"dim must be an integer >= 2, got {dim!r}")
    if not isinstance(coupling_texts, list) or not all(
        isinstance(t, str) for t in coupling_texts
    ):
        raise ConfigError("couplings must be a list of expression strings")
    raw_params = doc.get("params", {})
    if not isinstance(raw_params, dict):
        raise ConfigError("params must be an object mapping names to complex values")
    params = {name: _coerce_param(name, value) for name, value in raw_params.items()}
    label = doc.get("label", "")

    ham = eval_expr(parse_expr(ham_text, params), dim, params)
    couplings = tuple(
        eval_expr(parse_expr(text, params), dim, params) for text in coupling_texts
    )
    return SystemModel(hamiltonian=ham, couplings=couplings, label=label), params


def load_model_file(path: str) -> tuple[SystemModel, dict[str, complex]]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"model file {path}: invalid JSON: {exc}") from exc
    return model_from_document(doc)


def parse_init_spec(spec: str, dim: int) -> DensityOperator:
    """Initial state from ``coherent:RE+IMi`` | ``fock:N`` | ``mixed:SEED:RANK``."""
    kind, _, rest = spec.partition(":")
    if kind == "coherent":
        try:
            alpha = parse_complex_literal(rest)
        except ValueError as exc:
            raise ConfigError(f"bad coherent amplitude {rest!r}: {exc}") from exc
        return pure_density(coherent_state(alpha, dim))
    if kind == "fock":
        try:
            level = int(rest)
        except ValueError as exc:
            raise ConfigError(f"bad fock level {rest!r}") from exc
        return pure_density(fock_state(level, dim))
    if kind == "mixed":
        seed_text, _, rank_text = rest.partition(":")
        try:
            seed, rank = int(seed_text), int(rank_text)
        except ValueError as exc:
            raise ConfigError(f"bad mixed spec {spec!r}; want mixed:SEED:RANK") from exc
        return random_density(dim, rank, seed)
    raise ConfigError(
        f"unknown init spec {spec!r}; want coherent:RE+IMi | fock:N | mixed:SEED:RANK"
    )
