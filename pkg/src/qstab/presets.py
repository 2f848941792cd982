"""Built-in example presets.

ex1: driven-damped mode with a displaced quadratic Hamiltonian and linear
coupling; the unique invariant state is the coherent state at the
displacement, and V = H certifies exponential stability at rate kappa.

ex2: two-photon pump with zero Hamiltonian and quadratic coupling; the
invariant set is every state on the two-dimensional cat subspace, and
V = L†L certifies exponential stability at rate 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .expr import eval_expr, format_complex_literal, parse_expr
from .hilbert import Operator
from .lindblad import SystemModel
from .modelio import model_from_document

__all__ = ["ExamplePreset", "PRESET_NAMES", "get_preset"]


@dataclass(frozen=True, eq=False)
class ExamplePreset:
    name: str
    document: dict
    lyapunov_expr: str
    initial_specs: tuple[str, ...]
    t_final: float
    dt: float
    seed: int

    def build_model(self) -> tuple[SystemModel, dict[str, complex]]:
        return model_from_document(self.document)

    def build_lyapunov(self) -> Operator:
        model, params = self.build_model()
        return eval_expr(parse_expr(self.lyapunov_expr, params), model.dim, params)


_EX1_ALPHA = 0.8 + 0.4j
_EX1_KAPPA = 1.0

_EX1 = ExamplePreset(
    name="ex1",
    document={
        "dim": 40,
        "label": "ex1",
        "params": {
            "alpha": format_complex_literal(_EX1_ALPHA),
            "kappa": _EX1_KAPPA,
            "sqrt_kappa": math.sqrt(_EX1_KAPPA),
        },
        "hamiltonian": "dag(a - alpha*id)*(a - alpha*id)",
        "couplings": ["sqrt_kappa*(a - alpha*id)"],
    },
    lyapunov_expr="dag(a - alpha*id)*(a - alpha*id)",
    initial_specs=(
        "coherent:-1+0i",
        "coherent:0+1.6i",
        "coherent:-1.2-1.2i",
        "coherent:1.8+0i",
    ),
    t_final=6.0,
    dt=1e-3,
    seed=20230811,
)

_EX2_ALPHA = 1.0

_EX2 = ExamplePreset(
    name="ex2",
    document={
        "dim": 30,
        "label": "ex2",
        "params": {
            "alpha": format_complex_literal(complex(_EX2_ALPHA)),
            "alpha2": format_complex_literal(complex(_EX2_ALPHA) ** 2),
        },
        "hamiltonian": "0",
        "couplings": ["a^2 - alpha2*id"],
    },
    lyapunov_expr="dag(a^2 - alpha2*id)*(a^2 - alpha2*id)",
    initial_specs=(
        "fock:0",
        "coherent:0.5+0i",
        "coherent:0+0.9i",
        "mixed:11:3",
    ),
    t_final=10.0,
    dt=1e-3,
    seed=20230811,
)

_PRESETS = {"ex1": _EX1, "ex2": _EX2}
PRESET_NAMES = tuple(sorted(_PRESETS))


def get_preset(name: str) -> ExamplePreset:
    try:
        return _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
