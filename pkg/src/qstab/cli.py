"""Command-line surface: simulate / steady / certify / distance / example.

Exit codes: 0 success, 1 parse or config error, 2 numerical-contract
violation. Errors go to stderr as one line of JSON {"code": .., "message": ..}.
The environment variable QSTAB_SEED overrides preset seeds.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from ._threads import single_threaded_blas
from .certify import (
    CertifyConfig,
    FloorConditionError,
    LyapunovCandidate,
    SamplerConfig,
    classify,
    default_candidates,
)
from .dynamics import (
    CapacityError,
    IntegratorConfig,
    NumericalContractError,
    Trajectory,
    evolve_density,
)
from .expr import ExprSyntaxError, UnknownIdentifierError, eval_expr, parse_expr
from .hilbert import (
    DegenerateInputError,
    DimensionError,
    NormalizationError,
    Operator,
    TruncationError,
    annihilation_op,
)
from .modelio import ConfigError, load_model_file, parse_init_spec
from .presets import PRESET_NAMES, get_preset
from .steady import (
    DistanceConfig,
    KernelError,
    UnsupportedStructureError,
    distance_to_set,
    invariant_set,
)
from .svgplot import line_plot

__all__ = ["main"]

_CONFIG_ERRORS = (
    ConfigError,
    ExprSyntaxError,
    UnknownIdentifierError,
    DimensionError,
    TruncationError,
    DegenerateInputError,
    NormalizationError,
    UnsupportedStructureError,
    FloorConditionError,
    CapacityError,
    KernelError,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
    ValueError,
)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures through the JSON contract
        raise ConfigError(message)


def _emit_error(code: int, message: str) -> None:
    sys.stderr.write(json.dumps({"code": code, "message": str(message)}) + "\n")
    sys.stderr.flush()


def _env_seed(default: int) -> int:
    raw = os.environ.get("QSTAB_SEED")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"QSTAB_SEED must be an integer, got {raw!r}") from exc


# ---------------------------------------------------------------------------
# artifact writers


def write_trajectory_csv(path: str, traj: Trajectory, labels: list[str]) -> None:
    """Schema: t, re(<label>), im(<label>), ..., trace, min_eig; one row per step."""
    header = ["t"]
    for label in labels:
        header += [f"re({label})", f"im({label})"]
    header += ["trace", "min_eig"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, t in enumerate(traj.times):
            row = [repr(float(t))]
            for label in labels:
                z = traj.observables[label][i]
                row += [repr(float(z.real)), repr(float(z.imag))]
            row += [repr(float(traj.traces[i])), repr(float(traj.min_eigs[i]))]
            writer.writerow(row)


def _matrix_pairs(m: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in m.reshape(-1)]  # row-major


def write_states_json(path: str, traj: Trajectory) -> None:
    doc = {
        "times": [float(t) for t in traj.state_times],
        "dim": traj.states[0].dim if traj.states else 0,
        "states": [_matrix_pairs(s.entries) for s in traj.states],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def write_steady_json(path: str, inv_set, dim: int) -> None:
    doc = {
        "dim": dim,
        "kernel_dimension": inv_set.fixed_points.dimension,
        "dark_dimension": inv_set.k,
        "svd_threshold": inv_set.fixed_points.svd_threshold,
        "basis": [_matrix_pairs(b.entries) for b in inv_set.fixed_points.basis],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_report_json(path: str, report) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_safe(report.to_dict()), fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def _observables(model, params, texts: list[str]) -> list[tuple[str, Operator]]:
    out = []
    for text in texts:
        op = eval_expr(parse_expr(text, params), model.dim, params)
        out.append((text, op))
    return out


def cmd_simulate(args) -> int:
    model, params = load_model_file(args.model)
    rho0 = parse_init_spec(args.init, model.dim)
    observables = _observables(model, params, args.observe or [])
    cfg = IntegratorConfig(t_final=args.t_final, dt=args.dt)
    traj = evolve_density(model, rho0, cfg, observables)
    write_trajectory_csv(args.out, traj, [label for label, _ in observables])
    if args.states:
        write_states_json(args.out + ".states.json", traj)
    return 0


def cmd_steady(args) -> int:
    model, _ = load_model_file(args.model)
    inv = invariant_set(model)
    write_steady_json(args.out, inv, model.dim)
    return 0


def _certify_config(seed: int) -> CertifyConfig:
    return CertifyConfig(
        sampler=SamplerConfig(seed=seed),
        distance=DistanceConfig(n_starts=3, seed=seed + 1),
    )


_LEVELS = {"inconclusive": 0, "lyapunov": 1, "asymptotic": 2, "exponential": 3}


def cmd_certify(args) -> int:
    model, params = load_model_file(args.model)
    inv = invariant_set(model)
    cfg = _certify_config(_env_seed(20230811))
    if args.lyapunov == "auto":
        reports = [classify(model, cand, inv, cfg) for cand in default_candidates(model)]
        report = max(reports, key=lambda r: _LEVELS[r.classification])
    else:
        v = eval_expr(parse_expr(args.lyapunov, params), model.dim, params)
        report = classify(model, LyapunovCandidate(v, provenance="user-supplied"), inv, cfg)
    write_report_json(args.out, report)
    return 0


def cmd_distance(args) -> int:
    model, _ = load_model_file(args.model)
    inv = invariant_set(model)
    rho = parse_init_spec(args.state, model.dim)
    d = distance_to_set(rho, inv)
    sys.stdout.write(repr(float(d)) + "\n")
    return 0


def cmd_example(args) -> int:
    preset = get_preset(args.name)
    seed = _env_seed(preset.seed)
    outdir = args.outdir
    os.makedirs(outdir, exist_ok=True)

    model, params = preset.build_model()
    v_op = preset.build_lyapunov()
    a_op = annihilation_op(model.dim)
    observables = [("a", a_op), ("V", v_op)]
    cfg = IntegratorConfig(t_final=preset.t_final, dt=preset.dt)

    phase_series = []
    decay_series = []
    for i, spec in enumerate(preset.initial_specs):
        rho0 = parse_init_spec(spec, model.dim)
        traj = evolve_density(model, rho0, cfg, observables)
        write_trajectory_csv(os.path.join(outdir, f"traj_{i + 1}.csv"), traj, ["a", "V"])
        a_t = traj.observables["a"]
        phase_series.append((spec, a_t.real, a_t.imag))
        decay_series.append((spec, traj.times, np.maximum(traj.observables["V"].real, 0.0)))

    line_plot(
        os.path.join(outdir, "phase_space.svg"),
        phase_series,
        title=f"{preset.name}: phase space",
        xlabel="Re<a>",
        ylabel="Im<a>",
    )
    line_plot(
        os.path.join(outdir, "lyapunov_decay.svg"),
        decay_series,
        title=f"{preset.name}: Lyapunov expectation decay",
        xlabel="t",
        ylabel="tr(V rho_t)",
        ylog=True,
    )

    inv = invariant_set(model)
    write_steady_json(os.path.join(outdir, "steady.json"), inv, model.dim)
    report = classify(
        model,
        LyapunovCandidate(v_op, provenance="preset"),
        inv,
        _certify_config(seed),
    )
    write_report_json(os.path.join(outdir, "report.json"), report)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="qstab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a trajectory and write CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--t-final", type=float, required=True, dest="t_final")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--init", required=True, help="coherent:RE+IMi | fock:N | mixed:SEED:RANK")
    p.add_argument("--observe", action="append", default=[], help="observable expression")
    p.add_argument("--out", required=True)
    p.add_argument("--states", action="store_true", help="also dump thinned states JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("steady", help="compute the invariant set")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("certify", help="classify stability for a Lyapunov candidate")
    p.add_argument("--model", required=True)
    p.add_argument("--lyapunov", required=True, help="expression or 'auto'")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("distance", help="trace-norm distance from a state to C*")
    p.add_argument("--model", required=True)
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("example", help="run a built-in preset end to end")
    p.add_argument("--name", required=True, choices=PRESET_NAMES)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_example)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        with single_threaded_blas():
            return args.func(args)
    except NumericalContractError as exc:
        _emit_error(2, str(exc))
        return 2
    except _CONFIG_ERRORS as exc:
        _emit_error(1, str(exc))
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
