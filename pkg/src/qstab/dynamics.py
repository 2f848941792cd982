"""Time evolution of density operators and observables.

The workhorse is fixed-step classical RK4 on the matrix ODE drho/dt =
Lstar(rho). The matrix-exponential propagator (vec form, dim^2 x dim^2) is
the independent oracle; it scales badly and is never the default.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .config import DEFAULT_TOLS, Tolerances
from .hilbert import DensityOperator, Operator, _entries
from .lindblad import SystemModel, _rhs_closure, liouvillian_matrix, unvec, vec

__all__ = [
    "CapacityError",
    "NumericalContractError",
    "IntegratorConfig",
    "Trajectory",
    "spectral_radius_estimate",
    "evolve_density",
    "evolve_exponential",
    "evolve_observable",
]

DEFAULT_EXP_CAP = 4096  # dim^2 cap for the dense-exponential oracle


class CapacityError(ValueError):
    """dim^2 exceeds the configured dense-exponential cap."""


class NumericalContractError(RuntimeError):
    """A numerical invariant (trace drift, stability) was violated hard."""


@dataclass(frozen=True)
class IntegratorConfig:
    t_final: float
    dt: float = 1e-3
    method: str = "rk4"  # "rk4" | "exponential"
    renormalize: bool = True
    max_stored_states: int = 500
    trace_drift_warn: float = 1e-8
    trace_drift_fail: float = 1e-5
    stability_budget: float = 0.1  # warn when dt * spectral-radius estimate exceeds this

    def __post_init__(self):
        if not (self.dt > 0 and self.t_final > 0 and self.dt < self.t_final):
            raise ValueError(f"need 0 < dt < t_final, got dt={self.dt}, t_final={self.t_final}")
        if self.method not in ("rk4", "exponential"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded evolution: per-step observables, thinned full states."""

    times: np.ndarray
    observables: dict[str, np.ndarray]
    traces: np.ndarray  # pre-renormalization trace at each step
    min_eigs: np.ndarray
    states: tuple[DensityOperator, ...]
    state_times: np.ndarray
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or (t.size > 1 and not np.all(np.diff(t) > 0)):
            raise ValueError("times must be a strictly increasing 1-d array")
        object.__setattr__(self, "times", t)

    def final_state(self) -> DensityOperator:
        return self.states[-1]


def spectral_radius_estimate(model: SystemModel, iters: int = 30, seed: int = 11) -> float:
    """Power-iteration estimate of the Liouvillian spectral radius.

    Heuristic only, used for the step-size warning; deterministic per seed.
    """
    rhs = _rhs_closure(model)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((model.dim, model.dim)) + 1j * rng.standard_normal(
        (model.dim, model.dim)
    )
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = rhs(x)
        nrm = float(np.linalg.norm(y))
        if nrm == 0.0:
            return 0.0
        est = nrm
        x = y / nrm
    return est


def _thin_stride(n_records: int, max_stored: int) -> int:
    return max(1, math.ceil(n_records / max(1, max_stored)))


def evolve_density(
    model: SystemModel,
    rho0: DensityOperator,
    cfg: IntegratorConfig,
    observables: list[tuple[str, Operator]] | tuple = (),
    tols: Tolerances | None = None,
) -> Trajectory:
    """Integrate drho/dt = Lstar(rho) over [0, t_final].

    Observable expectations, the pre-renormalization trace, and the minimum
    eigenvalue are recorded at every step. Full states are stored thinned to
    at most ``max_stored_states`` (always including the first and last step),
    with psd_tol relaxed to 1e-6.

    Raises NumericalContractError when the pre-renormalization trace drift
    exceeds ``trace_drift_fail``; drift beyond ``trace_drift_warn`` and a
    step size beyond the stability budget are recorded as warnings.
    """
    tols = tols or DEFAULT_TOLS
    if rho0.dim != model.dim:
        raise ValueError(f"initial state dim {rho0.dim} does not match model dim {model.dim}")
    obs = [(label, _entries(op)) for label, op in observables]
    for label, m in obs:
        if m.shape != (model.dim, model.dim):
            raise ValueError(f"observable {label!r} has wrong dimension")

    n_steps = max(1, int(round(cfg.t_final / cfg.dt)))
    dt = cfg.t_final / n_steps
    times = dt * np.arange(n_steps + 1)

    warn_msgs: list[str] = []
    radius = spectral_radius_estimate(model)
    if dt * radius > cfg.stability_budget:
        msg = (
            f"dt * spectral radius estimate = {dt * radius:.3g} exceeds "
            f"stability budget {cfg.stability_budget}; reduce dt if drift appears"
        )
        warn_msgs.append(msg)
        _warnings.warn(msg, RuntimeWarning, stacklevel=2)

    rhs = _rhs_closure(model)
    if cfg.method == "exponential":
        if model.dim**2 > DEFAULT_EXP_CAP:
            raise CapacityError(
                f"dim^2 = {model.dim**2} exceeds exponential cap {DEFAULT_EXP_CAP}"
            )
        step_matrix = expm(dt * liouvillian_matrix(model).matrix)
    else:
        step_matrix = None

    stride = _thin_stride(n_steps + 1, cfg.max_stored_states)
    state_tols = tols.with_(
        psd_tol=1e-6,
        trace_tol=tols.trace_tol if cfg.renormalize else max(tols.trace_tol, 2 * cfg.trace_drift_fail),
    )

    rho = rho0.entries.copy()
    series = {label: np.empty(n_steps + 1, dtype=complex) for label, _ in obs}
    traces = np.empty(n_steps + 1)
    min_eigs = np.empty(n_steps + 1)
    states: list[DensityOperator] = []
    state_idx: list[int] = []

    def record(i: int, mat: np.ndarray, raw_trace: float):
        traces[i] = raw_trace
        drift = abs(raw_trace - 1.0)
        if drift > cfg.trace_drift_fail:
            raise NumericalContractError(
                f"trace drift {drift:.3e} at t={times[i]:.6g} exceeds {cfg.trace_drift_fail:.1e}"
            )
        if drift > cfg.trace_drift_warn:
            msg = f"trace drift {drift:.3e} at t={times[i]:.6g} exceeds warn level"
            if msg not in warn_msgs:
                warn_msgs.append(msg)
        for label, m in obs:
            series[label][i] = np.einsum("ij,ji->", m, mat)
        min_eigs[i] = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0].real
        if i % stride == 0 or i == n_steps:
            states.append(DensityOperator(Operator(0.5 * (mat + mat.conj().T)), tols=state_tols))
            state_idx.append(i)

    record(0, rho, float(np.trace(rho).real))
    for i in range(1, n_steps + 1):
        if step_matrix is not None:
            rho = unvec(step_matrix @ vec(rho), model.dim)
        else:
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * dt * k1)
            k3 = rhs(rho + 0.5 * dt * k2)
            k4 = rhs(rho + dt * k3)
            rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        raw_trace = float(np.trace(rho).real)
        if cfg.renormalize and raw_trace != 0.0:
            rho = rho / raw_trace
        record(i, rho, raw_trace)

    return Trajectory(
        times=times,
        observables=series,
        traces=traces,
        min_eigs=min_eigs,
        states=tuple(states),
        state_times=times[np.array(state_idx, dtype=int)],
        warnings=tuple(warn_msgs),
    )


def evolve_exponential(
    model: SystemModel,
    rho0: DensityOperator,
    t: float,
    cap: int = DEFAULT_EXP_CAP,
    tols: Tolerances | None = None,
) -> DensityOperator:
    """Oracle propagator: unvec(expm(t M) vec(rho0)).

    Exact up to the dense expm; psd_tol for the result is tightened to 1e-8.
    """
    tols = (tols or DEFAULT_TOLS).with_(psd_tol=1e-8)
    if model.dim**2 > cap:
        raise CapacityError(f"dim^2 = {model.dim**2} exceeds exponential cap {cap}")
    if rho0.dim != model.dim:
        raise ValueError(f"state dim {rho0.dim} does not match model dim {model.dim}")
    if t == 0.0:
        return rho0
    M = liouvillian_matrix(model).matrix
    out = unvec(expm(t * M) @ vec(rho0), model.dim)
    return DensityOperator(Operator(0.5 * (out + out.conj().T)), tols=tols)


def evolve_observable(
    model: SystemModel, x: Operator, t: float, cap: int = DEFAULT_EXP_CAP
) -> Operator:
    """Heisenberg-picture semigroup T_t(X) via the adjoint exponential."""
    if model.dim**2 > cap:
        raise CapacityError(f"dim^2 = {model.dim**2} exceeds exponential cap {cap}")
    if x.dim != model.dim:
        raise ValueError(f"observable dim {x.dim} does not match model dim {model.dim}")
    if t == 0.0:
        return x
    M = liouvillian_matrix(model, picture="heisenberg").matrix
    return Operator(unvec(expm(t * M) @ vec(x), model.dim))
