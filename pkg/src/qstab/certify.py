"""Stability certificates for the invariant set via a candidate Lyapunov
operator V.

The checks are global matrix certificates: the floor condition separates
C* energetically, and negativity of the observable generator G(V) (plus
variants) certifies Lyapunov / asymptotic / exponential stability. Matrix
eigen-certificates are evaluated after compressing G(V) to the truncation
interior, the first dim - 2*bandwidth levels, because products of truncated
ladder polynomials are corrupted on the top levels. A randomized sampler
independently hunts for falsifying states; any hit downgrades the verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._threads import single_threaded_blas
from .config import DEFAULT_TOLS
from .hilbert import (
    DensityOperator,
    Operator,
    NormalizationError,
    _entries,
    expectation,
    random_density,
    upper_bandwidth,
)
from .lindblad import SystemModel, heisenberg_generator, liouvillian_matrix
from .steady import DistanceConfig, InvariantSet, UnsupportedStructureError, distance_to_set

__all__ = [
    "FloorConditionError",
    "LyapunovCandidate",
    "SamplerConfig",
    "CertifyConfig",
    "Falsifier",
    "FloorResult",
    "LyapunovResult",
    "AsymptoticResult",
    "ExponentialCertificate",
    "KappaEstimate",
    "StabilityReport",
    "truncation_interior",
    "floor_check",
    "lyapunov_check",
    "asymptotic_check",
    "exponential_check",
    "lemma1_ratio",
    "estimate_kappa",
    "spectral_gap_estimate",
    "classify",
    "default_candidates",
]


class FloorConditionError(ValueError):
    """The floor condition does not hold; the dependent quantity is undefined."""


@dataclass(frozen=True, eq=False)
class LyapunovCandidate:
    v: Operator
    provenance: str = "user-supplied"

    def __post_init__(self):
        if not self.v.is_hermitian(DEFAULT_TOLS.herm_tol):
            raise NormalizationError("Lyapunov candidate must be Hermitian")


@dataclass(frozen=True)
class SamplerConfig:
    n_states: int = 2000
    n_kappa: int = 1000
    seed: int = 20230811
    ranks: tuple[int, ...] = (1, 2, 3)
    outside_tol: float = 1e-10  # complement weight above which a state counts as outside C*


@dataclass(frozen=True)
class CertifyConfig:
    sampler: SamplerConfig = SamplerConfig()
    eig_tol: float = 1e-10
    block_tol: float = 1e-8
    angle_tol: float = 1e-6
    gamma_span: int = 6
    gamma_refine_iters: int = 24
    gap_eig_dim_cap: int = 12
    # kappa sampling only needs ~1e-3 distances; keep its optimizer light
    distance: DistanceConfig = DistanceConfig(opt_tol=1e-3, n_starts=2, maxiter=120)


@dataclass(frozen=True)
class Falsifier:
    kind: str  # "floor" | "asymptotic"
    sample_index: int
    value: float
    bound: float


@dataclass(frozen=True)
class FloorResult:
    v_star: float
    ok: bool
    margin: float
    uniform_defect: float  # max |W†VW - v_star I|
    cross_norm: float  # ||(1 - WW†) V W||
    falsifiers: tuple[Falsifier, ...] = ()


@dataclass(frozen=True)
class LyapunovResult:
    max_eig: float
    ok: bool


@dataclass(frozen=True)
class AsymptoticResult:
    ok: bool
    null_count: int
    interior_dim: int
    max_angle: float
    slowest_decay: float  # most positive strictly-negative eigenvalue of G(V)
    falsifiers: tuple[Falsifier, ...] = ()


@dataclass(frozen=True)
class ExponentialCertificate:
    gamma: float
    zeta: float
    margin: float


@dataclass(frozen=True)
class KappaEstimate:
    kappa_hat: float
    n_used: int
    n_skipped: int
    argmin_index: int
    ratios: tuple[float, ...] = ()  # every sampled Lemma-1 ratio, for the tautology guard


@dataclass(frozen=True, eq=False)
class StabilityReport:
    """Outcome of :func:`classify`: strongest level whose certificate and
    sampling both pass."""

    classification: str  # "exponential" | "asymptotic" | "lyapunov" | "inconclusive"
    floor: FloorResult
    lyapunov: LyapunovResult
    asymptotic: AsymptoticResult | None
    exponential: ExponentialCertificate | None
    kappa: KappaEstimate | None
    falsifiers: tuple[Falsifier, ...]
    provenance: str = "user-supplied"
    label: str = ""

    def __post_init__(self):
        if self.exponential is not None and not (self.asymptotic_ok and self.lyapunov_ok):
            raise ValueError("report lattice violated: exponential without asymptotic/lyapunov")
        if self.asymptotic_ok and not self.lyapunov_ok:
            raise ValueError("report lattice violated: asymptotic without lyapunov")
        order = {"inconclusive": 0, "lyapunov": 1, "asymptotic": 2, "exponential": 3}
        if self.classification not in order:
            raise ValueError(f"unknown classification {self.classification!r}")

    @property
    def floor_ok(self) -> bool:
        return self.floor.ok

    @property
    def lyapunov_ok(self) -> bool:
        return self.lyapunov.ok

    @property
    def asymptotic_ok(self) -> bool:
        return self.asymptotic is not None and self.asymptotic.ok

    @property
    def kappa_hat(self) -> float | None:
        return None if self.kappa is None else self.kappa.kappa_hat

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "label": self.label,
            "lyapunov_candidate": self.provenance,
            "floor": {
                "ok": self.floor.ok,
                "v_star": self.floor.v_star,
                "margin": self.floor.margin,
                "uniform_defect": self.floor.uniform_defect,
                "cross_norm": self.floor.cross_norm,
            },
            "lyapunov": {"ok": self.lyapunov.ok, "max_eig": self.lyapunov.max_eig},
            "asymptotic": None
            if self.asymptotic is None
            else {
                "ok": self.asymptotic.ok,
                "null_count": self.asymptotic.null_count,
                "interior_dim": self.asymptotic.interior_dim,
                "max_angle": self.asymptotic.max_angle,
                "slowest_decay": self.asymptotic.slowest_decay,
            },
            "exponential": None
            if self.exponential is None
            else {
                "gamma": self.exponential.gamma,
                "zeta": self.exponential.zeta,
                "margin": self.exponential.margin,
            },
            "kappa_hat": self.kappa_hat,
            "kappa_samples_used": None if self.kappa is None else self.kappa.n_used,
            "falsifier_count": len(self.falsifiers),
            "falsifiers": [
                {"kind": f.kind, "sample_index": f.sample_index, "value": f.value, "bound": f.bound}
                for f in self.falsifiers
            ],
        }


# ---------------------------------------------------------------------------
# helpers


def truncation_interior(model: SystemModel, v: Operator) -> int:
    """Number of retained levels for eigen-certificates on G(V).

    Twice the largest ladder bandwidth among H, the couplings, and V is
    discarded from the top; products of truncated ladder polynomials are
    exact on the remaining block.
    """
    bw = upper_bandwidth(model.hamiltonian)
    for L in model.couplings:
        bw = max(bw, upper_bandwidth(L))
    bw = max(bw, upper_bandwidth(v))
    cut = min(2 * bw, model.dim // 2)
    return model.dim - cut


def _complement_basis(w: np.ndarray) -> np.ndarray:
    d, k = w.shape
    q, _ = np.linalg.qr(np.hstack([w, np.eye(d, dtype=complex)]))
    return q[:, k:d]


def _sample_full(dim: int, cfg: SamplerConfig, i: int) -> DensityOperator:
    rank = min(cfg.ranks[i % len(cfg.ranks)], dim)
    return random_density(dim, rank, cfg.seed + i)


def _sample_interior(dim: int, m: int, cfg: SamplerConfig, i: int) -> np.ndarray:
    rank = min(cfg.ranks[i % len(cfg.ranks)], m)
    core = random_density(m, rank, cfg.seed + i).entries
    out = np.zeros((dim, dim), dtype=complex)
    out[:m, :m] = core
    return out


def _require_isometry(inv_set: InvariantSet) -> np.ndarray:
    if inv_set.dark_isometry is None:
        raise UnsupportedStructureError(
            "invariant set has no dark-subspace structure; certificate unsupported"
        )
    return inv_set.dark_isometry


# ---------------------------------------------------------------------------
# the four checks


def floor_check(
    v: Operator, inv_set: InvariantSet, sampler_cfg: SamplerConfig | None = None
) -> FloorResult:
    """Check that tr(V rho) has a strict floor V* attained exactly on C*.

    Certificate: W†VW = V*·1 (V is uniform on the set, so the infimum over
    rho* is constant), no cross block, and the complement block sits above
    V* by a positive margin. The sampler independently looks for states
    outside C* at or below the floor.
    """
    sampler_cfg = sampler_cfg or SamplerConfig()
    w = _require_isometry(inv_set)
    d, k = w.shape
    vm = _entries(v)
    if vm.shape[0] != d:
        raise ValueError(f"operator dim {vm.shape[0]} does not match set dim {d}")
    block = w.conj().T @ vm @ w
    v_star = float(np.linalg.eigvalsh(0.5 * (block + block.conj().T))[-1])
    uniform_defect = float(np.max(np.abs(block - v_star * np.eye(k))))
    cross = vm @ w - w @ block
    cross_norm = float(np.linalg.norm(cross, 2))
    qc = _complement_basis(w)
    comp = qc.conj().T @ vm @ qc
    comp_min = float(np.linalg.eigvalsh(0.5 * (comp + comp.conj().T))[0])
    margin = comp_min - v_star
    ok = uniform_defect <= 1e-8 and cross_norm <= 1e-8 and margin > 0

    falsifiers = []
    proj = w @ w.conj().T
    with single_threaded_blas():
        for i in range(sampler_cfg.n_states):
            rho = _sample_full(d, sampler_cfg, i).entries
            outside_weight = float(1.0 - np.einsum("ij,ji->", proj, rho).real)
            if outside_weight <= sampler_cfg.outside_tol:
                continue
            value = float(np.einsum("ij,ji->", vm, rho).real)
            if value <= v_star + 1e-10:
                falsifiers.append(Falsifier("floor", i, value, v_star + 1e-10))
    return FloorResult(
        v_star=v_star,
        ok=ok,
        margin=margin,
        uniform_defect=uniform_defect,
        cross_norm=cross_norm,
        falsifiers=tuple(falsifiers),
    )


def _compressed_generator(model: SystemModel, v: Operator) -> tuple[np.ndarray, np.ndarray, int]:
    m = truncation_interior(model, v)
    gv = heisenberg_generator(model, v).entries[:m, :m]
    vc = _entries(v)[:m, :m]
    return 0.5 * (gv + gv.conj().T), 0.5 * (vc + vc.conj().T), m


def lyapunov_check(
    model: SystemModel, v: Operator, eig_tol: float = 1e-10
) -> LyapunovResult:
    """Matrix certificate for tr(G(V) rho) <= 0: G(V) compressed to the
    truncation interior must be negative semidefinite."""
    gc, _, _ = _compressed_generator(model, v)
    max_eig = float(np.linalg.eigvalsh(gc)[-1])
    return LyapunovResult(max_eig=max_eig, ok=bool(max_eig <= eig_tol))


def asymptotic_check(
    model: SystemModel,
    v: Operator,
    inv_set: InvariantSet,
    sampler_cfg: SamplerConfig | None = None,
    eig_tol: float = 1e-10,
    angle_tol: float = 1e-6,
) -> AsymptoticResult:
    """Certificate for strict decay off C*: G(V) <= 0 with every near-null
    eigenvector inside the dark subspace.

    Requires lyapunov_check to have passed. The sampler hunts for interior
    states outside C* with non-negative generator expectation.
    """
    sampler_cfg = sampler_cfg or SamplerConfig()
    w = _require_isometry(inv_set)
    gc, _, m = _compressed_generator(model, v)
    evals, evecs = np.linalg.eigh(gc)
    psd_ok = evals[-1] <= eig_tol
    null_mask = evals >= -eig_tol
    null_count = int(np.sum(null_mask))
    decaying = evals[~null_mask]
    slowest = float(decaying[-1]) if decaying.size else 0.0

    wc = w[:m, :]
    col_norms = np.linalg.norm(wc, axis=0)
    max_angle = float("inf")
    angles_ok = False
    if np.all(col_norms > 0.9):
        wq, _ = np.linalg.qr(wc)
        proj = wq @ wq.conj().T
        angles = [
            float(np.linalg.norm(vec - proj @ vec)) for vec in evecs[:, null_mask].T
        ]
        max_angle = max(angles) if angles else 0.0
        angles_ok = max_angle <= angle_tol
    ok = bool(psd_ok and angles_ok and null_count < m)

    gv_full = heisenberg_generator(model, v).entries
    proj_full = w @ w.conj().T
    falsifiers = []
    with single_threaded_blas():
        for i in range(sampler_cfg.n_states):
            rho = _sample_interior(model.dim, m, sampler_cfg, i)
            outside_weight = float(1.0 - np.einsum("ij,ji->", proj_full, rho).real)
            if outside_weight <= sampler_cfg.outside_tol:
                continue
            value = float(np.einsum("ij,ji->", gv_full, rho).real)
            if value >= -1e-12:
                falsifiers.append(Falsifier("asymptotic", i, value, -1e-12))
    return AsymptoticResult(
        ok=ok,
        null_count=null_count,
        interior_dim=m,
        max_angle=max_angle,
        slowest_decay=slowest,
        falsifiers=tuple(falsifiers),
    )


def exponential_check(
    model: SystemModel,
    v: Operator,
    gamma: float,
    zeta: float = 0.0,
    eig_tol: float = 1e-10,
) -> tuple[bool, float]:
    """Matrix form of tr(G(V) rho) <= -gamma tr(V rho) + zeta:
    G(V) + gamma V - zeta 1 must be negative semidefinite (interior block).
    Returns (ok, margin) with margin = -max eigenvalue."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    gc, vc, m = _compressed_generator(model, v)
    kmat = gc + gamma * vc - zeta * np.eye(m)
    max_eig = float(np.linalg.eigvalsh(kmat)[-1])
    return bool(max_eig <= eig_tol), -max_eig


# ---------------------------------------------------------------------------
# Lemma-1 constant


def lemma1_ratio(
    v: Operator,
    inv_set: InvariantSet,
    rho: DensityOperator,
    v_star: float | None = None,
    distance_cfg: DistanceConfig | None = None,
) -> float | None:
    """(tr(V rho) - V*) / d(rho, C*)^2 for one state; None when d ~ 0."""
    w = _require_isometry(inv_set)
    if v_star is None:
        block = w.conj().T @ _entries(v) @ w
        v_star = float(np.linalg.eigvalsh(0.5 * (block + block.conj().T))[-1])
    dist = distance_to_set(rho, inv_set, distance_cfg)
    if dist < 1e-6:
        return None
    return float((expectation(v, rho).real - v_star) / dist**2)


def estimate_kappa(
    v: Operator,
    inv_set: InvariantSet,
    sampler_cfg: SamplerConfig | None = None,
    distance_cfg: DistanceConfig | None = None,
) -> KappaEstimate:
    """Sampled lower-bound constant of the quadratic floor inequality.

    kappa_hat = min over sampled states outside C* of the Lemma-1 ratio.
    Refuses when the floor certificate does not hold (the ratio is then
    meaningless). Near-set samples (d ~ 0) are skipped and counted.
    """
    sampler_cfg = sampler_cfg or SamplerConfig()
    floor = floor_check(v, inv_set, sampler_cfg=SamplerConfig(n_states=0, seed=sampler_cfg.seed))
    if not floor.ok:
        raise FloorConditionError("floor condition fails; kappa is undefined for this V")
    w = inv_set.dark_isometry
    d = w.shape[0]
    kappa_hat = np.inf
    argmin = -1
    used = skipped = 0
    ratios: list[float] = []
    with single_threaded_blas():
        for i in range(sampler_cfg.n_kappa):
            rho = _sample_full(d, sampler_cfg, 10_000_019 + i)
            ratio = lemma1_ratio(v, inv_set, rho, v_star=floor.v_star, distance_cfg=distance_cfg)
            if ratio is None:
                skipped += 1
                continue
            used += 1
            ratios.append(ratio)
            if ratio < kappa_hat:
                kappa_hat = ratio
                argmin = i
    if used == 0:
        raise FloorConditionError("all kappa samples were degenerate (d ~ 0)")
    return KappaEstimate(
        kappa_hat=float(kappa_hat),
        n_used=used,
        n_skipped=skipped,
        argmin_index=argmin,
        ratios=tuple(ratios),
    )


# ---------------------------------------------------------------------------
# classification


def spectral_gap_estimate(model: SystemModel, dim_cap: int = 12) -> float | None:
    """-max Re of the decaying Liouvillian spectrum; None when dim > cap or
    no decaying modes exist."""
    if model.dim > dim_cap:
        return None
    ev = np.linalg.eigvals(liouvillian_matrix(model).matrix)
    scale = float(np.max(np.abs(ev), initial=0.0))
    if scale == 0.0:
        return None
    decaying = ev.real[ev.real < -1e-9 * scale]
    if decaying.size == 0:
        return None
    return float(-np.max(decaying))


def _search_gamma(
    model: SystemModel, v: Operator, v_star: float, cfg: CertifyConfig
) -> ExponentialCertificate | None:
    gamma0 = spectral_gap_estimate(model, cfg.gap_eig_dim_cap) or 1.0
    grid = [gamma0 * 2.0**i for i in range(cfg.gamma_span, -cfg.gamma_span - 1, -1)]
    zetas = [0.0] if abs(v_star) < 1e-14 else [0.0, None]  # None marks zeta = gamma * v_star

    def attempt(gamma: float) -> ExponentialCertificate | None:
        for z in zetas:
            zeta = gamma * v_star if z is None else z
            ok, margin = exponential_check(model, v, gamma, zeta, eig_tol=cfg.eig_tol)
            if ok:
                return ExponentialCertificate(gamma=gamma, zeta=zeta, margin=margin)
        return None

    best = None
    fail_above = None
    for gamma in grid:
        cert = attempt(gamma)
        if cert is not None:
            best = cert
            break
        fail_above = gamma
    if best is None:
        return None
    if fail_above is not None:
        lo, hi = best.gamma, fail_above
        for _ in range(cfg.gamma_refine_iters):
            mid = float(np.sqrt(lo * hi))
            cert = attempt(mid)
            if cert is not None:
                best, lo = cert, mid
            else:
                hi = mid
    return best


def classify(
    model: SystemModel,
    v: Operator | LyapunovCandidate,
    inv_set: InvariantSet,
    cfg: CertifyConfig | None = None,
) -> StabilityReport:
    """Run the full certificate ladder and return the strongest verdict.

    Order: floor condition, generator negativity, strict-decay certificate,
    then a geometric gamma search (with zeta = 0 and zeta = gamma V*) for
    the exponential rate, refined by bisection. Any sampler falsifier
    downgrades the verdict to inconclusive.
    """
    cfg = cfg or CertifyConfig()
    if isinstance(v, LyapunovCandidate):
        cand, vop = v, v.v
    else:
        cand, vop = LyapunovCandidate(v), v

    try:
        floor = floor_check(vop, inv_set, sampler_cfg=cfg.sampler)
        structure_ok = True
    except UnsupportedStructureError:
        floor = FloorResult(
            v_star=float("nan"), ok=False, margin=float("-inf"),
            uniform_defect=float("inf"), cross_norm=float("inf"),
        )
        structure_ok = False

    lyap = lyapunov_check(model, vop, eig_tol=cfg.eig_tol)
    asym = None
    if lyap.ok and structure_ok:
        asym = asymptotic_check(
            model, vop, inv_set, sampler_cfg=cfg.sampler,
            eig_tol=cfg.eig_tol, angle_tol=cfg.angle_tol,
        )

    exponential = None
    if floor.ok and lyap.ok and asym is not None and asym.ok:
        exponential = _search_gamma(model, vop, floor.v_star, cfg)

    kappa = None
    if floor.ok and not floor.falsifiers:
        try:
            kappa = estimate_kappa(
                vop, inv_set, sampler_cfg=cfg.sampler, distance_cfg=cfg.distance
            )
        except FloorConditionError:
            kappa = None

    falsifiers = floor.falsifiers + (asym.falsifiers if asym is not None else ())
    if falsifiers:
        classification = "inconclusive"
    elif floor.ok and lyap.ok and asym is not None and asym.ok and exponential is not None:
        classification = "exponential"
    elif floor.ok and lyap.ok and asym is not None and asym.ok:
        classification = "asymptotic"
    elif floor.ok and lyap.ok:
        classification = "lyapunov"
    else:
        classification = "inconclusive"

    return StabilityReport(
        classification=classification,
        floor=floor,
        lyapunov=lyap,
        asymptotic=asym,
        exponential=exponential,
        kappa=kappa,
        falsifiers=falsifiers,
        provenance=cand.provenance,
        label=model.label,
    )


def default_candidates(model: SystemModel) -> tuple[LyapunovCandidate, ...]:
    """The two built-in candidates: V = sum L†L, then V = H."""
    out = []
    if model.couplings:
        total = np.zeros((model.dim, model.dim), dtype=complex)
        for L in model.couplings:
            total += L.entries.conj().T @ L.entries
        out.append(LyapunovCandidate(Operator(total), provenance="default L†L"))
    out.append(LyapunovCandidate(model.hamiltonian, provenance="default H"))
    return tuple(out)
