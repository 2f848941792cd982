"""The invariant set C*: fixed points of the master equation, dark-subspace
detection, membership tests, and trace-norm distance to the set.

Supported invariant-set geometry is "all states on a dark subspace": an
isometry W with L_j W = 0 for every coupling and H span(W) inside span(W),
cross-validated against the Liouvillian kernel dimension k^2. When fixed
points exist without this structure, the distance computation refuses
rather than guessing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import qr
from scipy.optimize import minimize

from .hilbert import DensityOperator, Operator, _entries, trace_norm
from .lindblad import SystemModel, liouvillian_matrix, schrodinger_generator, unvec
from .dynamics import DEFAULT_EXP_CAP, CapacityError

__all__ = [
    "KernelError",
    "UnsupportedStructureError",
    "FixedPointBasis",
    "InvariantSet",
    "InvarianceResult",
    "fixed_point_basis",
    "dark_subspace",
    "invariant_set",
    "is_invariant",
    "DistanceConfig",
    "distance_to_set",
]


class KernelError(RuntimeError):
    """The Liouvillian kernel came out empty (should never happen at finite dim)."""


class UnsupportedStructureError(ValueError):
    """The invariant set lacks the dark-subspace structure this module supports."""


@dataclass(frozen=True, eq=False)
class FixedPointBasis:
    """Hilbert-Schmidt-orthonormal Hermitian basis of ker(Lstar)."""

    basis: tuple[Operator, ...]
    svd_threshold: float

    @property
    def dimension(self) -> int:
        return len(self.basis)


@dataclass(frozen=True, eq=False)
class InvariantSet:
    """C* representation: fixed-point basis plus optional dark isometry.

    ``dark_isometry`` is a dim x k matrix with orthonormal columns spanning
    the dark subspace, present only when detection and cross-validation
    succeeded; then C* = { W tau W† : tau a k-dim density matrix }.
    """

    fixed_points: FixedPointBasis
    dark_isometry: np.ndarray | None
    k: int

    def __post_init__(self):
        if self.dark_isometry is not None:
            w = np.array(self.dark_isometry, dtype=complex)
            if w.ndim != 2 or w.shape[1] != self.k:
                raise ValueError(f"dark isometry must be dim x k, got {w.shape}")
            gram = w.conj().T @ w
            if np.max(np.abs(gram - np.eye(self.k))) > 1e-10:
                raise ValueError("dark isometry columns are not orthonormal within 1e-10")
            w.setflags(write=False)
            object.__setattr__(self, "dark_isometry", w)
        elif self.k != 0:
            raise ValueError("k must be 0 when no dark isometry is present")


class InvarianceResult(NamedTuple):
    invariant: bool
    residual: float


def _hermitian_orthonormalize(mats: list[np.ndarray], dim: int) -> list[np.ndarray]:
    """Real-orthonormal basis of the Hermitian span of the given matrices.

    Uses the isometry Herm(d) -> R^{2 d^2}, (Re vec, Im vec), under which the
    Hilbert-Schmidt inner product becomes Euclidean.
    """
    cols = []
    for m in mats:
        for h in (0.5 * (m + m.conj().T), (m - m.conj().T) / 2j):
            v = h.reshape(-1)
            cols.append(np.concatenate([v.real, v.imag]))
    stack = np.array(cols).T  # (2 dim^2) x (2 n)
    u, s, _ = np.linalg.svd(stack, full_matrices=False)
    rank = int(np.sum(s > 1e-8 * max(1.0, s[0])))
    out = []
    for i in range(rank):
        re, im = u[: dim * dim, i], u[dim * dim :, i]
        h = (re + 1j * im).reshape(dim, dim)
        out.append(0.5 * (h + h.conj().T))
    return out


def fixed_point_basis(
    model: SystemModel, svd_threshold: float = 1e-9, cap: int = DEFAULT_EXP_CAP
) -> FixedPointBasis:
    """Orthonormal Hermitian basis of { B : Lstar(B) = 0 }.

    Kernel extraction is an SVD of the vectorized Liouvillian with relative
    threshold ``svd_threshold`` times the largest singular value; kernel
    vectors are re-Hermitianized and re-orthonormalized.
    """
    if model.dim**2 > cap:
        raise CapacityError(f"dim^2 = {model.dim**2} exceeds cap {cap}")
    M = liouvillian_matrix(model).matrix
    _, s, vh = np.linalg.svd(M)
    cut = svd_threshold * (s[0] if s.size and s[0] > 0 else 1.0)
    kernel = [vh[i].conj() for i in range(len(s)) if s[i] <= cut]
    if not kernel:
        raise KernelError(
            "empty Liouvillian kernel; a trace-preserving generator always has one"
        )
    mats = [unvec(v, model.dim) for v in kernel]
    herm = _hermitian_orthonormalize(mats, model.dim)
    if len(herm) != len(kernel):
        raise KernelError(
            f"kernel is not closed under dagger: complex dim {len(kernel)}, "
            f"Hermitian rank {len(herm)}"
        )
    basis = tuple(Operator(h) for h in herm)
    for b in basis:
        resid = trace_norm(schrodinger_generator(model, b).entries)
        if resid > 10 * svd_threshold:
            raise KernelError(f"kernel basis element has residual {resid:.3e}")
    return FixedPointBasis(basis=basis, svd_threshold=svd_threshold)


def dark_subspace(model: SystemModel, tol: float = 1e-8) -> np.ndarray | None:
    """Isometry onto the common coupling kernel, shrunk to its H-invariant part.

    Returns None when the intersection is trivial. Absence is a value, not
    an error.
    """
    d = model.dim
    if model.couplings:
        stack = np.vstack([L.entries for L in model.couplings])
        _, s, vh = np.linalg.svd(stack)
        small = [i for i in range(len(s)) if s[i] <= tol]
        cols = [vh[i].conj() for i in small]
        # rows of vh beyond the singular-value count also span the kernel
        cols += [vh[i].conj() for i in range(len(s), vh.shape[0])]
        if not cols:
            return None
        w = np.array(cols).T
        w, _ = np.linalg.qr(w)
    else:
        w = np.eye(d, dtype=complex)

    H = model.hamiltonian.entries
    for _ in range(d + 1):
        resid = (H @ w) - w @ (w.conj().T @ H @ w)
        if np.max(np.linalg.norm(resid, axis=0), initial=0.0) <= tol:
            break
        _, s, vh = np.linalg.svd(resid)
        keep = [i for i in range(len(s)) if s[i] <= tol]
        keep += list(range(len(s), vh.shape[0]))
        if not keep:
            return None
        w = w @ np.array([vh[i].conj() for i in keep]).T
        w, _ = np.linalg.qr(w)
        if w.shape[1] == 0:
            return None
    return w


def _hermitian_units(k: int) -> list[np.ndarray]:
    units = []
    for i in range(k):
        e = np.zeros((k, k), dtype=complex)
        e[i, i] = 1.0
        units.append(e)
    for i in range(k):
        for j in range(i + 1, k):
            e = np.zeros((k, k), dtype=complex)
            e[i, j] = e[j, i] = 1.0
            units.append(e)
            f = np.zeros((k, k), dtype=complex)
            f[i, j] = 1j
            f[j, i] = -1j
            units.append(f)
    return units


def invariant_set(
    model: SystemModel,
    svd_threshold: float = 1e-9,
    dark_tol: float = 1e-8,
    cap: int = DEFAULT_EXP_CAP,
) -> InvariantSet:
    """Compute C*: fixed-point basis plus the dark isometry when it checks out.

    The dark structure is accepted only when (i) the coupling-kernel and
    H-invariance residuals pass, (ii) every state supported on the subspace
    is invariant, and (iii) the Liouvillian kernel dimension equals k^2.
    Otherwise the isometry is absent and distance queries will refuse.
    """
    fpb = fixed_point_basis(model, svd_threshold=svd_threshold, cap=cap)
    w = dark_subspace(model, tol=dark_tol)
    if w is None or w.shape[1] == 0:
        return InvariantSet(fixed_points=fpb, dark_isometry=None, k=0)
    k = w.shape[1]
    ok = k * k == fpb.dimension
    if ok:
        for L in model.couplings:
            if np.max(np.linalg.norm(L.entries @ w, axis=0), initial=0.0) > dark_tol:
                ok = False
                break
    if ok:
        H = model.hamiltonian.entries
        if np.linalg.norm(H @ w - w @ (w.conj().T @ H @ w), 2) > dark_tol:
            ok = False
    if ok:
        for u in _hermitian_units(k):
            resid = trace_norm(schrodinger_generator(model, w @ u @ w.conj().T).entries)
            if resid > dark_tol:
                ok = False
                break
    if not ok:
        return InvariantSet(fixed_points=fpb, dark_isometry=None, k=0)
    return InvariantSet(fixed_points=fpb, dark_isometry=w, k=k)


def is_invariant(model: SystemModel, rho: DensityOperator, tol: float = 1e-8) -> InvarianceResult:
    """Membership test: ||Lstar(rho)||_1 <= tol, residual always reported."""
    residual = trace_norm(schrodinger_generator(model, rho).entries)
    return InvarianceResult(invariant=bool(residual <= tol), residual=float(residual))


# ---------------------------------------------------------------------------
# distance to the set


@dataclass(frozen=True)
class DistanceConfig:
    opt_tol: float = 1e-4
    n_starts: int = 8
    seed: int = 20230811
    rank_eps: float = 1e-12
    maxiter: int = 400


def _tau_from_params(x: np.ndarray, k: int, tril=None) -> np.ndarray:
    """Unit-trace PSD matrix from a Cholesky-like parameter vector (k^2 reals).

    Layout: k real diagonal entries, then (re, im) pairs for the strict
    lower triangle in np.tril_indices order.
    """
    tril = np.tril_indices(k, -1) if tril is None else tril
    c = np.zeros((k, k), dtype=complex)
    c[np.arange(k), np.arange(k)] = x[:k]
    c[tril] = x[k::2] + 1j * x[k + 1 :: 2]
    t = c @ c.conj().T
    tr = float(np.trace(t).real)
    if tr <= 1e-300:
        return np.eye(k, dtype=complex) / k
    return t / tr


def _params_from_tau(tau: np.ndarray, k: int) -> np.ndarray:
    jitter = 1e-12 * np.eye(k)
    c = np.linalg.cholesky(0.5 * (tau + tau.conj().T) + jitter)
    x = np.empty(k * k)
    x[:k] = np.diag(c).real
    lo = c[np.tril_indices(k, -1)]
    x[k::2] = lo.real
    x[k + 1 :: 2] = lo.imag
    return x


def distance_to_set(
    rho: DensityOperator, inv_set: InvariantSet, cfg: DistanceConfig | None = None
) -> float:
    """Trace-norm distance min_tau || rho - W tau W† ||_1 to the dark set.

    k = 1 reduces to a direct trace distance. Larger k is minimized by
    multi-start local descent (Powell) on a Cholesky parameterization of
    tau; the objective is convex in tau but nonsmooth, and the projection
    of rho onto the subspace supplies a warm start.
    """
    cfg = cfg or DistanceConfig()
    if inv_set.dark_isometry is None:
        raise UnsupportedStructureError(
            "invariant set has no dark-subspace structure; distance is unsupported"
        )
    w = inv_set.dark_isometry
    r = _entries(rho)
    if r.shape[0] != w.shape[0]:
        raise ValueError(f"state dim {r.shape[0]} does not match set dim {w.shape[0]}")
    k = inv_set.k
    if k == 1:
        return trace_norm(r - w @ w.conj().T)

    # compress onto span(range W, range rho); exact up to the dropped
    # eigenvalue tail of rho, which is added back as an upper bound
    evals, evecs = np.linalg.eigh(0.5 * (r + r.conj().T))
    keep = np.abs(evals) > cfg.rank_eps
    dropped = float(np.sum(np.abs(evals[~keep])))
    basis, _ = qr(np.hstack([w, evecs[:, keep]]), mode="economic")
    rc = basis.conj().T @ r @ basis
    wc = basis.conj().T @ w

    wch = wc.conj().T
    tril = np.tril_indices(k, -1)

    def objective(x: np.ndarray) -> float:
        tau = _tau_from_params(x, k, tril)
        diff = rc - wc @ tau @ wch
        return float(np.sum(np.abs(np.linalg.eigvalsh(diff)))) + dropped

    # smoothed objective (pseudo-Huber on eigenvalues) with analytic
    # gradient through the Cholesky parameterization; the smoothing bias
    # is at most m * eps, far below opt_tol
    eps = 1e-9 * max(1.0, float(np.max(np.abs(rc))))

    def smooth_value_grad(x: np.ndarray) -> tuple[float, np.ndarray]:
        c = np.zeros((k, k), dtype=complex)
        c[np.arange(k), np.arange(k)] = x[:k]
        c[tril] = x[k::2] + 1j * x[k + 1 :: 2]
        t = c @ c.conj().T
        s = float(np.trace(t).real)
        if s <= 1e-300:
            tau = np.eye(k, dtype=complex) / k
            s = 1.0
            t = tau
        else:
            tau = t / s
        diff = rc - wc @ tau @ wch
        lam, u = np.linalg.eigh(diff)
        root = np.sqrt(lam * lam + eps * eps)
        val = float(np.sum(root)) + dropped
        gd = (u * (lam / root)) @ u.conj().T  # d f / d diff
        m_tau = -(wch @ gd @ wc)  # d f / d tau, Hermitian
        m_t = (m_tau - np.trace(m_tau @ tau) * np.eye(k)) / s
        pc = m_t @ c  # Wirtinger derivative wrt conj(C) entries
        grad = np.empty_like(x)
        grad[:k] = 2.0 * np.real(np.diag(pc))
        lo = pc[tril]
        grad[k::2] = 2.0 * lo.real
        grad[k + 1 :: 2] = 2.0 * lo.imag
        return val, grad

    warm = w.conj().T @ r @ w
    warm = 0.5 * (warm + warm.conj().T)
    tr = float(np.trace(warm).real)
    starts = [np.eye(k, dtype=complex) / k]
    if tr > 1e-12:
        starts.insert(0, warm / tr)
    rng = np.random.default_rng(cfg.seed)
    while len(starts) < cfg.n_starts:
        g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        t = g @ g.conj().T
        starts.append(t / np.trace(t).real)

    best = np.inf
    best_x = None
    stalled = False
    for tau0 in starts:
        x0 = _params_from_tau(tau0, k)
        res = minimize(
            smooth_value_grad,
            x0,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": cfg.maxiter, "ftol": 1e-14, "gtol": 1e-10},
        )
        descended = objective(res.x)
        raw = objective(x0)
        if descended > raw + 1e-12:
            stalled = True
        for val, x in ((descended, res.x), (raw, x0)):
            if val < best:
                best, best_x = val, x
    if stalled:
        # derivative-free fallback for the rare smoothed-descent stall
        res = minimize(
            objective,
            best_x,
            method="Powell",
            options={
                "xtol": max(1e-8, 1e-2 * cfg.opt_tol),
                "ftol": max(1e-12, 1e-3 * cfg.opt_tol),
                "maxiter": cfg.maxiter,
            },
        )
        best = min(best, float(res.fun))
    return best
