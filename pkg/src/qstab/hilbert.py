"""Truncated-Fock-space operators, states, norms, and constructors.

Everything is a dense complex matrix or vector on the first ``dim`` number
states. Ladder-operator polynomials are exact except on the top few levels;
callers that assert algebraic identities should exclude those (see
:func:`upper_bandwidth`).
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np

from .config import DEFAULT_TOLS, Tolerances

__all__ = [
    "DimensionError",
    "TruncationError",
    "DegenerateInputError",
    "NormalizationError",
    "Operator",
    "StateVector",
    "DensityOperator",
    "annihilation_op",
    "creation_op",
    "number_op",
    "identity_op",
    "zero_op",
    "fock_state",
    "coherent_state",
    "cat_basis",
    "pure_density",
    "random_density",
    "hs_inner",
    "trace_norm",
    "trace_distance",
    "expectation",
    "upper_bandwidth",
]


class DimensionError(ValueError):
    """Invalid or mismatched truncation dimensions."""


class TruncationError(ValueError):
    """Truncation too small for the requested construction.

    ``required_dim`` names the smallest dimension that would satisfy the
    tail-mass precondition (or None if it exceeded the search cap).
    """

    def __init__(self, message: str, required_dim: int | None = None):
        super().__init__(message)
        self.required_dim = required_dim


class DegenerateInputError(ValueError):
    """Input degenerates the construction (e.g. cat basis at alpha = 0)."""


class NormalizationError(ValueError):
    """Vector or matrix fails its normalization contract."""


def _as_square_complex(entries) -> np.ndarray:
    arr = np.array(entries, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise DimensionError("dimension must be a positive integer")
    if not np.all(np.isfinite(arr)):
        raise ValueError("operator entries must be finite (no NaN/Inf)")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix on the truncated Fock space.

    Immutable after construction; arithmetic returns new operators.
    """

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _as_square_complex(self.entries))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.entries.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def is_hermitian(self, tol: float = DEFAULT_TOLS.herm_tol) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T)) <= tol)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.entries + _same_dim(self, other).entries)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.entries - _same_dim(self, other).entries)

    def __neg__(self) -> "Operator":
        return Operator(-self.entries)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.entries * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.entries @ _same_dim(self, other).entries)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Operator(dim={self.dim})"


def _same_dim(a: Operator, b: Operator) -> Operator:
    if not isinstance(b, Operator):
        raise TypeError(f"expected Operator, got {type(b).__name__}")
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return b


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm complex vector in the number basis."""

    amplitudes: np.ndarray
    tols: InitVar[Tolerances | None] = None

    def __post_init__(self, tols):
        tols = tols or DEFAULT_TOLS
        arr = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if arr.size < 1:
            raise DimensionError("state vector must have positive dimension")
        if not np.all(np.isfinite(arr)):
            raise ValueError("state amplitudes must be finite")
        nrm = float(np.linalg.norm(arr))
        if abs(nrm - 1.0) > tols.tail_tol:
            raise NormalizationError(f"state norm {nrm} not within {tols.tail_tol} of 1")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def inner(self, other: "StateVector") -> complex:
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive-semidefinite, unit-trace operator."""

    op: Operator
    tols: InitVar[Tolerances | None] = None

    def __post_init__(self, tols):
        tols = tols or DEFAULT_TOLS
        m = self.op.entries
        herm_defect = float(np.max(np.abs(m - m.conj().T)))
        if herm_defect > tols.herm_tol:
            raise NormalizationError(
                f"density operator not Hermitian: defect {herm_defect:.3e} > {tols.herm_tol:.1e}"
            )
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > tols.trace_tol:
            raise NormalizationError(
                f"density operator trace {tr} not within {tols.trace_tol:.1e} of 1"
            )
        min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if min_eig < -tols.psd_tol:
            raise NormalizationError(
                f"density operator min eigenvalue {min_eig:.3e} below -{tols.psd_tol:.1e}"
            )

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries

    @property
    def dim(self) -> int:
        return self.op.dim


# ---------------------------------------------------------------------------
# constructors


def annihilation_op(dim: int) -> Operator:
    """Ladder operator a with a|n> = sqrt(n)|n-1> on the truncated basis."""
    if dim < 2:
        raise DimensionError(f"annihilation operator needs dim >= 2, got {dim}")
    m = np.zeros((dim, dim), dtype=complex)
    ns = np.arange(1, dim)
    m[ns - 1, ns] = np.sqrt(ns)
    return Operator(m)


def creation_op(dim: int) -> Operator:
    return annihilation_op(dim).dagger()


def number_op(dim: int) -> Operator:
    if dim < 1:
        raise DimensionError(f"number operator needs dim >= 1, got {dim}")
    return Operator(np.diag(np.arange(dim, dtype=float)).astype(complex))


def identity_op(dim: int) -> Operator:
    if dim < 1:
        raise DimensionError(f"identity needs dim >= 1, got {dim}")
    return Operator(np.eye(dim, dtype=complex))


def zero_op(dim: int) -> Operator:
    if dim < 1:
        raise DimensionError(f"zero operator needs dim >= 1, got {dim}")
    return Operator(np.zeros((dim, dim), dtype=complex))


def fock_state(n: int, dim: int) -> StateVector:
    if not 0 <= n < dim:
        raise DimensionError(f"fock level {n} outside truncation 0..{dim - 1}")
    amp = np.zeros(dim, dtype=complex)
    amp[n] = 1.0
    return StateVector(amp)


def _coherent_weights(alpha: complex, dim: int) -> np.ndarray:
    # c_n = e^{-|a|^2/2} a^n / sqrt(n!), built by the stable recursion
    c = np.empty(dim, dtype=complex)
    c[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def required_coherent_dim(alpha: complex, tail_tol: float, cap: int = 4096) -> int | None:
    """Smallest dim whose truncated coherent tail mass is <= tail_tol."""
    mean = abs(alpha) ** 2
    weight = math.exp(-mean)
    cum = weight
    n = 0
    while n + 1 < cap:
        if 1.0 - cum <= tail_tol:
            return n + 1
        n += 1
        weight *= mean / n
        cum += weight
    return None


def coherent_state(alpha: complex, dim: int, tols: Tolerances | None = None) -> StateVector:
    """Truncated coherent vector |alpha>, renormalized after truncation.

    Raises TruncationError when the discarded Poisson tail mass exceeds
    tail_tol; the error names the smallest sufficient dimension.
    """
    tols = tols or DEFAULT_TOLS
    if dim < 1:
        raise DimensionError(f"dim must be positive, got {dim}")
    c = _coherent_weights(complex(alpha), dim)
    tail = 1.0 - float(np.sum(np.abs(c) ** 2))
    if tail > tols.tail_tol:
        need = required_coherent_dim(complex(alpha), tols.tail_tol)
        raise TruncationError(
            f"coherent tail mass {tail:.3e} exceeds tail_tol {tols.tail_tol:.1e} "
            f"at dim={dim}; need dim >= {need}",
            required_dim=need,
        )
    return StateVector(c / np.linalg.norm(c), tols=tols)


def cat_basis(
    alpha: complex, dim: int, tols: Tolerances | None = None
) -> tuple[StateVector, StateVector]:
    """Orthonormal even/odd cat pair |alpha> +- |-alpha>, eigenvectors of a^2.

    The pair has exactly opposite parity, hence is orthogonal after
    truncation. Each vector satisfies (a^2 - alpha^2)|cat> = 0 up to the
    truncation residual on the top two levels.
    """
    tols = tols or DEFAULT_TOLS
    alpha = complex(alpha)
    if alpha == 0:
        raise DegenerateInputError("cat basis degenerates at alpha = 0 (odd cat vanishes)")
    plus = coherent_state(alpha, dim, tols).amplitudes
    minus = coherent_state(-alpha, dim, tols).amplitudes
    even = plus + minus
    odd = plus - minus
    n_even, n_odd = np.linalg.norm(even), np.linalg.norm(odd)
    if n_odd <= tols.zero_tol or n_even <= tols.zero_tol:
        raise DegenerateInputError("cat basis degenerate: a component has vanishing norm")
    even_sv = StateVector(even / n_even, tols=tols)
    odd_sv = StateVector(odd / n_odd, tols=tols)
    a2 = annihilation_op(dim).entries
    a2 = a2 @ a2
    for sv in (even_sv, odd_sv):
        resid = a2 @ sv.amplitudes - alpha**2 * sv.amplitudes
        if np.linalg.norm(resid[: dim - 2]) > 1e-6:
            raise TruncationError(
                f"cat vector fails the a^2 eigenvector residual at dim={dim}; "
                "increase the truncation"
            )
    return even_sv, odd_sv


def pure_density(psi: StateVector) -> DensityOperator:
    nrm = float(np.linalg.norm(psi.amplitudes))
    if abs(nrm - 1.0) > DEFAULT_TOLS.tail_tol:
        raise NormalizationError(f"pure_density needs a unit vector, norm was {nrm}")
    v = psi.amplitudes / nrm
    return DensityOperator(Operator(np.outer(v, v.conj())))


def random_density(dim: int, rank: int, seed: int) -> DensityOperator:
    """Wishart-style random state G G† / tr, deterministic per seed."""
    if not 1 <= rank <= dim:
        raise DimensionError(f"rank must satisfy 1 <= rank <= dim, got rank={rank}, dim={dim}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(Operator(m))


# ---------------------------------------------------------------------------
# norms, distances, expectations


def _entries(x) -> np.ndarray:
    if isinstance(x, DensityOperator):
        return x.entries
    if isinstance(x, Operator):
        return x.entries
    return np.asarray(x, dtype=complex)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt pairing tr(a† b)."""
    ma, mb = _entries(a), _entries(b)
    if ma.shape != mb.shape:
        raise DimensionError(f"shape mismatch: {ma.shape} vs {mb.shape}")
    return complex(np.vdot(ma, mb))


def trace_norm(x) -> float:
    """Sum of singular values of x."""
    m = _entries(x)
    if not np.all(np.isfinite(m)):
        raise ValueError("trace_norm requires finite entries")
    # Hermitian fast path: singular values are |eigenvalues|
    if np.max(np.abs(m - m.conj().T), initial=0.0) <= 1e-13 * max(1.0, np.max(np.abs(m), initial=0.0)):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(rho_a: DensityOperator, rho_b: DensityOperator) -> float:
    ma, mb = _entries(rho_a), _entries(rho_b)
    if ma.shape != mb.shape:
        raise DimensionError(f"dimension mismatch: {ma.shape[0]} vs {mb.shape[0]}")
    return trace_norm(ma - mb)


def expectation(x, rho) -> complex:
    """tr(x rho); real up to 1e-10 when x is Hermitian."""
    mx, mr = _entries(x), _entries(rho)
    if mx.shape != mr.shape:
        raise DimensionError(f"dimension mismatch: {mx.shape[0]} vs {mr.shape[0]}")
    return complex(np.einsum("ij,ji->", mx, mr))


def upper_bandwidth(x, rel_tol: float = 1e-12) -> int:
    """Largest col-row offset carrying a non-negligible entry.

    For a polynomial in the ladder operators this equals its degree in a;
    truncation corrupts products only on the top levels up to twice this
    bandwidth.
    """
    m = _entries(x)
    scale = float(np.max(np.abs(m), initial=0.0))
    if scale == 0.0:
        return 0
    rows, cols = np.nonzero(np.abs(m) > rel_tol * scale)
    if rows.size == 0:
        return 0
    return int(np.max(cols - rows, initial=0))
