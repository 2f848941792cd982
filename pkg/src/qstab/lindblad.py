"""Lindblad generators in both pictures and their vectorized matrix form.

Schrodinger picture (states):
    Lstar(rho) = -i[H, rho] + sum_k ( L_k rho L_k† - 1/2 {L_k† L_k, rho} )
Heisenberg picture (observables):
    G(X) = -i[X, H] + sum_k ( 1/2 L_k† [X, L_k] + 1/2 [L_k†, X] L_k )

Vectorization is column-stacking throughout: vec(A X B) = (B^T kron A) vec(X).
The two matrices are Hilbert-Schmidt adjoints of each other.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .config import DEFAULT_TOLS, Tolerances
from .hilbert import DensityOperator, DimensionError, NormalizationError, Operator, _entries

__all__ = [
    "SystemModel",
    "Superoperator",
    "vec",
    "unvec",
    "schrodinger_generator",
    "heisenberg_generator",
    "liouvillian_matrix",
]

VEC_CONVENTION = "column-stacking"


@dataclass(frozen=True, eq=False)
class SystemModel:
    """The (S=1, L, H) triple on one truncated Fock space.

    The scattering matrix is fixed to the identity and carries no field.
    ``couplings`` may hold any number of channels; the generators sum them.
    """

    hamiltonian: Operator
    couplings: tuple[Operator, ...]
    label: str = ""
    tols: InitVar[Tolerances | None] = None

    def __post_init__(self, tols):
        tols = tols or DEFAULT_TOLS
        object.__setattr__(self, "couplings", tuple(self.couplings))
        if not self.hamiltonian.is_hermitian(tols.herm_tol):
            raise NormalizationError("hamiltonian is not Hermitian within herm_tol")
        for L in self.couplings:
            if L.dim != self.hamiltonian.dim:
                raise DimensionError(
                    f"coupling dim {L.dim} differs from hamiltonian dim {self.hamiltonian.dim}"
                )

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim


@dataclass(frozen=True, eq=False)
class Superoperator:
    """dim^2 x dim^2 matrix acting on column-stacked operators."""

    matrix: np.ndarray
    dim: int
    convention: str = VEC_CONVENTION

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.dim**2, self.dim**2):
            raise DimensionError(
                f"superoperator must be {self.dim**2}x{self.dim**2}, got {m.shape}"
            )
        if self.convention != VEC_CONVENTION:
            raise ValueError(f"unsupported vectorization convention {self.convention!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, x) -> Operator:
        return Operator(unvec(self.matrix @ vec(x), self.dim))


def vec(x) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return _entries(x).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


def _check_dims(model: SystemModel, x) -> np.ndarray:
    m = _entries(x)
    if m.shape != (model.dim, model.dim):
        raise DimensionError(f"operand dim {m.shape} does not match model dim {model.dim}")
    return m


def _precomputed(model: SystemModel):
    H = model.hamiltonian.entries
    Ls = [L.entries for L in model.couplings]
    Lds = [L.conj().T for L in Ls]
    LdLs = [Ld @ L for Ld, L in zip(Lds, Ls)]
    return H, Ls, Lds, LdLs


def schrodinger_generator(model: SystemModel, rho) -> Operator:
    """Master-equation right-hand side Lstar(rho).

    Traceless for every input; maps Hermitian inputs to Hermitian outputs.
    Accepts a DensityOperator or any Operator (linearity is used by the
    kernel computation in :mod:`qstab.steady`).
    """
    r = _check_dims(model, rho)
    H, Ls, Lds, LdLs = _precomputed(model)
    out = -1j * (H @ r - r @ H)
    for L, Ld, LdL in zip(Ls, Lds, LdLs):
        out += L @ r @ Ld - 0.5 * (LdL @ r + r @ LdL)
    return Operator(out)


def heisenberg_generator(model: SystemModel, x) -> Operator:
    """Adjoint generator G(X); unital (G(1) = 0) and Hermiticity-preserving."""
    X = _check_dims(model, x)
    H, Ls, Lds, LdLs = _precomputed(model)
    out = -1j * (X @ H - H @ X)
    for L, Ld, LdL in zip(Ls, Lds, LdLs):
        out += Ld @ X @ L - 0.5 * (LdL @ X + X @ LdL)
    return Operator(out)


def _rhs_closure(model: SystemModel):
    """Fast Lstar(.) on raw ndarrays for the integrator hot loop."""
    H, Ls, Lds, LdLs = _precomputed(model)

    def rhs(r: np.ndarray) -> np.ndarray:
        out = -1j * (H @ r - r @ H)
        for L, Ld, LdL in zip(Ls, Lds, LdLs):
            out += L @ r @ Ld - 0.5 * (LdL @ r + r @ LdL)
        return out

    return rhs


def liouvillian_matrix(model: SystemModel, picture: str = "schrodinger") -> Superoperator:
    """Matrix M with M vec(X) = vec(Lstar(X)) or vec(G(X)).

    The schrodinger and heisenberg matrices are mutual Hilbert-Schmidt
    adjoints (conjugate transposes). Construction is spot-checked against
    the direct generator on one seeded random density.
    """
    d = model.dim
    I = np.eye(d, dtype=complex)
    H, Ls, Lds, LdLs = _precomputed(model)
    if picture == "schrodinger":
        M = -1j * (np.kron(I, H) - np.kron(H.T, I))
        for L, LdL in zip(Ls, LdLs):
            M += np.kron(L.conj(), L) - 0.5 * (np.kron(I, LdL) + np.kron(LdL.T, I))
        direct = schrodinger_generator
    elif picture == "heisenberg":
        M = -1j * (np.kron(H.T, I) - np.kron(I, H))
        for L, Ld, LdL in zip(Ls, Lds, LdLs):
            M += np.kron(L.T, Ld) - 0.5 * (np.kron(I, LdL) + np.kron(LdL.T, I))
        direct = heisenberg_generator
    else:
        raise ValueError(f"unknown picture {picture!r}")

    rng = np.random.default_rng(7)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    probe = g @ g.conj().T
    probe /= np.trace(probe).real
    resid = np.max(np.abs(unvec(M @ vec(probe), d) - direct(model, probe).entries))
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    if resid > 1e-12 * scale:
        raise AssertionError(
            f"superoperator spot-check failed: residual {resid:.3e} at scale {scale:.3e}"
        )
    return Superoperator(M, d)
