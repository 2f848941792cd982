"""Central tolerance defaults, one knob surface for the whole package."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerance defaults used by constructors and validators.

    herm_tol   : max entrywise |X - X†| accepted as Hermitian
    trace_tol  : allowed |tr(rho) - 1| for density operators
    psd_tol    : allowed negative eigenvalue magnitude for density operators
    tail_tol   : allowed truncated tail mass / norm defect for state vectors
    zero_tol   : generic magnitude below which an entry counts as zero
    """

    herm_tol: float = 1e-10
    trace_tol: float = 1e-9
    psd_tol: float = 1e-9
    tail_tol: float = 1e-9
    zero_tol: float = 1e-12

    def with_(self, **kwargs) -> "Tolerances":
        return replace(self, **kwargs)


DEFAULT_TOLS = Tolerances()
