"""Independent oracles used by the tests only.

The Bloch-grid search is the brute-force reference for the trace-norm
distance to a two-dimensional dark set; it never shares code with the
optimizer under test.
"""

import numpy as np
from scipy.linalg import qr

SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _tracenorm3(d00, d01, d02, d11, d12, d22):
    """Batched trace norm of Hermitian 3x3 matrices via the cubic formula."""
    tr = (d00 + d11 + d22).real
    shift = tr / 3.0
    e00, e11, e22 = d00.real - shift, d11.real - shift, d22.real - shift
    q01, q02, q12 = np.abs(d01) ** 2, np.abs(d02) ** 2, np.abs(d12) ** 2
    # traceless part: char poly mu^3 + p mu + q
    p = -0.5 * (e00**2 + e11**2 + e22**2 + 2.0 * (q01 + q02 + q12))
    det = (
        e00 * (e11 * e22 - q12)
        - (d01 * (np.conj(d01) * e22 - d12 * np.conj(d02))).real
        + (d02 * (np.conj(d01) * np.conj(d12) - e11 * np.conj(d02))).real
    )
    q = -det
    r = np.sqrt(np.maximum(-p / 3.0, 0.0))
    safe = r > 1e-300
    arg = np.zeros_like(r)
    arg[safe] = np.clip(1.5 * q[safe] / (p[safe] * r[safe]), -1.0, 1.0)
    theta = np.arccos(arg) / 3.0
    total = np.zeros_like(r)
    for k in range(3):
        mu = 2.0 * r * np.cos(theta - 2.0 * np.pi * k / 3.0)
        total += np.abs(mu + shift)
    return total


def bloch_grid_distance(rho: np.ndarray, w: np.ndarray, step: float = 0.01) -> float:
    """min over the Bloch-ball grid of || rho - W tau W† ||_1 for pure rho.

    rho must be (numerically) rank one so the difference lives in a
    3-dimensional subspace and the 3x3 closed form applies.
    """
    evals, evecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if np.sum(evals > 1e-10) != 1:
        raise ValueError("grid oracle needs a pure state")
    psi = evecs[:, -1:]
    basis, _ = qr(np.hstack([w, psi]), mode="economic")
    rc = basis.conj().T @ rho @ basis
    wc = basis.conj().T @ w
    m = basis.shape[1]
    if m < 3:
        rc3 = np.zeros((3, 3), dtype=complex)
        rc3[:m, :m] = rc
        rc = rc3
        wc3 = np.zeros((3, 2), dtype=complex)
        wc3[:m, :] = wc
        wc = wc3
    c0 = rc - 0.5 * (wc @ wc.conj().T)
    ax = [0.5 * (wc @ s @ wc.conj().T) for s in SIGMA]

    n = int(round(2.0 / step))
    axis = np.linspace(-1.0, 1.0, n + 1)
    xg, yg = np.meshgrid(axis, axis, indexing="ij")
    best = np.inf
    for z in axis:
        mask = xg**2 + yg**2 + z**2 <= 1.0 + 1e-12
        if not np.any(mask):
            continue
        x = xg[mask]
        y = yg[mask]
        entries = []
        for a, b in ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)):
            entries.append(c0[a, b] - x * ax[0][a, b] - y * ax[1][a, b] - z * ax[2][a, b])
        tn = _tracenorm3(*entries)
        best = min(best, float(np.min(tn)))
    return best
