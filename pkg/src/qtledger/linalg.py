"""Dense complex linear algebra for bipartite qubit-oscillator states.

All operators are plain complex128 numpy arrays.  Everything here is a pure
function of its inputs; nothing keeps state, so concurrent use is safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERM_TOL = 1e-9
PSD_TOL = 1e-10


class LinalgError(ValueError):
    pass


def hermiticity_defect(m: np.ndarray) -> float:
    """max_ij |M_ij - conj(M_ji)|."""
    return float(np.abs(m - m.conj().T).max())


def is_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> bool:
    return hermiticity_defect(m) < tol


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, (A x B)[(i dB + k), (j dB + l)] = A[i,j] B[k,l]."""
    return np.kron(a, b)


def partial_trace(m: np.ndarray, dim_s: int, dim_e: int, keep: str = "S") -> np.ndarray:
    """Trace out one tensor factor of an operator on a dim_s*dim_e space.

    keep="S" returns Tr_E(M), keep="E" returns Tr_S(M).  The trace of the
    result equals Tr(M).
    """
    d = dim_s * dim_e
    if m.shape != (d, d):
        raise LinalgError(
            f"operator is {m.shape}, expected {(d, d)} for dims ({dim_s}, {dim_e})"
        )
    m4 = m.reshape(dim_s, dim_e, dim_s, dim_e)
    if keep == "S":
        return np.einsum("injn->ij", m4)
    if keep == "E":
        return np.einsum("ninj->ij", m4)
    raise LinalgError(f"keep must be 'S' or 'E', got {keep!r}")


@dataclass(frozen=True)
class EigenSystem:
    """Hermitian eigendecomposition, eigenvalues ascending.

    eigenvectors[:, k] is the (orthonormal) eigenvector of eigenvalues[k].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_eig(m: np.ndarray, tol: float = HERM_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix (LAPACK ``eigh``).

    Raises LinalgError when the input is not Hermitian within ``tol``
    (relative to the largest entry).
    """
    scale = max(1.0, float(np.abs(m).max()))
    defect = hermiticity_defect(m)
    if defect > tol * scale:
        raise LinalgError(f"matrix not Hermitian: defect {defect:.3e} > tol {tol * scale:.3e}")
    w, v = np.linalg.eigh(m)
    return EigenSystem(eigenvalues=w, eigenvectors=v)


def unitary_evolution(h: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    """exp(-iHt) rho0 exp(+iHt) for static Hermitian H.

    Uses a single spectral decomposition of H; trace and spectrum of rho0
    are preserved exactly up to roundoff.
    """
    es = hermitian_eig(h)
    v = es.eigenvectors
    phases = np.exp(-1j * es.eigenvalues * t)
    u = v * phases @ v.conj().T
    return u @ rho0 @ u.conj().T


def von_neumann_entropy(rho: np.ndarray, tol: float = PSD_TOL) -> float:
    """-Tr(rho ln rho) in nats, with 0 ln 0 := 0.

    Eigenvalues in [-tol, 0) are clamped to zero (roundoff from repeated
    products); anything below -tol raises.
    """
    if not is_hermitian(rho, HERM_TOL):
        raise LinalgError("density matrix not Hermitian")
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < -tol:
        raise LinalgError(f"negative eigenvalue {lam.min():.3e} below -{tol:.1e}")
    lam = np.clip(lam, 0.0, None)
    nz = lam[lam > 0.0]
    return float(-np.sum(nz * np.log(nz)))


def entropy_from_eigenvalues(lam: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Vectorized -sum(lam ln lam) over the last axis, clamping like above."""
    lam = np.asarray(lam)
    if lam.min() < -tol:
        raise LinalgError(f"negative eigenvalue {lam.min():.3e} below -{tol:.1e}")
    lam = np.clip(lam, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(lam > 0.0, lam * np.log(np.where(lam > 0.0, lam, 1.0)), 0.0)
    return -term.sum(axis=-1)
