"""Small dense Hermitian matrix algebra: eigendecompositions, PSD square
roots, and the symmetric-logarithmic-derivative (Lyapunov-type) solver.

Everything here operates on matrices of dimension <= 16, so correctness and
determinism matter far more than asymptotics.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-10
PSD_EIG_TOL = 1e-10
SINGULAR_STATE_TOL = 1e-12


class NotHermitianError(ValueError):
    """Input expected to be Hermitian is not, beyond tolerance."""


class NotPSDError(ValueError):
    """Input expected positive semidefinite has an eigenvalue below -1e-10."""


class SingularStateError(ValueError):
    """Density matrix is too close to singular for the SLD to be defined."""


class NoConvergenceError(RuntimeError):
    """Eigenvalue iteration failed to converge."""


class HermitianEig(NamedTuple):
    """Spectral decomposition a = vectors @ diag(values) @ vectors^dagger."""

    values: np.ndarray   # real, ascending
    vectors: np.ndarray  # unitary, columns are eigenvectors


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (a + a^dagger) / 2."""
    a = np.asarray(a)
    return (a + a.conj().T) / 2


def hermiticity_defect(a: np.ndarray) -> float:
    """Max entrywise |a - a^dagger|."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def hermitian_eig(a: np.ndarray, tol: float = HERMITIAN_TOL) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized before decomposition to strip accumulation
    noise from repeated products; inputs whose anti-Hermitian part exceeds
    `tol` are rejected.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitianError(f"anti-Hermitian part {defect:.3e} exceeds {tol:.1e}")
    try:
        values, vectors = np.linalg.eigh(hermitize(a))
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    return HermitianEig(values, vectors)


def psd_sqrt(a: np.ndarray, tol: float = PSD_EIG_TOL) -> np.ndarray:
    """Positive-semidefinite square root of a PSD Hermitian matrix.

    Eigenvalues in [-tol, 0) are clamped to zero; anything lower raises
    NotPSDError.  The result is Hermitian and commutes with the input.
    """
    values, vectors = hermitian_eig(a)
    if values[0] < -tol:
        raise NotPSDError(f"minimum eigenvalue {values[0]:.3e} below -{tol:.1e}")
    root = np.sqrt(np.clip(values, 0.0, None))
    out = (vectors * root) @ vectors.conj().T
    if np.isrealobj(np.asarray(a)):
        return hermitize(out).real
    return hermitize(out)


def solve_sld(rho: np.ndarray, drho: np.ndarray,
              tol: float = SINGULAR_STATE_TOL) -> np.ndarray:
    """Solve (L rho + rho L) / 2 = drho for Hermitian L.

    Works in the eigenbasis of rho, where L_jk = 2 drho_jk / (lam_j + lam_k).
    Requires rho strictly positive (min eigenvalue > tol) and drho Hermitian
    traceless.
    """
    values, vectors = hermitian_eig(rho)
    if values[0] <= tol:
        raise SingularStateError(f"state eigenvalue {values[0]:.3e} <= {tol:.1e}")
    if hermiticity_defect(drho) > HERMITIAN_TOL:
        raise NotHermitianError("drho is not Hermitian")
    tr = complex(np.trace(drho))
    if abs(tr) > HERMITIAN_TOL:
        raise ValueError(f"drho has trace {tr:.3e}, expected traceless")
    d_in_basis = vectors.conj().T @ np.asarray(drho, dtype=complex) @ vectors
    denom = values[:, None] + values[None, :]
    sld = hermitize(vectors @ (2 * d_in_basis / denom) @ vectors.conj().T)
    return sld


def sld_residual(rho: np.ndarray, drho: np.ndarray, sld: np.ndarray) -> float:
    """Max entrywise defect of the SLD equation for a candidate L."""
    lhs = (sld @ rho + rho @ sld) / 2
    return float(np.max(np.abs(lhs - drho)))
