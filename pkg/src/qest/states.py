"""Parametric state models: the qubit Stokes-vector model with closed-form
SLDs and Fisher information, the affine model attached to a full set of
mutually unbiased bases in dimension >= 3, and the Bures distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import hermitize, psd_sqrt, solve_sld

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_1, SIGMA_2, SIGMA_3)
ID2 = np.eye(2, dtype=complex)


class OutOfBallError(ValueError):
    """Stokes vector lies on or outside the unit sphere."""


class NotPositiveError(ValueError):
    """Affine coordinates produce a non-positive matrix."""


class NotStateError(ValueError):
    """Matrix is not a density matrix (PSD, unit trace)."""


@dataclass(frozen=True)
class ModelDerivatives:
    """A state together with its parameter derivatives and SLDs.

    `partials[i]` is the Hermitian traceless matrix d rho / d theta^i and
    `slds[i]` the corresponding symmetric logarithmic derivative.
    """

    rho: np.ndarray
    partials: tuple
    slds: tuple

    @property
    def n_params(self) -> int:
        return len(self.partials)


def _check_ball(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError(f"expected a 3-vector of Stokes parameters, got shape {x.shape}")
    if float(x @ x) >= 1.0:
        raise OutOfBallError(f"|x| = {np.linalg.norm(x):.6f} >= 1")
    return x


def qubit_state(x) -> np.ndarray:
    """Density matrix (I + x . sigma) / 2 for a Stokes vector inside the ball."""
    x = _check_ball(x)
    rho = ID2.copy()
    for mu in range(3):
        rho += x[mu] * PAULIS[mu]
    return rho / 2


def qubit_slds(x) -> ModelDerivatives:
    """Closed-form SLDs of the qubit model.

    L_mu = sigma_mu - x^mu (I - tau) / (2 det tau), with partials sigma_mu / 2.
    """
    x = _check_ball(x)
    tau = qubit_state(x)
    det = float((1.0 - x @ x) / 4.0)
    correction = (ID2 - tau) / (2.0 * det)
    slds = tuple(PAULIS[mu] - x[mu] * correction for mu in range(3))
    partials = tuple(s / 2 for s in PAULIS)
    return ModelDerivatives(rho=tau, partials=partials, slds=slds)


def qubit_qfi(x) -> np.ndarray:
    """SLD Fisher information of the qubit model: I + |x><x| / (1 - r^2).

    Its inverse is I - |x><x| exactly.
    """
    x = _check_ball(x)
    r2 = float(x @ x)
    return np.eye(3) + np.outer(x, x) / (1.0 - r2)


def mub_state(coords, bases) -> np.ndarray:
    """Affine state I/q + sum_{a,i} x_{a,i} (|e_i^(a)><e_i^(a)| - I/q).

    `coords` has shape (q+1, q-1): one coordinate per basis `a` and per
    basis vector i = 0..q-2 (the last vector of each basis carries no
    coordinate).  Positivity of the result is checked numerically.
    """
    q = bases.q
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (q + 1, q - 1):
        raise ValueError(f"expected coords of shape {(q + 1, q - 1)}, got {coords.shape}")
    rho = np.eye(q, dtype=complex) / q
    offset = np.eye(q, dtype=complex) / q
    for a in range(q + 1):
        for i in range(q - 1):
            if coords[a, i] == 0.0:
                continue
            vec = bases.bases[a, i]
            rho += coords[a, i] * (np.outer(vec, vec.conj()) - offset)
    rho = hermitize(rho)
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    if min_eig <= 0.0:
        raise NotPositiveError(f"minimum eigenvalue {min_eig:.3e} <= 0")
    return rho


def mub_partials(bases) -> tuple:
    """Parameter derivatives of the affine model: |e_i^(a)><e_i^(a)| - I/q.

    Ordered row-major over (basis a, vector i), matching the coords layout.
    """
    q = bases.q
    offset = np.eye(q, dtype=complex) / q
    out = []
    for a in range(q + 1):
        for i in range(q - 1):
            vec = bases.bases[a, i]
            out.append(np.outer(vec, vec.conj()) - offset)
    return tuple(out)


def mub_derivatives(coords, bases) -> ModelDerivatives:
    """State, partials and numerically solved SLDs of the affine model."""
    rho = mub_state(coords, bases)
    partials = mub_partials(bases)
    slds = tuple(solve_sld(rho, dp) for dp in partials)
    return ModelDerivatives(rho=rho, partials=partials, slds=slds)


def model_qfi(derivs: ModelDerivatives) -> np.ndarray:
    """Fisher information J_ij = Tr(d_i rho L_j), symmetrized."""
    d = derivs.n_params
    j = np.empty((d, d))
    for a in range(d):
        for b in range(d):
            j[a, b] = float(np.trace(derivs.partials[a] @ derivs.slds[b]).real)
    return (j + j.T) / 2


def _check_state(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if abs(complex(np.trace(rho)) - 1.0) > tol:
        raise NotStateError(f"trace {complex(np.trace(rho)):.6f} != 1")
    min_eig = float(np.linalg.eigvalsh(hermitize(rho))[0])
    if min_eig < -tol:
        raise NotStateError(f"minimum eigenvalue {min_eig:.3e} < 0")
    return hermitize(rho)


def bures_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Bures distance 4 (1 - Tr sqrt(sqrt(rho) sigma sqrt(rho))).

    Note the convention: this is 4(1 - root fidelity), not a squared
    distance.  For nearby states it expands as (1/2) dx^T J dx.
    """
    rho = _check_state(rho)
    sigma = _check_state(sigma)
    root = psd_sqrt(rho)
    inner = hermitize(root @ sigma @ root)
    eigs = np.linalg.eigvalsh(inner)
    # rounding can push tiny eigenvalues slightly negative
    eigs = np.clip(eigs, 0.0, None)
    fidelity_root = float(np.sum(np.sqrt(eigs)))
    return 4.0 * (1.0 - fidelity_root)
