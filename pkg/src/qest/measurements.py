"""POVM construction and algebra.

Covers projection-valued measurements from observables, randomized
combinations (apply one branch PVM drawn at random), the 6-outcome qubit
tomography measurement, full sets of mutually unbiased bases for dimensions
2..5, and outcome distributions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import NotHermitianError, hermitian_eig, hermitize, hermiticity_defect
from .states import ID2, PAULIS

COMPLETENESS_TOL = 1e-9
POSITIVITY_TOL = 1e-10
CLUSTER_GAP = 1e-9


class BadDistributionError(ValueError):
    """Branch probabilities are negative or do not sum to one."""


class DimMismatchError(ValueError):
    """State and measurement act on different Hilbert spaces."""


class UnsupportedDimensionError(ValueError):
    """No mutually unbiased bases table for this dimension."""


class InvalidPovmError(ValueError):
    """Elements fail positivity or completeness."""


@dataclass
class Povm:
    """A labeled finite POVM.

    ops is a (n, dim, dim) complex array of PSD elements summing to the
    identity.  provenance optionally records, per element, which PVM branch
    of a randomized combination it came from and that branch's probability.
    """

    dim: int
    labels: tuple
    ops: np.ndarray
    provenance: tuple | None = None

    def __post_init__(self):
        self.ops = np.asarray(self.ops, dtype=complex)
        self.labels = tuple(str(l) for l in self.labels)
        if self.ops.ndim != 3 or self.ops.shape[1:] != (self.dim, self.dim):
            raise InvalidPovmError(f"ops shape {self.ops.shape} unusable for dim {self.dim}")
        if len(self.labels) != self.ops.shape[0]:
            raise InvalidPovmError("one label per element required")
        if self.provenance is not None:
            self.provenance = tuple((int(b), float(p)) for b, p in self.provenance)
            if len(self.provenance) != len(self.labels):
                raise InvalidPovmError("one provenance entry per element required")
        self.validate()

    def __len__(self) -> int:
        return self.ops.shape[0]

    def validate(self) -> None:
        """Check positivity and completeness of the elements."""
        total = self.ops.sum(axis=0)
        defect = float(np.max(np.abs(total - np.eye(self.dim))))
        if defect > COMPLETENESS_TOL:
            raise InvalidPovmError(f"elements sum to identity with defect {defect:.3e}")
        for idx in range(len(self)):
            op = self.ops[idx]
            if hermiticity_defect(op) > COMPLETENESS_TOL:
                raise InvalidPovmError(f"element {idx} not Hermitian")
            min_eig = float(np.linalg.eigvalsh(hermitize(op))[0])
            if min_eig < -POSITIVITY_TOL:
                raise InvalidPovmError(f"element {idx} has eigenvalue {min_eig:.3e}")

    def to_json_dict(self) -> dict:
        """Row-major complex entries as [re, im] pairs, per element."""
        elements = []
        for label, op in zip(self.labels, self.ops):
            entries = [[[float(z.real), float(z.imag)] for z in row] for row in op]
            elements.append({"label": label, "op": entries})
        doc = {"dim": self.dim, "elements": elements}
        if self.provenance is not None:
            doc["provenance"] = [[b, p] for b, p in self.provenance]
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Povm":
        ops = []
        labels = []
        for element in doc["elements"]:
            labels.append(element["label"])
            ops.append([[complex(re, im) for re, im in row] for row in element["op"]])
        provenance = doc.get("provenance")
        if provenance is not None:
            provenance = tuple((int(b), float(p)) for b, p in provenance)
        return cls(dim=int(doc["dim"]), labels=tuple(labels),
                   ops=np.array(ops, dtype=complex), provenance=provenance)


@dataclass
class MubFamily:
    """A full set of q+1 mutually unbiased orthonormal bases in dimension q.

    bases[a, i] is the i-th unit vector of basis a; any two vectors from
    different bases have squared overlap 1/q.
    """

    q: int
    bases: np.ndarray
    name: str = field(default="")

    def __post_init__(self):
        self.bases = np.asarray(self.bases, dtype=complex)
        if self.bases.shape != (self.q + 1, self.q, self.q):
            raise ValueError(f"expected bases of shape {(self.q + 1, self.q, self.q)}")
        self.validate()

    def validate(self, ortho_tol: float = 1e-10, overlap_tol: float = 1e-9) -> None:
        q = self.q
        for a in range(q + 1):
            gram = self.bases[a] @ self.bases[a].conj().T
            if float(np.max(np.abs(gram - np.eye(q)))) > ortho_tol:
                raise ValueError(f"basis {a} is not orthonormal")
        for a in range(q + 1):
            for b in range(a + 1, q + 1):
                overlaps = np.abs(self.bases[a] @ self.bases[b].conj().T) ** 2
                if float(np.max(np.abs(overlaps - 1.0 / q))) > overlap_tol:
                    raise ValueError(f"bases {a},{b} are not mutually unbiased")

    def max_overlap_defect(self) -> float:
        """Worst |overlap^2 - 1/q| across all cross-basis vector pairs."""
        worst = 0.0
        for a in range(self.q + 1):
            for b in range(a + 1, self.q + 1):
                overlaps = np.abs(self.bases[a] @ self.bases[b].conj().T) ** 2
                worst = max(worst, float(np.max(np.abs(overlaps - 1.0 / self.q))))
        return worst


def pvm_from_observable(a: np.ndarray, gap: float = CLUSTER_GAP) -> Povm:
    """PVM from the spectral decomposition of a Hermitian observable.

    Eigenvalues closer than `gap` are merged into one cluster; each cluster
    contributes the projector onto its eigenspace, labeled by the (mean)
    eigenvalue.  Downstream code must not depend on the basis chosen inside
    a degenerate cluster.
    """
    values, vectors = hermitian_eig(a)
    dim = values.shape[0]
    clusters = [[0]]
    for i in range(1, dim):
        if values[i] - values[i - 1] > gap:
            clusters.append([i])
        else:
            clusters[-1].append(i)
    ops = []
    labels = []
    for cluster in clusters:
        cols = vectors[:, cluster]
        ops.append(hermitize(cols @ cols.conj().T))
        labels.append(f"{float(np.mean(values[cluster])):+.10g}")
    return Povm(dim=dim, labels=tuple(labels), ops=np.array(ops))


def randomize(parts) -> Povm:
    """Randomized combination of POVMs: concatenate p_i-scaled elements.

    `parts` is a sequence of (probability, Povm).  Applying the result means
    drawing branch i with probability p_i and applying that POVM; provenance
    records (branch index, branch probability) per element.
    """
    parts = list(parts)
    if not parts:
        raise BadDistributionError("empty combination")
    probs = np.array([float(p) for p, _ in parts])
    if np.any(probs < 0.0):
        raise BadDistributionError("negative branch probability")
    if abs(float(probs.sum()) - 1.0) > 1e-12:
        raise BadDistributionError(f"branch probabilities sum to {probs.sum():.15f}")
    dim = parts[0][1].dim
    ops = []
    labels = []
    provenance = []
    for branch, (p, povm) in enumerate(parts):
        if povm.dim != dim:
            raise DimMismatchError("branch POVMs act on different dimensions")
        for label, op in zip(povm.labels, povm.ops):
            ops.append(float(p) * op)
            labels.append(label)
            provenance.append((branch, float(p)))
    return Povm(dim=dim, labels=tuple(labels), ops=np.array(ops),
                provenance=tuple(provenance))


def qubit_tomography_povm() -> Povm:
    """Uniform randomization of the three Pauli PVMs (6 elements).

    Outcomes are labeled "<axis><sign>" with axis in 1..3, e.g. "1+";
    at a state with Stokes vector x the outcome probabilities are
    (1 +/- x^mu) / 6.
    """
    branches = [(1.0 / 3.0, pvm_from_observable(PAULIS[mu])) for mu in range(3)]
    combined = randomize(branches)
    labels = []
    for axis in range(1, 4):
        # pvm_from_observable orders eigenvalues ascending: -1 first
        labels.extend([f"{axis}-", f"{axis}+"])
    return Povm(dim=2, labels=tuple(labels), ops=combined.ops,
                provenance=combined.provenance)


def _mub_bases_odd_prime(p: int) -> np.ndarray:
    """Standard quadratic-phase construction for odd prime dimension.

    Basis 0 is computational; basis a+1 has vectors with components
    omega^(a k^2 + b k) / sqrt(p), whose cross-basis Gauss sums have
    modulus sqrt(p).
    """
    omega = np.exp(2j * np.pi / p)
    bases = np.empty((p + 1, p, p), dtype=complex)
    bases[0] = np.eye(p)
    k = np.arange(p)
    for a in range(p):
        for b in range(p):
            bases[a + 1, b] = omega ** ((a * k * k + b * k) % p) / np.sqrt(p)
    return bases


def _mub_bases_dim4() -> np.ndarray:
    """Known table of five mutually unbiased bases in dimension 4.

    Built from the five commuting classes partitioning the two-qubit Pauli
    operators; entries lie in {1, -1, i, -i} / 2 except the computational
    basis.
    """
    i = 1j
    raw = [
        [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)],
        [(1, 1, 1, 1), (1, 1, -1, -1), (1, -1, -1, 1), (1, -1, 1, -1)],
        [(1, -1, -i, -i), (1, -1, i, i), (1, 1, i, -i), (1, 1, -i, i)],
        [(1, -i, -i, -1), (1, -i, i, 1), (1, i, i, -1), (1, i, -i, 1)],
        [(1, -i, -1, -i), (1, -i, 1, i), (1, i, 1, -i), (1, i, -1, i)],
    ]
    bases = np.array(raw, dtype=complex)
    bases[1:] /= 2.0
    return bases


def mub_bases(q: int) -> MubFamily:
    """Full set of q+1 mutually unbiased bases for q in {2, 3, 4, 5}.

    q=2 uses the Pauli eigenbases (sigma_3, sigma_1, sigma_2 order); odd
    primes use the quadratic-phase construction; q=4 is a fixed table.
    """
    if q == 2:
        s3 = np.eye(2, dtype=complex)
        s1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        s2 = np.array([[1, 1j], [1, -1j]], dtype=complex) / np.sqrt(2)
        return MubFamily(q=2, bases=np.stack([s3, s1, s2]), name="pauli")
    if q in (3, 5):
        return MubFamily(q=q, bases=_mub_bases_odd_prime(q), name=f"odd-prime-{q}")
    if q == 4:
        return MubFamily(q=4, bases=_mub_bases_dim4(), name="galois-4")
    raise UnsupportedDimensionError(f"no mutually unbiased bases table for q={q}")


def mub_tomography_povm(family: MubFamily) -> Povm:
    """Uniform randomization of the q+1 basis PVMs: q(q+1) rank-one elements.

    Element (a, i) is |e_i^(a)><e_i^(a)| / (q+1), labeled "a:i".
    """
    q = family.q
    ops = []
    labels = []
    provenance = []
    weight = 1.0 / (q + 1)
    for a in range(q + 1):
        for i in range(q):
            vec = family.bases[a, i]
            ops.append(weight * np.outer(vec, vec.conj()))
            labels.append(f"{a}:{i}")
            provenance.append((a, weight))
    return Povm(dim=q, labels=tuple(labels), ops=np.array(ops),
                provenance=tuple(provenance))


def random_povm(dim: int, n_outcomes: int, rng: np.random.Generator) -> Povm:
    """Haar-ish random POVM: Wishart elements renormalized to completeness.

    Draws A_i = G_i G_i^dagger from complex Gaussians and maps
    M_i = S^(-1/2) A_i S^(-1/2) with S the sum, which is complete by
    construction.
    """
    if n_outcomes < 1:
        raise ValueError("need at least one outcome")
    raw = []
    for _ in range(n_outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        raw.append(g @ g.conj().T)
    total = hermitize(np.sum(raw, axis=0))
    values, vectors = hermitian_eig(total)
    inv_root = (vectors / np.sqrt(values)) @ vectors.conj().T
    ops = np.array([hermitize(inv_root @ a @ inv_root) for a in raw])
    labels = tuple(str(i) for i in range(n_outcomes))
    return Povm(dim=dim, labels=labels, ops=ops)


def outcome_distribution(rho: np.ndarray, povm: Povm) -> np.ndarray:
    """Outcome probabilities p_n = Tr rho M_n, in label order.

    Rounding noise up to 1e-12 outside [0, 1] is clamped.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (povm.dim, povm.dim):
        raise DimMismatchError(f"state shape {rho.shape} vs measurement dim {povm.dim}")
    probs = np.einsum("ij,nji->n", rho, povm.ops).real
    if np.any(probs < -1e-12) or np.any(probs > 1 + 1e-12):
        raise InvalidPovmError("outcome probabilities outside [0,1] beyond rounding noise")
    probs = np.clip(probs, 0.0, 1.0)
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-10:
        raise InvalidPovmError(f"outcome probabilities sum to {total:.12f}")
    return probs
