"""Quantum state representations and the two distance metrics.

Qubit 0 is the most significant bit of the amplitude index, i.e. the state
of n qubits is the tensor product ordered qubit 0 ⊗ qubit 1 ⊗ … ⊗ qubit n-1.
All types are immutable after construction (arrays are defensively copied
and marked read-only), so everything here is safe to share across workers.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import TOL


def _frozen(a: np.ndarray, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PureState:
    """A unit vector on n qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes, complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(f"expected {2**self.num_qubits} amplitudes, got {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > TOL.state_norm:
            raise ValueError(f"state not normalized: ‖ψ‖ = {norm!r}")

    @property
    def dim(self) -> int:
        return 2**self.num_qubits


@dataclass(frozen=True)
class DensityMatrix:
    """A positive semi-definite, unit-trace matrix on n qubits."""

    num_qubits: int
    matrix: np.ndarray
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        mat = _frozen(self.matrix, complex)
        object.__setattr__(self, "matrix", mat)
        n = 2**self.num_qubits
        if mat.shape != (n, n):
            raise ValueError(f"expected {n}x{n} matrix, got {mat.shape}")
        if not self.validate:
            return
        if np.max(np.abs(mat - mat.conj().T)) > TOL.hermitian:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > TOL.trace_one:
            raise ValueError(f"trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(mat)[0]
        if lo < TOL.psd_floor:
            raise ValueError(f"not positive semi-definite: min eigenvalue {lo!r}")

    @property
    def dim(self) -> int:
        return 2**self.num_qubits


@dataclass(frozen=True)
class OutcomeDistribution:
    """Measurement outcome probabilities, indexed by outcome label."""

    labels: tuple[str, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        p = _frozen(self.probabilities, float)
        object.__setattr__(self, "probabilities", p)
        if p.shape != (len(self.labels),):
            raise ValueError("one probability per label required")
        if np.min(p) < -TOL.prob_bound or np.max(p) > 1 + TOL.prob_bound:
            raise ValueError(f"probabilities out of [0,1]: {p!r}")
        if abs(p.sum() - 1.0) > TOL.prob_sum:
            raise ValueError(f"probabilities sum to {p.sum()!r}")

    def __getitem__(self, label: str) -> float:
        return float(self.probabilities[self.labels.index(label)])


def pure_to_density(psi: PureState) -> DensityMatrix:
    """Rank-one projector |ψ⟩⟨ψ| of a pure state."""
    v = psi.amplitudes
    return DensityMatrix(psi.num_qubits, np.outer(v, v.conj()))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the trace norm of ρ - σ.

    The difference is Hermitian by construction, so the trace norm is the
    sum of absolute eigenvalues from a Hermitian eigendecomposition.
    """
    if rho.num_qubits != sigma.num_qubits:
        raise ValueError("states live on different qubit counts")
    eigs = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return 0.5 * float(np.sum(np.abs(eigs)))


def tv_distance(p: OutcomeDistribution, q: OutcomeDistribution) -> float:
    """Total variation distance: half the L1 distance between distributions."""
    if p.labels != q.labels:
        raise ValueError(f"outcome sets differ: {p.labels} vs {q.labels}")
    return 0.5 * float(np.sum(np.abs(p.probabilities - q.probabilities)))


def random_pure_state(num_qubits: int, rng_seed) -> PureState:
    """Haar-like random state: normalized i.i.d. complex Gaussian entries."""
    rng = np.random.default_rng(rng_seed)
    v = rng.standard_normal(2**num_qubits) + 1j * rng.standard_normal(2**num_qubits)
    return PureState(num_qubits, v / np.linalg.norm(v))
