"""Shared helpers for the test suite."""

import numpy as np
import pytest

from qfair import DensityMatrix, pure_to_density, random_pure_state


def random_density(num_qubits: int, rng, mixture: int = 3) -> DensityMatrix:
    """Random mixed state: convex combination of Haar-like pure states."""
    dim = 2**num_qubits
    weights = rng.dirichlet(np.ones(mixture))
    mat = np.zeros((dim, dim), dtype=complex)
    for w in weights:
        psi = random_pure_state(num_qubits, rng.integers(2**63)).amplitudes
        mat += w * np.outer(psi, psi.conj())
    return DensityMatrix(num_qubits, mat)


def random_pure_density(num_qubits: int, rng) -> DensityMatrix:
    return pure_to_density(random_pure_state(num_qubits, rng.integers(2**63)))


def batched_trace_distance(deltas: np.ndarray) -> np.ndarray:
    """½ Σ |eig| for a stack of Hermitian differences."""
    return 0.5 * np.abs(np.linalg.eigvalsh(deltas)).sum(axis=-1)


def batched_output_distance(w_stack: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """½ Σ_i |tr(W_i Δ)| for stacked differences (Heisenberg duality form)."""
    traces = np.einsum("kij,bji->bk", w_stack, deltas)
    return 0.5 * np.abs(traces.real).sum(axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
