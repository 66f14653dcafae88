"""Pure-numpy reference implementation of the hot kernels.

State vectors are flat complex arrays of length 2**n with qubit 0 the most
significant bit of the amplitude index.
"""

import numpy as np


def apply_1q(psi: np.ndarray, u: np.ndarray, num_qubits: int, target: int) -> np.ndarray:
    """Apply a 2x2 matrix to one qubit of a state vector."""
    post = 1 << (num_qubits - 1 - target)
    m = psi.reshape(-1, 2, post)
    return np.einsum("ab,pbq->paq", u, m).reshape(-1)


def apply_2q(psi: np.ndarray, u: np.ndarray, num_qubits: int, t1: int, t2: int) -> np.ndarray:
    """Apply a 4x4 matrix to qubits (t1, t2); t1 indexes the high gate bit."""
    t = psi.reshape((2,) * num_qubits)
    g = u.reshape(2, 2, 2, 2)
    out = np.tensordot(g, t, axes=([2, 3], [t1, t2]))
    out = np.moveaxis(out, [0, 1], [t1, t2])
    return out.reshape(-1)


def apply_kq(psi: np.ndarray, u: np.ndarray, num_qubits: int, targets: tuple[int, ...]) -> np.ndarray:
    """Apply a dense 2^k x 2^k matrix to the listed qubits."""
    k = len(targets)
    t = psi.reshape((2,) * num_qubits)
    g = u.reshape((2,) * (2 * k))
    out = np.tensordot(g, t, axes=(list(range(k, 2 * k)), list(targets)))
    out = np.moveaxis(out, list(range(k)), list(targets))
    return out.reshape(-1)


def mpo_step(t3: np.ndarray, wmat: np.ndarray) -> np.ndarray:
    """One site of the operator-times-vector sweep.

    t3 has shape (P, K, Q) and wmat (R, K); returns (P, R, Q).  This is the
    whole contraction: a batched matmul over the leading P axis.
    """
    return np.matmul(wmat, t3)
