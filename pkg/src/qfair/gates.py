"""Gate matrices.

Conventions:
  * rotations are exp(-i θ P / 2) for a Pauli (string) P,
  * two-qubit matrices are written in the basis |b_t1 b_t2⟩ where t1 is the
    first listed target, i.e. the first target is the most significant bit
    of the 4-dimensional gate index,
  * crx places the control on the first target.
"""

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def _two_pauli_rotation(theta: float, pauli: np.ndarray) -> np.ndarray:
    pp = np.kron(pauli, pauli)
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * pp


def rxx(theta: float) -> np.ndarray:
    return _two_pauli_rotation(theta, X)


def ryy(theta: float) -> np.ndarray:
    return _two_pauli_rotation(theta, Y)


def rzz(theta: float) -> np.ndarray:
    return _two_pauli_rotation(theta, Z)


def crx(theta: float) -> np.ndarray:
    """Controlled X-rotation, control on the first target."""
    u = np.eye(4, dtype=complex)
    u[2:, 2:] = rx(theta)
    return u


# name -> (constructor, number of qubits, number of parameters)
GATES = {
    "x": (lambda: X, 1, 0),
    "y": (lambda: Y, 1, 0),
    "z": (lambda: Z, 1, 0),
    "h": (lambda: H, 1, 0),
    "rx": (rx, 1, 1),
    "ry": (ry, 1, 1),
    "rz": (rz, 1, 1),
    "rxx": (rxx, 2, 1),
    "ryy": (ryy, 2, 1),
    "rzz": (rzz, 2, 1),
    "crx": (crx, 2, 1),
}


def gate_matrix(name: str, params: tuple[float, ...] = ()) -> np.ndarray:
    """Look up a named gate and build its unitary matrix."""
    if name not in GATES:
        raise ValueError(f"unknown gate {name!r}; known: {sorted(GATES)}")
    ctor, _, nparams = GATES[name]
    if len(params) != nparams:
        raise ValueError(f"gate {name!r} takes {nparams} parameter(s), got {len(params)}")
    return np.asarray(ctor(*params), dtype=complex)
