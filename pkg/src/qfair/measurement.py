"""POVMs: measurement effects summing to identity.

Only the effects are kept; nothing downstream needs post-measurement
states.  Outcome labels are strings, "0"/"1" for the binary measurements
used by the built-in models.

The last-qubit measurement is stored structurally (one 2x2 effect per
outcome on the last qubit) so models far beyond dense-matrix sizes can be
built; its full N x N effects are materialized on demand and only at sizes
where that is sane.
"""

import numpy as np

from .config import TOL
from .qstate import DensityMatrix

DENSE_EFFECT_QUBIT_CAP = 13


class Povm:
    """Map from outcome label to a Hermitian PSD effect matrix."""

    def __init__(self, num_qubits: int, effects: dict | None = None, *,
                 local_effects: dict | None = None):
        if (effects is None) == (local_effects is None):
            raise ValueError("provide exactly one of effects / local_effects")
        self.num_qubits = int(num_qubits)
        self._dense: dict | None = None
        self.local_effects: dict | None = None

        if local_effects is not None:
            fixed = {}
            total = np.zeros((2, 2), dtype=complex)
            for label, m in local_effects.items():
                m = np.array(m, dtype=complex)
                m.setflags(write=False)
                if m.shape != (2, 2):
                    raise ValueError("local effects act on the last qubit only")
                if np.max(np.abs(m - m.conj().T)) > TOL.hermitian:
                    raise ValueError(f"effect {label!r} is not Hermitian")
                if np.linalg.eigvalsh(m)[0] < TOL.psd_floor:
                    raise ValueError(f"effect {label!r} is not positive semi-definite")
                fixed[str(label)] = m
                total = total + m
            if np.max(np.abs(total - np.eye(2))) > TOL.povm_sum:
                raise ValueError("effects do not sum to the identity")
            self.local_effects = fixed
        else:
            self._dense = self._validate_dense(effects)

    def _validate_dense(self, effects: dict) -> dict:
        fixed = {}
        n = self.dim
        for label, m in effects.items():
            m = np.array(m, dtype=complex)
            m.setflags(write=False)
            if m.shape != (n, n):
                raise ValueError(f"effect {label!r} has shape {m.shape}, expected {(n, n)}")
            if np.max(np.abs(m - m.conj().T)) > TOL.hermitian:
                raise ValueError(f"effect {label!r} is not Hermitian")
            if np.linalg.eigvalsh(m)[0] < TOL.psd_floor:
                raise ValueError(f"effect {label!r} is not positive semi-definite")
            fixed[str(label)] = m
        if not fixed:
            raise ValueError("POVM needs at least one effect")
        total = sum(fixed.values())
        if np.max(np.abs(total - np.eye(n))) > TOL.povm_sum:
            raise ValueError("effects do not sum to the identity")
        return fixed

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    @property
    def labels(self) -> tuple[str, ...]:
        if self.local_effects is not None:
            return tuple(self.local_effects.keys())
        return tuple(self._dense.keys())

    @property
    def is_last_qubit_local(self) -> bool:
        return self.local_effects is not None

    @property
    def effects(self) -> dict:
        """Full effect matrices; materialized lazily for local POVMs."""
        if self._dense is None:
            if self.num_qubits > DENSE_EFFECT_QUBIT_CAP:
                raise ValueError(
                    f"refusing to materialize {self.dim}x{self.dim} effects; "
                    "use local_effects"
                )
            eye = np.eye(2 ** (self.num_qubits - 1))
            dense = {lab: np.kron(eye, m) for lab, m in self.local_effects.items()}
            for m in dense.values():
                m.setflags(write=False)
            self._dense = dense
        return self._dense

    def outcome_probabilities(self, rho: DensityMatrix) -> np.ndarray:
        if self.local_effects is not None:
            half = rho.dim // 2
            r4 = rho.matrix.reshape(half, 2, half, 2)
            reduced = np.einsum("xaxb->ab", r4)  # partial trace onto last qubit
            return np.array(
                [np.einsum("ab,ba->", m, reduced).real for m in self.local_effects.values()]
            )
        return np.array(
            [np.einsum("ij,ji->", m, rho.matrix).real for m in self._dense.values()]
        )

    def __eq__(self, other):
        if not isinstance(other, Povm):
            return NotImplemented
        if self.num_qubits != other.num_qubits or self.labels != other.labels:
            return False
        if self.is_last_qubit_local and other.is_last_qubit_local:
            return all(
                np.array_equal(self.local_effects[k], other.local_effects[k])
                for k in self.labels
            )
        return all(np.array_equal(self.effects[k], other.effects[k]) for k in self.labels)


def last_qubit_projective(num_qubits: int) -> Povm:
    """The binary measurement I ⊗ |b⟩⟨b| on the last qubit."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    return Povm(
        num_qubits,
        local_effects={
            "0": np.diag([1.0, 0.0]).astype(complex),
            "1": np.diag([0.0, 1.0]).astype(complex),
        },
    )


def from_measurement_ops(ops, labels=None) -> Povm:
    """Effects M†M from raw measurement operators, checking completeness."""
    mats = [np.asarray(m, dtype=complex) for m in ops]
    if not mats:
        raise ValueError("at least one measurement operator required")
    dim = mats[0].shape[0]
    num_qubits = int(np.log2(dim))
    if 2**num_qubits != dim:
        raise ValueError(f"operator dimension {dim} is not a power of two")
    acc = sum(m.conj().T @ m for m in mats)
    err = np.max(np.abs(acc - np.eye(dim)))
    if err > TOL.measurement_ops:
        raise ValueError(f"measurement operators violate completeness by {err:.2e}")
    if labels is None:
        labels = [str(i) for i in range(len(mats))]
    effects = {str(lab): m.conj().T @ m for lab, m in zip(labels, mats)}
    return Povm(num_qubits, effects)
