"""Super-operators as layered local Kraus families.

A circuit is an ordered list of local operations (1- or 2-qubit unitaries,
named single-qubit noises, raw Kraus families, or the structural global
depolarizing channel).  This module is the exact dense reference backend:
`apply` evolves full density matrices, `adjoint_apply` evolves measurement
effects through the conjugate map E†, with layers in reversed order.

Local operations are contracted into the full matrix tensor-wise instead of
materializing N x N Kraus factors per layer; `embed` still exposes the dense
embedding for raw multi-qubit use and for tests.
"""

from dataclasses import dataclass, field

import numpy as np

from . import gates, kernels
from .config import TOL
from .qstate import DensityMatrix

NOISE_NAMES = ("bit-flip", "phase-flip", "bit-phase-flip", "depolarizing", "mixed")
GLOBAL_DEPOLARIZING = "global-depolarizing"


def noise_kraus(name: str, p: float) -> list[np.ndarray]:
    """Single-qubit Kraus family for a named noise at probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise probability must be in [0,1], got {p}")
    flip = {"bit-flip": gates.X, "phase-flip": gates.Z, "bit-phase-flip": gates.Y}
    if name in flip:
        return [np.sqrt(1 - p) * gates.I2, np.sqrt(p) * flip[name]]
    if name == "depolarizing":
        return [
            np.sqrt(1 - 3 * p / 4) * gates.I2,
            np.sqrt(p / 4) * gates.X,
            np.sqrt(p / 4) * gates.Y,
            np.sqrt(p / 4) * gates.Z,
        ]
    if name == "mixed":
        # Equal-weight composition: bit flip, then phase flip, then
        # depolarizing, each at probability p.  This order is declared in
        # model metadata because it is a convention, not a given.
        bit = noise_kraus("bit-flip", p)
        phase = noise_kraus("phase-flip", p)
        depol = noise_kraus("depolarizing", p)
        return [d @ f @ b for d in depol for f in phase for b in bit]
    raise ValueError(f"unknown noise {name!r}; known: {NOISE_NAMES}")


@dataclass(frozen=True)
class KrausChannel:
    """A trace-preserving family of Kraus matrices on a fixed qubit count."""

    num_qubits: int
    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValueError("at least one Kraus operator required")
        n = 2**self.num_qubits
        for k in ops:
            k.setflags(write=False)
            if k.shape != (n, n):
                raise ValueError(f"Kraus operator has shape {k.shape}, expected {(n, n)}")
        object.__setattr__(self, "kraus_ops", ops)
        acc = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(acc - np.eye(n))) > TOL.kraus_completeness:
            raise ValueError("Kraus family is not trace preserving")


def noise_channel(name: str, p: float) -> KrausChannel:
    """Named single-qubit noise as a 1-qubit KrausChannel."""
    return KrausChannel(1, tuple(noise_kraus(name, p)))


@dataclass(frozen=True)
class LocalOp:
    """One circuit layer acting non-trivially on at most two qubits.

    kinds:
      * "gate"       — named unitary, `name` + `params`
      * "noise"      — named 1-qubit noise (`name`, `p`), or the structural
                       global depolarizing channel with empty targets
      * "raw_kraus"  — explicit Kraus matrices on 1 or 2 targets (a single
                       unitary matrix passes the completeness check, which is
                       how raw gates from files are represented)
    """

    kind: str
    targets: tuple[int, ...]
    name: str = ""
    params: tuple[float, ...] = ()
    p: float = 0.0
    matrices: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "params", tuple(float(x) for x in self.params))
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("duplicate target qubits")
        if self.kind == "gate":
            if len(self.targets) not in (1, 2):
                raise ValueError("gates act on 1 or 2 qubits")
            u = gates.gate_matrix(self.name, self.params)
            if u.shape[0] != 2 ** len(self.targets):
                raise ValueError(f"gate {self.name!r} arity mismatch with targets")
            if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > TOL.unitary:
                raise ValueError(f"gate {self.name!r} is not unitary")
        elif self.kind == "noise":
            if not 0.0 <= self.p <= 1.0:
                raise ValueError(f"noise probability must be in [0,1], got {self.p}")
            if self.name == GLOBAL_DEPOLARIZING:
                if self.targets:
                    raise ValueError("global depolarizing takes no targets")
            elif self.name in NOISE_NAMES:
                if len(self.targets) != 1:
                    raise ValueError("named noises act on exactly 1 qubit")
            else:
                raise ValueError(f"unknown noise {self.name!r}")
        elif self.kind == "raw_kraus":
            if len(self.targets) not in (1, 2):
                raise ValueError("raw Kraus ops act on 1 or 2 qubits")
            mats = tuple(np.array(m, dtype=complex) for m in self.matrices)
            if not mats:
                raise ValueError("raw_kraus requires at least one matrix")
            d = 2 ** len(self.targets)
            for m in mats:
                m.setflags(write=False)
                if m.shape != (d, d):
                    raise ValueError(f"raw Kraus matrix shape {m.shape}, expected {(d, d)}")
            acc = sum(m.conj().T @ m for m in mats)
            if np.max(np.abs(acc - np.eye(d))) > TOL.kraus_completeness:
                raise ValueError("raw Kraus family is not trace preserving")
            object.__setattr__(self, "matrices", mats)
        else:
            raise ValueError(f"unknown op kind {self.kind!r}")

    @property
    def is_unitary(self) -> bool:
        return self.kind == "gate" or (
            self.kind == "raw_kraus" and len(self.matrices) == 1
        )

    def local_kraus(self) -> list[np.ndarray]:
        """Kraus matrices on the target qubits only."""
        if self.kind == "gate":
            return [gates.gate_matrix(self.name, self.params)]
        if self.kind == "raw_kraus":
            return list(self.matrices)
        if self.name == GLOBAL_DEPOLARIZING:
            raise ValueError("global depolarizing has no local Kraus form")
        return noise_kraus(self.name, self.p)


@dataclass(frozen=True)
class CircuitChannel:
    """An ordered sequence of local operations on n qubits."""

    num_qubits: int
    layers: tuple[LocalOp, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        for op in self.layers:
            for t in op.targets:
                if not 0 <= t < self.num_qubits:
                    raise ValueError(f"target {t} out of range for {self.num_qubits} qubits")

    @property
    def dim(self) -> int:
        return 2**self.num_qubits


# -- local contraction helpers -------------------------------------------
#
# A density matrix (or effect) on n qubits is, as a flat array, a state
# vector on 2n qubits: row legs sit at axes 0..n-1, column legs at n..2n-1.
# Local maps therefore run on the same hot state-vector kernels as the
# tensor-network backend.

def _apply_local(flat: np.ndarray, w: np.ndarray, total: int, targets: tuple[int, ...]):
    if len(targets) == 1:
        return kernels.apply_1q(flat, w, total, targets[0])
    if len(targets) == 2:
        return kernels.apply_2q(flat, w, total, targets[0], targets[1])
    return kernels.apply_kq(flat, w, total, targets)


def _sandwich(mat: np.ndarray, k_op: np.ndarray, n: int, targets: tuple[int, ...],
              heisenberg: bool) -> np.ndarray:
    """K ρ K† on the targets (Schrödinger) or K† M K (Heisenberg)."""
    if heisenberg:
        w_row, w_col = k_op.conj().T, k_op.T
    else:
        w_row, w_col = k_op, k_op.conj()
    flat = np.ascontiguousarray(mat, dtype=complex).reshape(-1)
    flat = _apply_local(flat, w_row, 2 * n, targets)
    flat = _apply_local(flat, w_col, 2 * n, tuple(n + t for t in targets))
    return flat.reshape(mat.shape)


def fuse_unitary_runs(steps):
    """Peephole-merge consecutive (matrix, targets) unitaries.

    Same-target steps multiply directly; a 1-qubit step is absorbed into a
    neighbouring 2-qubit step on a shared wire.  Exact, order preserving.
    """
    eye = np.eye(2)
    fused: list[list] = []
    for u, targets in steps:
        targets = tuple(targets)
        if fused:
            pu, pt = fused[-1]
            if pt == targets:
                fused[-1][0] = u @ pu
                continue
            if len(targets) == 1 and len(pt) == 2 and targets[0] in pt:
                big = np.kron(u, eye) if targets[0] == pt[0] else np.kron(eye, u)
                fused[-1][0] = big @ pu
                continue
            if len(targets) == 2 and len(pt) == 1 and pt[0] in targets:
                big = np.kron(pu, eye) if pt[0] == targets[0] else np.kron(eye, pu)
                fused[-1] = [u @ big, targets]
                continue
        fused.append([u, targets])
    return [(np.ascontiguousarray(u), t) for u, t in fused]


def compile_layers(layers):
    """Collapse a layer list into fused steps for the dense walkers.

    Returns a list of ("u", w, targets) | ("kraus", mats, targets) |
    ("gdep", p) entries, with consecutive unitaries fused.
    """
    compiled = []
    pending: list = []

    def flush():
        nonlocal pending
        if pending:
            compiled.extend(("u", w, t) for w, t in fuse_unitary_runs(pending))
            pending = []

    for op in layers:
        if op.kind == "noise" and op.name == GLOBAL_DEPOLARIZING:
            flush()
            compiled.append(("gdep", op.p, ()))
        elif op.is_unitary:
            pending.append((op.local_kraus()[0], op.targets))
        else:
            flush()
            compiled.append(("kraus", op.local_kraus(), op.targets))
    flush()
    return compiled


def _apply_step(mat: np.ndarray, step, n: int, heisenberg: bool) -> np.ndarray:
    kind, payload, targets = step
    if kind == "gdep":
        # E(ρ) = (1-p) ρ + p tr(ρ) I/N; the map is self-adjoint.
        dim = mat.shape[0]
        return (1 - payload) * mat + (payload * np.trace(mat) / dim) * np.eye(dim)
    if kind == "u":
        return _sandwich(mat, payload, n, targets, heisenberg)
    acc = np.zeros_like(mat)
    for k in payload:
        acc += _sandwich(mat, k, n, targets, heisenberg)
    return acc


def apply(channel: CircuitChannel, rho: DensityMatrix) -> DensityMatrix:
    """Evolve a density matrix through the circuit, layers in order."""
    if rho.num_qubits != channel.num_qubits:
        raise ValueError("state and channel qubit counts differ")
    mat = np.array(rho.matrix)
    for step in compile_layers(channel.layers):
        mat = _apply_step(mat, step, channel.num_qubits, heisenberg=False)
    return DensityMatrix(channel.num_qubits, mat, validate=False)


def adjoint_apply(channel: CircuitChannel, effect: np.ndarray) -> np.ndarray:
    """Heisenberg-evolve an effect through E†, layers in reversed order."""
    effect = np.asarray(effect, dtype=complex)
    if effect.shape != (channel.dim, channel.dim):
        raise ValueError(f"effect shape {effect.shape} does not match {channel.dim}")
    if np.max(np.abs(effect - effect.conj().T)) > TOL.kraus_completeness:
        raise ValueError("effect must be Hermitian")
    mat = np.array(effect)
    for step in reversed(compile_layers(channel.layers)):
        mat = _apply_step(mat, step, channel.num_qubits, heisenberg=True)
    return mat


def embed(op: LocalOp, num_qubits: int) -> KrausChannel:
    """Dense embedding: each local Kraus matrix tensored with identity."""
    for t in op.targets:
        if not 0 <= t < num_qubits:
            raise ValueError(f"target {t} out of range for {num_qubits} qubits")
    if op.kind == "noise" and op.name == GLOBAL_DEPOLARIZING:
        raise ValueError("global depolarizing is structural; it has no local embedding")
    local = op.local_kraus()
    k = len(op.targets)
    rest = [q for q in range(num_qubits) if q not in op.targets]
    order = list(op.targets) + rest
    n_dim = 2**num_qubits
    idx = np.arange(n_dim)
    perm = np.zeros(n_dim, dtype=np.int64)
    for pos, q in enumerate(order):
        bit = (idx >> (num_qubits - 1 - q)) & 1
        perm |= bit << (num_qubits - 1 - pos)
    eye_rest = np.eye(2 ** (num_qubits - k))
    full_ops = [np.kron(kr, eye_rest)[np.ix_(perm, perm)] for kr in local]
    return KrausChannel(num_qubits, tuple(full_ops))
