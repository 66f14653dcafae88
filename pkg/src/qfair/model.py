"""Decision models: a circuit channel paired with a POVM.

Includes the two builder architectures used throughout:

  * rotation/entangling — alternating per-qubit Z-X-Z rotation blocks and
    cyclic XX-coupling entangling blocks, noise on every qubit behind the
    first rotation block;
  * QCNN — a convolution layer of two-qubit units on adjacent pairs, a
    noise layer on every qubit, a pooling layer concentrating pairs toward
    the last qubit, and a final single-qubit gate before measurement.

Builder parameters are sampled uniformly on [0, 2π) from a seeded 64-bit
generator, or supplied explicitly.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import GLOBAL_DEPOLARIZING, NOISE_NAMES, CircuitChannel, LocalOp, apply
from .measurement import Povm, last_qubit_projective
from .qstate import DensityMatrix, OutcomeDistribution

MIXED_NOISE_ORDER = ("bit-flip", "phase-flip", "depolarizing")


@dataclass(frozen=True)
class DecisionModel:
    circuit: CircuitChannel
    povm: Povm
    name: str = "model"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.circuit.num_qubits != self.povm.num_qubits:
            raise ValueError("circuit and POVM qubit counts differ")

    @property
    def num_qubits(self) -> int:
        return self.circuit.num_qubits

    @property
    def labels(self) -> tuple[str, ...]:
        return self.povm.labels


def forward(model: DecisionModel, rho: DensityMatrix) -> OutcomeDistribution:
    """Outcome distribution {tr(ℳ_i E(ρ))}."""
    if rho.num_qubits != model.num_qubits:
        raise ValueError("state and model qubit counts differ")
    out = apply(model.circuit, rho)
    return OutcomeDistribution(model.labels, model.povm.outcome_probabilities(out))


def classify(model: DecisionModel, rho: DensityMatrix) -> str:
    """Arg-max outcome label; exact ties go to the smallest label."""
    dist = forward(model, rho)
    pmax = float(np.max(dist.probabilities))
    winners = [lab for lab, p in zip(dist.labels, dist.probabilities) if p == pmax]
    return min(winners)


# -- parameter plumbing -----------------------------------------------------

class _ParamSource:
    """Doles out angles from an explicit vector or a seeded generator."""

    def __init__(self, count: int, params=None, rng_seed=None):
        if params is not None:
            vec = np.asarray(params, dtype=float)
            if vec.shape != (count,):
                raise ValueError(f"expected {count} parameters, got {vec.shape}")
            self.values = vec
        elif rng_seed is not None:
            rng = np.random.default_rng(rng_seed)
            self.values = rng.uniform(0.0, 2 * np.pi, size=count)
        else:
            raise ValueError("provide either params or rng_seed")
        self._pos = 0

    def take(self) -> float:
        v = self.values[self._pos]
        self._pos += 1
        return float(v)


def _noise_layers(noise, qubits) -> list[LocalOp]:
    if noise is None:
        return []
    name, p = noise
    if name == GLOBAL_DEPOLARIZING:
        return [LocalOp("noise", (), name=name, p=p)]
    if name not in NOISE_NAMES:
        raise ValueError(f"unknown noise {name!r}")
    return [LocalOp("noise", (q,), name=name, p=p) for q in qubits]


def _noise_metadata(noise) -> dict:
    if noise is None:
        return {"noise": None}
    meta = {"noise": {"name": noise[0], "p": noise[1]}}
    if noise[0] == "mixed":
        meta["mixed_noise_order"] = list(MIXED_NOISE_ORDER)
    return meta


def _zxz(q: int, src: _ParamSource) -> list[LocalOp]:
    return [
        LocalOp("gate", (q,), name="rz", params=(src.take(),)),
        LocalOp("gate", (q,), name="rx", params=(src.take(),)),
        LocalOp("gate", (q,), name="rz", params=(src.take(),)),
    ]


# -- rotation / entangling architecture -------------------------------------

def _entangling_pairs(n: int) -> list[tuple[int, int]]:
    """Adjacent pairs, cyclically; the wrap pair is dropped when redundant."""
    if n < 2:
        return []
    if n == 2:
        return [(0, 1)]
    return [(i, (i + 1) % n) for i in range(n)]


def rotation_entangling_param_count(num_qubits: int, num_rotation_blocks: int = 3,
                                    num_entangling_blocks: int = 2) -> int:
    return 3 * num_qubits * num_rotation_blocks + len(
        _entangling_pairs(num_qubits)
    ) * num_entangling_blocks


def build_rotation_entangling(num_qubits: int, num_rotation_blocks: int = 3,
                              num_entangling_blocks: int = 2, params=None,
                              rng_seed=None, noise=None) -> DecisionModel:
    """Alternating rotation and entangling blocks with a last-qubit measurement."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    if num_rotation_blocks < 0 or num_entangling_blocks < 0:
        raise ValueError("block counts must be >= 0")
    count = rotation_entangling_param_count(num_qubits, num_rotation_blocks,
                                            num_entangling_blocks)
    src = _ParamSource(count, params, rng_seed)
    pairs = _entangling_pairs(num_qubits)

    layers: list[LocalOp] = []
    for block in range(max(num_rotation_blocks, num_entangling_blocks)):
        if block < num_rotation_blocks:
            for q in range(num_qubits):
                layers.extend(_zxz(q, src))
            if block == 0:
                layers.extend(_noise_layers(noise, range(num_qubits)))
        if block < num_entangling_blocks:
            for a, b in pairs:
                layers.append(LocalOp("gate", (a, b), name="rxx", params=(src.take(),)))

    meta = {
        "architecture": "rotation-entangling",
        "num_qubits": num_qubits,
        "rotation_blocks": num_rotation_blocks,
        "entangling_blocks": num_entangling_blocks,
        "seed": rng_seed,
        "params": [float(v) for v in src.values],
    }
    meta.update(_noise_metadata(noise))
    return DecisionModel(
        CircuitChannel(num_qubits, tuple(layers)),
        last_qubit_projective(num_qubits),
        name=f"rotation-entangling-{num_qubits}q",
        metadata=meta,
    )


# -- QCNN architecture -------------------------------------------------------

def qcnn_param_count(num_qubits: int) -> int:
    return 9 * (num_qubits - 1) + 7 * (num_qubits // 2) + 3


def build_qcnn(num_qubits: int, params=None, rng_seed=None, noise=None) -> DecisionModel:
    """One convolution layer, one noise layer, one pooling layer, final gate.

    Convolution unit on adjacent pair (i, i+1): Z-X-Z rotations on each
    qubit, then commuting XX/YY/ZZ rotations (9 angles).  Pooling unit on
    pair (2i, 2i+1): Z-X-Z on both qubits, then a controlled X-rotation from
    the discarded (even) qubit onto the kept (odd) one (7 angles).  A final
    Z-X-Z acts on the last qubit before the projective measurement.
    """
    if num_qubits < 2:
        raise ValueError("QCNN needs at least 2 qubits")
    src = _ParamSource(qcnn_param_count(num_qubits), params, rng_seed)

    layers: list[LocalOp] = []
    for i in range(num_qubits - 1):
        layers.extend(_zxz(i, src))
        layers.extend(_zxz(i + 1, src))
        for name in ("rxx", "ryy", "rzz"):
            layers.append(LocalOp("gate", (i, i + 1), name=name, params=(src.take(),)))
    layers.extend(_noise_layers(noise, range(num_qubits)))
    for i in range(num_qubits // 2):
        discarded, kept = 2 * i, 2 * i + 1
        layers.extend(_zxz(discarded, src))
        layers.extend(_zxz(kept, src))
        layers.append(LocalOp("gate", (discarded, kept), name="crx", params=(src.take(),)))
    layers.extend(_zxz(num_qubits - 1, src))

    meta = {
        "architecture": "qcnn",
        "num_qubits": num_qubits,
        "conv_gates": num_qubits - 1,
        "pool_gates": num_qubits // 2,
        "seed": rng_seed,
        "params": [float(v) for v in src.values],
    }
    meta.update(_noise_metadata(noise))
    return DecisionModel(
        CircuitChannel(num_qubits, tuple(layers)),
        last_qubit_projective(num_qubits),
        name=f"qcnn-{num_qubits}q",
        metadata=meta,
    )


def append_noise(model: DecisionModel, name: str, p: float, targets=None) -> DecisionModel:
    """New model with a noise layer appended at the end of the circuit."""
    if name == GLOBAL_DEPOLARIZING:
        extra = [LocalOp("noise", (), name=name, p=p)]
    else:
        qubits = range(model.num_qubits) if targets is None else targets
        extra = [LocalOp("noise", (q,), name=name, p=p) for q in qubits]
    circuit = CircuitChannel(model.num_qubits, model.circuit.layers + tuple(extra))
    meta = dict(model.metadata)
    meta["appended_noise"] = list(meta.get("appended_noise", [])) + [{"name": name, "p": p}]
    return DecisionModel(circuit, model.povm, name=model.name, metadata=meta)
