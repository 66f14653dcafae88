"""Model spec files: JSON, UTF-8, complex numbers as [re, im] pairs.

Layout::

    {
      "num_qubits": n,
      "layers": [
        {"kind": "gate",      "name": ..., "targets": [...], "params": [...]},
        {"kind": "noise",     "name": ..., "p": ...,         "targets": [...]},
        {"kind": "raw_kraus", "matrices": [...],             "targets": [...]}
      ],
      "measurement": "last_qubit" | {"raw_ops": [...]},
      "metadata": {...},
      "solver": {"tolerance": ..., "max_iters": ..., "seed": ...}   # optional
    }

Raw unitary gates are single-element raw_kraus layers.  The global
depolarizing channel is a noise layer with an empty target list.
"""

import json

import numpy as np

from .channel import CircuitChannel, LocalOp
from .measurement import Povm, from_measurement_ops, last_qubit_projective
from .model import DecisionModel


def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _layer_to_dict(op: LocalOp) -> dict:
    if op.kind == "gate":
        return {"kind": "gate", "name": op.name, "targets": list(op.targets),
                "params": list(op.params)}
    if op.kind == "noise":
        return {"kind": "noise", "name": op.name, "p": op.p, "targets": list(op.targets)}
    return {"kind": "raw_kraus", "targets": list(op.targets),
            "matrices": [_matrix_to_json(m) for m in op.matrices]}


def _layer_from_dict(d: dict) -> LocalOp:
    kind = d.get("kind")
    targets = tuple(d.get("targets", ()))
    if kind == "gate":
        return LocalOp("gate", targets, name=d["name"], params=tuple(d.get("params", ())))
    if kind == "noise":
        return LocalOp("noise", targets, name=d["name"], p=float(d["p"]))
    if kind == "raw_kraus":
        mats = tuple(_matrix_from_json(m) for m in d["matrices"])
        return LocalOp("raw_kraus", targets, matrices=mats)
    raise ValueError(f"unknown layer kind {kind!r}")


def model_to_dict(model: DecisionModel) -> dict:
    meta = {k: v for k, v in model.metadata.items() if k != "solver"}
    out = {
        "num_qubits": model.num_qubits,
        "layers": [_layer_to_dict(op) for op in model.circuit.layers],
        "measurement": _measurement_to_json(model.povm),
        "metadata": meta,
        "name": model.name,
    }
    if "solver" in model.metadata:
        out["solver"] = model.metadata["solver"]
    return out


def _measurement_to_json(povm: Povm):
    if povm == last_qubit_projective(povm.num_qubits):
        return "last_qubit"
    # Effects are PSD, so their square roots are valid measurement operators
    # that regenerate the same effects on load.
    ops = []
    for m in povm.effects.values():
        vals, vecs = np.linalg.eigh(m)
        root = (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T
        ops.append(_matrix_to_json(root))
    return {"raw_ops": ops, "labels": list(povm.labels)}


def model_from_dict(d: dict) -> DecisionModel:
    num_qubits = int(d["num_qubits"])
    layers = tuple(_layer_from_dict(x) for x in d.get("layers", []))
    circuit = CircuitChannel(num_qubits, layers)
    meas = d.get("measurement", "last_qubit")
    if meas == "last_qubit":
        povm = last_qubit_projective(num_qubits)
    elif isinstance(meas, dict) and "raw_ops" in meas:
        ops = [_matrix_from_json(m) for m in meas["raw_ops"]]
        povm = from_measurement_ops(ops, labels=meas.get("labels"))
        if povm.num_qubits != num_qubits:
            raise ValueError("measurement dimension does not match num_qubits")
    else:
        raise ValueError(f"unknown measurement spec {meas!r}")
    metadata = dict(d.get("metadata", {}))
    if "solver" in d:
        metadata["solver"] = d["solver"]
    return DecisionModel(circuit, povm, name=d.get("name", "model"), metadata=metadata)


def save_model(model: DecisionModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)


def load_model(path) -> DecisionModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
