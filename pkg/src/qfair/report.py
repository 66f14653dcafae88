"""Verification reports: lossless JSON round trip of a Lipschitz run.

A report embeds the model spec, so bias-pair generation and re-verification
need no other inputs.  Kernel vectors are truncated to the largest-magnitude
amplitudes by default (they can be 2^n-dimensional); the full dump sits
behind a flag.  Loading a truncated kernel renormalizes it and marks the
report, since downstream geometry is then approximate.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .lipschitz_dense import LipschitzReport
from .model import DecisionModel
from .model_io import model_from_dict, model_to_dict
from .qstate import PureState

KERNEL_AMPLITUDE_CAP = 64
FORMAT = "qfair-report/1"


def _subset_key(subset: tuple[str, ...]) -> str:
    return ",".join(subset)


def _encode_kernel(state: PureState, cap: int | None) -> dict:
    amps = state.amplitudes
    if cap is None or amps.size <= cap:
        return {
            "encoding": "full",
            "amplitudes": [[float(a.real), float(a.imag)] for a in amps],
        }
    order = np.argsort(-np.abs(amps))[:cap]
    order = np.sort(order)
    return {
        "encoding": "top_k",
        "dim": int(amps.size),
        "amplitudes": [[int(i), float(amps[i].real), float(amps[i].imag)] for i in order],
    }


def _decode_kernel(num_qubits: int, data: dict) -> tuple[PureState, bool]:
    if data["encoding"] == "full":
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return PureState(num_qubits, amps), False
    amps = np.zeros(data["dim"], dtype=complex)
    for i, re, im in data["amplitudes"]:
        amps[i] = complex(re, im)
    nrm = np.linalg.norm(amps)
    if nrm == 0:
        raise ValueError("kernel serialization has no support")
    return PureState(num_qubits, amps / nrm), True


@dataclass(frozen=True)
class VerificationReport:
    model: DecisionModel
    backend: str
    k_star: float
    optimal_subset: tuple[str, ...]
    subset_spreads: dict[tuple[str, ...], float]
    kernel_psi: PureState
    kernel_phi: PureState
    degenerate: bool
    converged: bool
    wall_time: float
    solver_info: dict = field(default_factory=dict)
    verdict: dict | None = None  # {"epsilon", "delta", "fair", "witness_margin"}
    kernel_truncated: bool = False


def from_lipschitz(model: DecisionModel, rep: LipschitzReport,
                   verdict: dict | None = None) -> VerificationReport:
    return VerificationReport(
        model=model,
        backend=rep.backend,
        k_star=rep.k_star,
        optimal_subset=rep.optimal_subset,
        subset_spreads=rep.subset_spreads,
        kernel_psi=rep.kernel_psi,
        kernel_phi=rep.kernel_phi,
        degenerate=rep.degenerate,
        converged=rep.converged,
        wall_time=rep.wall_time,
        solver_info=rep.solver_info,
        verdict=verdict,
    )


def report_to_dict(rep: VerificationReport, kernel_cap: int | None = KERNEL_AMPLITUDE_CAP) -> dict:
    return {
        "format": FORMAT,
        "model": model_to_dict(rep.model),
        "backend": rep.backend,
        "k_star": rep.k_star,
        "optimal_subset": list(rep.optimal_subset),
        "subset_spreads": {_subset_key(k): v for k, v in rep.subset_spreads.items()},
        "kernel": {
            "num_qubits": rep.model.num_qubits,
            "psi": _encode_kernel(rep.kernel_psi, kernel_cap),
            "phi": _encode_kernel(rep.kernel_phi, kernel_cap),
        },
        "degenerate": rep.degenerate,
        "converged": rep.converged,
        "wall_time": rep.wall_time,
        "solver_info": rep.solver_info,
        "verdict": rep.verdict,
    }


def report_from_dict(d: dict) -> VerificationReport:
    if d.get("format") != FORMAT:
        raise ValueError(f"not a {FORMAT} document")
    model = model_from_dict(d["model"])
    psi, trunc_a = _decode_kernel(model.num_qubits, d["kernel"]["psi"])
    phi, trunc_b = _decode_kernel(model.num_qubits, d["kernel"]["phi"])
    return VerificationReport(
        model=model,
        backend=d["backend"],
        k_star=float(d["k_star"]),
        optimal_subset=tuple(d["optimal_subset"]),
        subset_spreads={
            tuple(k.split(",")): float(v) for k, v in d["subset_spreads"].items()
        },
        kernel_psi=psi,
        kernel_phi=phi,
        degenerate=bool(d["degenerate"]),
        converged=bool(d["converged"]),
        wall_time=float(d["wall_time"]),
        solver_info=d.get("solver_info", {}),
        verdict=d.get("verdict"),
        kernel_truncated=trunc_a or trunc_b,
    )


def save_report(rep: VerificationReport, path, kernel_cap: int | None = KERNEL_AMPLITUDE_CAP) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_dict(rep, kernel_cap), fh, indent=1)


def load_report(path) -> VerificationReport:
    with open(path, "r", encoding="utf-8") as fh:
        return report_from_dict(json.load(fh))


def recheck_verdict(rep: VerificationReport) -> bool | None:
    """Recompute the fairness decision from the stored numbers."""
    if rep.verdict is None:
        return None
    return rep.verdict["delta"] >= rep.k_star * rep.verdict["epsilon"]
