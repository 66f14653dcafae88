"""The (ε,δ)-fairness decision and bias-pair generation.

A model is (ε,δ)-fair exactly when δ ≥ K*·ε (boundary inclusive).  When
fairness fails, the bias kernel (ψ, φ) — the orthogonal pure pair achieving
K* — seeds infinitely many bias pairs by convex mixing with an arbitrary
state σ:

    ρ_ψ = ε ψ + (1−ε) σ,   ρ_φ = ε φ + (1−ε) σ,

which sit at input trace distance exactly ε and output distance ε·K*.
"""

from dataclasses import dataclass

import numpy as np

from .config import TOL
from .lipschitz_dense import LipschitzReport, lipschitz
from .lipschitz_tn import PowerIterationConfig, lipschitz_tn
from .model import DecisionModel, forward
from .qstate import (
    DensityMatrix,
    PureState,
    pure_to_density,
    random_pure_state,
    trace_distance,
    tv_distance,
)


@dataclass(frozen=True)
class FairnessVerdict:
    fair: bool
    epsilon: float
    delta: float
    k_star: float
    kernel: tuple[PureState, PureState] | None
    witness_margin: float  # K*ε − δ; positive exactly when unfair

    def __post_init__(self):
        should_be_fair = self.delta >= self.k_star * self.epsilon
        if self.fair != should_be_fair and abs(self.witness_margin) > 1e-12:
            raise ValueError("verdict inconsistent with δ ≥ K*ε rule")
        if self.fair and self.kernel is not None:
            raise ValueError("fair verdicts carry no kernel")
        if not self.fair and self.kernel is None:
            raise ValueError("unfair verdicts must carry the bias kernel")


@dataclass(frozen=True)
class BiasPair:
    rho_psi: DensityMatrix
    rho_phi: DensityMatrix
    input_distance: float
    output_distance: float


def _validate_thresholds(epsilon: float, delta: float) -> None:
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    if not 0 < delta <= 1:
        raise ValueError(f"delta must be in (0, 1], got {delta}")


def verdict_from_report(report: LipschitzReport, epsilon: float, delta: float) -> FairnessVerdict:
    """Apply the δ ≥ K*ε rule to an existing Lipschitz report.

    The comparison uses the computed values with no extra slack; the
    witness margin makes near-boundary verdicts visible to the caller.
    """
    _validate_thresholds(epsilon, delta)
    fair = delta >= report.k_star * epsilon
    return FairnessVerdict(
        fair=fair,
        epsilon=epsilon,
        delta=delta,
        k_star=report.k_star,
        kernel=None if fair else (report.kernel_psi, report.kernel_phi),
        witness_margin=report.k_star * epsilon - delta,
    )


def verify(model: DecisionModel, epsilon: float, delta: float, backend: str = "dense",
           cfg: PowerIterationConfig | None = None) -> FairnessVerdict:
    """Decide (ε,δ)-fairness; on failure the verdict carries the bias kernel."""
    _validate_thresholds(epsilon, delta)
    if backend == "dense":
        report = lipschitz(model)
    elif backend in ("tn", "tensor-network"):
        report = lipschitz_tn(model, cfg=cfg)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return verdict_from_report(report, epsilon, delta)


def sigma_state(num_qubits: int, source: str = "maximally-mixed", seed=None) -> DensityMatrix:
    """A σ to mix bias kernels with: I/N, a random pure state, or a random mixture."""
    dim = 2**num_qubits
    if source in ("maximally-mixed", "mixed"):
        return DensityMatrix(num_qubits, np.eye(dim) / dim)
    if source == "pure":
        return pure_to_density(random_pure_state(num_qubits, seed))
    if source == "random-mixed":
        rng = np.random.default_rng(seed)
        weights = rng.uniform(0.1, 1.0, size=4)
        weights /= weights.sum()
        mat = np.zeros((dim, dim), dtype=complex)
        for k, w in enumerate(weights):
            psi = random_pure_state(num_qubits, rng.integers(2**63)).amplitudes
            mat += w * np.outer(psi, psi.conj())
        return DensityMatrix(num_qubits, mat)
    raise ValueError(f"unknown sigma source {source!r}")


def bias_pairs(kernel: tuple[PureState, PureState], sigma: DensityMatrix,
               epsilon: float, model: DecisionModel) -> BiasPair:
    """One bias pair from the kernel and a mixing state σ."""
    psi, phi = kernel
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    overlap = abs(np.vdot(psi.amplitudes, phi.amplitudes))
    if overlap > TOL.kernel_orthogonality:
        raise ValueError(f"kernel states are not orthogonal (⟨ψ|φ⟩ = {overlap:.2e})")
    if sigma.num_qubits != psi.num_qubits:
        raise ValueError("sigma dimension does not match the kernel")
    proj_psi = pure_to_density(psi).matrix
    proj_phi = pure_to_density(phi).matrix
    rho_psi = DensityMatrix(psi.num_qubits, epsilon * proj_psi + (1 - epsilon) * sigma.matrix)
    rho_phi = DensityMatrix(psi.num_qubits, epsilon * proj_phi + (1 - epsilon) * sigma.matrix)
    return BiasPair(
        rho_psi=rho_psi,
        rho_phi=rho_phi,
        input_distance=trace_distance(rho_psi, rho_phi),
        output_distance=tv_distance(forward(model, rho_psi), forward(model, rho_phi)),
    )


def check_pair(model: DecisionModel, rho: DensityMatrix, sigma: DensityMatrix,
               epsilon: float, delta: float) -> bool:
    """Is (ρ, σ) an (ε,δ)-bias pair: inputs within ε, outputs beyond δ?

    The input conjunct gets a 1e-12 guard: pairs constructed to sit exactly
    at distance ε land a few ulps away after the eigendecomposition, and
    that numerical fuzz must not flip the verdict.  The output conjunct is
    a strict inequality as defined.
    """
    _validate_thresholds(epsilon, delta)
    if trace_distance(rho, sigma) > epsilon + 1e-12:
        return False
    return tv_distance(forward(model, rho), forward(model, sigma)) > delta
