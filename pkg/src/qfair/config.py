"""Global numerical tolerances.

Every validation threshold used by the domain types lives here, as a single
mutable instance, so numerical audits have one knob to turn.  The defaults
are deliberate: loosening them changes what counts as a valid state,
channel or measurement everywhere at once.
"""

from dataclasses import dataclass


@dataclass
class Tolerances:
    state_norm: float = 1e-12         # |‖ψ‖ - 1| for pure states
    hermitian: float = 1e-12          # entrywise |M - M†|
    trace_one: float = 1e-12          # |tr(ρ) - 1|
    psd_floor: float = -1e-10         # smallest admissible eigenvalue
    kraus_completeness: float = 1e-10 # entrywise |Σ E†E - I|
    unitary: float = 1e-10            # entrywise |U†U - I|
    povm_sum: float = 1e-10           # entrywise |Σ ℳ_i - I|
    measurement_ops: float = 1e-8     # completeness bound for raw measurement ops
    prob_bound: float = 1e-12         # slack on single outcome probabilities
    prob_sum: float = 1e-10           # |Σ p_i - 1| for outcome distributions
    degenerate_spread: float = 1e-9   # below this a spectrum counts as flat
    kernel_orthogonality: float = 1e-8 # |⟨ψ|φ⟩| accepted for bias kernels


TOL = Tolerances()
