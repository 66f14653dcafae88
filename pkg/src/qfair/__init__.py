"""Exact (ε,δ)-fairness verification for noisy quantum decision models.

The Lipschitz constant of a decision model — the largest ratio between the
total variation distance of its output distributions and the trace distance
of its input states — is computed exactly from the spectra of
Heisenberg-evolved measurement effects, either densely or through a
tensor-network power method.  Fairness checking, bias-kernel extraction and
bias-pair generation build on top of it.
"""

from .channel import CircuitChannel, KrausChannel, LocalOp, adjoint_apply, apply, embed, noise_channel
from .config import TOL
from .encode import Dataset, FeatureVector, feature_map, load_csv
from .fairness import (
    BiasPair,
    FairnessVerdict,
    bias_pairs,
    check_pair,
    sigma_state,
    verdict_from_report,
    verify,
)
from .lipschitz_dense import (
    LipschitzReport,
    distinguishability,
    heisenberg_effects,
    lipschitz,
    oracle_k_star,
)
from .lipschitz_tn import (
    ExtremalEigs,
    OperatorNetwork,
    PowerIterationConfig,
    build_operator_network,
    extremal_eigs,
    lipschitz_tn,
    matvec,
    network_to_dense,
    power_iteration,
)
from .measurement import Povm, from_measurement_ops, last_qubit_projective
from .model import (
    DecisionModel,
    append_noise,
    build_qcnn,
    build_rotation_entangling,
    classify,
    forward,
)
from .model_io import load_model, model_from_dict, model_to_dict, save_model
from .qstate import (
    DensityMatrix,
    OutcomeDistribution,
    PureState,
    pure_to_density,
    random_pure_state,
    trace_distance,
    tv_distance,
)
from .report import (
    VerificationReport,
    from_lipschitz,
    load_report,
    report_from_dict,
    report_to_dict,
    save_report,
)

__version__ = "0.1.0"
