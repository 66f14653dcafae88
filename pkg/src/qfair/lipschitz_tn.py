"""Scalable Lipschitz backend: operator networks plus power iteration.

The subset operator M_A = E†(Σ_{i∈A} ℳ_i) is represented as a tensor
network (circuit layers below, adjoint layers above, noise channel tensors
bridging the two around the effect) and its extremal eigenvalues are pulled
out with the basic power method, never materializing the 2^n x 2^n matrix.
λ_min(M_A) comes from 1 − λ_max(M_{O∖A}), exact because complementary
effect sums add to the identity.

Two exact contraction strategies are compiled per network:

  * "cone" — layers are absorbed in Heisenberg order while the evolved
    effect stays supported on few qubits.  Unitary layers outside the
    support cancel and noise layers outside it evaporate (the adjoint
    channel is unital), so circuits whose noise sits between shallow
    unitary stages collapse to M_A = U† (M_S ⊗ I) U with U the leading
    unitary stage; a matvec is then three state-vector passes.
  * "mpo" — the general path: the network is contracted into an exact
    matrix product operator and matvecs sweep it qubit by qubit.

Both reproduce the dense backend to roundoff; the choice is cost, not
accuracy.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels, mpo
from .channel import GLOBAL_DEPOLARIZING, LocalOp, fuse_unitary_runs
from .config import TOL
from .lipschitz_dense import (
    MAX_OUTCOMES,
    LipschitzReport,
    TimeoutExceeded,
    phase_fix,
    subset_candidates,
)
from .model import DecisionModel
from .qstate import PureState

CONE_SUPPORT_CAP = 10
RAW_EFFECT_QUBIT_CAP = 8
MPO_COMPRESS_BOND = 96

_SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)


@dataclass(frozen=True)
class PowerIterationConfig:
    max_iters: int = 10000
    tolerance: float = 1e-7
    rng_seed: int = 20

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class OperatorNetwork:
    num_qubits: int
    subset: tuple[str, ...]
    nodes: tuple[dict, ...]
    strategy: str
    payload: dict = field(repr=False, default_factory=dict)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits


@dataclass(frozen=True)
class PowerResult:
    value: float
    vector: np.ndarray
    iterations: int
    converged: bool
    residual: float
    rayleigh_history: tuple[float, ...]


@dataclass(frozen=True)
class ExtremalEigs:
    lambda_max: float
    lambda_min: float
    psi: np.ndarray
    phi: np.ndarray
    max_run: PowerResult
    min_run: PowerResult

    @property
    def converged(self) -> bool:
        return self.max_run.converged and self.min_run.converged


# -- network construction ----------------------------------------------------

def _ordered_kraus(op: LocalOp):
    """Local Kraus matrices with ascending targets (high bit first)."""
    ks = op.local_kraus()
    t = op.targets
    if len(t) == 2 and t[0] > t[1]:
        ks = [_SWAP @ k @ _SWAP for k in ks]
        t = (t[1], t[0])
    return ks, t


def _effect_for_subset(model: DecisionModel, subset):
    """(support qubits, dense effect on support) for Σ_{i∈A} ℳ_i."""
    povm = model.povm
    n = model.num_qubits
    if povm.is_last_qubit_local:
        local = sum(povm.local_effects[lab] for lab in subset)
        return (n - 1,), np.asarray(local, dtype=complex)
    if n > RAW_EFFECT_QUBIT_CAP:
        raise ValueError(
            f"raw (non-local) effects supported on at most {RAW_EFFECT_QUBIT_CAP} "
            f"qubits in the tensor-network backend, got {n}"
        )
    dense = sum(povm.effects[lab] for lab in subset)
    return tuple(range(n)), np.asarray(dense, dtype=complex)


def _noise_channel_tensor(kraus) -> np.ndarray:
    """4-leg Heisenberg channel tensor T[r,c,a,b]: M'[r,c] = T·M."""
    d = kraus[0].shape[0]
    t = np.zeros((d, d, d, d), dtype=complex)
    for k in kraus:
        t += np.einsum("ar,bc->rcab", k.conj(), k)
    return t


def _build_nodes(model: DecisionModel, subset, support, effect) -> tuple[dict, ...]:
    ket, bra, noise = [], [], []
    for op in model.circuit.layers:
        if op.is_unitary:
            u = op.local_kraus()[0]
            ket.append({"role": "gate", "name": op.name or "raw", "targets": op.targets,
                        "tensor": u})
            bra.append({"role": "gate-adjoint", "name": op.name or "raw",
                        "targets": op.targets, "tensor": u.conj().T})
        elif op.kind == "noise" and op.name == GLOBAL_DEPOLARIZING:
            noise.append({"role": "noise-channel", "name": op.name, "targets": (),
                          "p": op.p, "tensor": None})
        else:
            noise.append({"role": "noise-channel", "name": op.name or "raw_kraus",
                          "targets": op.targets,
                          "tensor": _noise_channel_tensor(op.local_kraus())})
    effect_node = {"role": "effect", "targets": support, "tensor": effect}
    return tuple(ket + noise + [effect_node] + list(reversed(bra)))


def _lift_support(m: np.ndarray, old: tuple, new: tuple) -> np.ndarray:
    """Tensor identity onto the added qubits of an enlarged sorted support."""
    add = [q for q in new if q not in old]
    big = np.kron(m, np.eye(2 ** len(add)))
    order = list(old) + add
    k = len(new)
    perm_axes = [order.index(q) for q in new]
    t = big.reshape((2,) * (2 * k))
    t = t.transpose([*perm_axes, *[k + a for a in perm_axes]])
    return t.reshape(2**k, 2**k)


def _heisenberg_on_support(m: np.ndarray, kraus, positions) -> np.ndarray:
    """M ← Σ K† M K with K acting on the given axes of the support space."""
    k_sup = int(np.log2(m.shape[0]))
    acc = np.zeros_like(m)
    for k in kraus:
        t = m.reshape((2,) * (2 * k_sup))
        kk = len(positions)
        kt = k.reshape((2,) * (2 * kk))
        # rows: Σ_a conj(K[a, r]) M[a, ...] ; cols: Σ_b M[..., b] K[b, c]
        t1 = np.tensordot(kt.conj(), t, axes=(list(range(kk)), list(positions)))
        t1 = np.moveaxis(t1, list(range(kk)), list(positions))
        col_axes = [k_sup + p for p in positions]
        t2 = np.tensordot(kt, t1, axes=(list(range(kk)), col_axes))
        t2 = np.moveaxis(t2, list(range(kk)), col_axes)
        acc += t2.reshape(m.shape)
    return acc


def _try_cone(model: DecisionModel, support, effect):
    """Compile the cone strategy, or return None when the support blows up."""
    layers = model.circuit.layers
    first_noise = len(layers)
    for i, op in enumerate(layers):
        if not op.is_unitary:
            first_noise = i
            break
    sup = tuple(sorted(support))
    m = np.array(effect)
    # Heisenberg walk down to the first non-unitary layer; everything below
    # it is unitary and becomes the state-vector prefix.
    for idx in range(len(layers) - 1, first_noise - 1, -1):
        op = layers[idx]
        if op.kind == "noise" and op.name == GLOBAL_DEPOLARIZING:
            dim = m.shape[0]
            m = (1 - op.p) * m + (op.p * np.trace(m) / dim) * np.eye(dim)
            continue
        if not set(op.targets) & set(sup):
            continue  # unitary sandwich cancels; noise is unital
        new_sup = tuple(sorted(set(sup) | set(op.targets)))
        if len(new_sup) > CONE_SUPPORT_CAP:
            return None
        if new_sup != sup:
            m = _lift_support(m, sup, new_sup)
            sup = new_sup
        ks, targets = _ordered_kraus(op)
        positions = tuple(sup.index(t) for t in targets)
        m = _heisenberg_on_support(m, ks, positions)
    prefix = []
    for op in layers[:first_noise]:
        ks, targets = _ordered_kraus(op)
        prefix.append((ks[0], targets))
    return {"prefix": fuse_unitary_runs(prefix), "support": sup,
            "m_support": np.ascontiguousarray(m)}


def _compile_mpo(model: DecisionModel, support, effect):
    n = model.num_qubits
    if len(support) == n:
        sites = mpo.dense_to_mpo(effect, n)
    else:
        ops = [np.eye(2, dtype=complex)] * n
        for pos, q in enumerate(support):
            if len(support) != 1:
                raise ValueError("local effects beyond one qubit need the dense path")
            ops[q] = effect
        sites = mpo.product_mpo(ops)
    for op in reversed(model.circuit.layers):
        if op.kind == "noise" and op.name == GLOBAL_DEPOLARIZING:
            sites = mpo.global_depolarizing_mpo(sites, op.p)
            continue
        ks, targets = _ordered_kraus(op)
        if len(targets) == 1:
            mpo.heisenberg_1q(sites, ks, targets[0])
        elif targets[1] == targets[0] + 1:
            mpo.heisenberg_2q_adjacent(sites, ks, targets[0])
        else:
            mpo.heisenberg_2q_distant(sites, ks, targets[0], targets[1])
            sites = mpo.compress(sites)
        if mpo.max_bond(sites) > MPO_COMPRESS_BOND:
            sites = mpo.compress(sites)
    sites = mpo.compress(sites)
    return {"wmats": mpo.matvec_tensors(sites), "max_bond": mpo.max_bond(sites)}


def build_operator_network(model: DecisionModel, subset, strategy: str = "auto") -> OperatorNetwork:
    """Network contracting to M_A = Σ_{i∈A} E†(ℳ_i) for the outcome subset."""
    subset = tuple(sorted(str(s) for s in subset))
    unknown = set(subset) - set(model.labels)
    if unknown:
        raise ValueError(f"unknown outcome labels {sorted(unknown)}")
    for op in model.circuit.layers:
        if op.targets and len(op.targets) > 2:
            raise ValueError("layers must be 1- or 2-local")
    support, effect = _effect_for_subset(model, subset)
    nodes = _build_nodes(model, subset, support, effect)

    payload = None
    used = strategy
    if strategy in ("auto", "cone"):
        payload = _try_cone(model, support, effect)
        used = "cone"
        if payload is None and strategy == "cone":
            raise ValueError("cone strategy inapplicable: evolved effect support too large")
    if payload is None:
        payload = _compile_mpo(model, support, effect)
        used = "mpo"
    return OperatorNetwork(model.num_qubits, subset, nodes, used, payload)


# -- contraction --------------------------------------------------------------

def _apply_dense_local(v, mat, num_qubits, targets):
    if len(targets) == 1:
        return kernels.apply_1q(v, mat, num_qubits, targets[0])
    if len(targets) == 2:
        return kernels.apply_2q(v, mat, num_qubits, targets[0], targets[1])
    return kernels.apply_kq(v, mat, num_qubits, targets)


def matvec(net: OperatorNetwork, v: np.ndarray) -> np.ndarray:
    """M_A · v by contracting v into the network's input legs."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (net.dim,):
        raise ValueError(f"vector length {v.shape} does not match dim {net.dim}")
    if net.strategy == "cone":
        p = net.payload
        w = v
        for u, targets in p["prefix"]:
            w = _apply_dense_local(w, u, net.num_qubits, targets)
        w = _apply_dense_local(w, p["m_support"], net.num_qubits, p["support"])
        for u, targets in reversed(p["prefix"]):
            w = _apply_dense_local(w, u.conj().T, net.num_qubits, targets)
        return w
    return mpo.matvec(net.payload["wmats"], v, kernels.mpo_step)


def network_to_dense(net: OperatorNetwork) -> np.ndarray:
    """Materialize M_A column by column through matvec (small n only)."""
    n = net.dim
    out = np.empty((n, n), dtype=complex)
    e = np.zeros(n, dtype=complex)
    for j in range(n):
        e[j] = 1.0
        out[:, j] = matvec(net, e)
        e[j] = 0.0
    return out


# -- power iteration -----------------------------------------------------------

def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise TimeoutExceeded("wall-clock budget exhausted")


def power_iteration(matvec_fn, dim: int, cfg: PowerIterationConfig,
                    deadline=None) -> PowerResult:
    """Basic power method on a PSD operator with spectrum in [0, 1].

    The Rayleigh quotients of the iterates increase geometrically toward
    λ_max, so successive changes c_k shrink by roughly the squared gap
    ratio; the remaining error is about c_k·ρ/(1−ρ) for ρ = c_k/c_{k−1}.
    Iteration stops once both the raw change and that extrapolated error
    fall below the tolerance (the extrapolation guards against declaring
    victory early on nearly flat spectra).  On stall past max_iters the
    best iterate is returned, flagged unconverged, with its residual.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    history = []
    lam_prev = None
    changes = []
    converged = False
    iterations = 0
    for it in range(1, cfg.max_iters + 1):
        iterations = it
        w = matvec_fn(v)
        lam = float(np.vdot(v, w).real)
        history.append(lam)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return PowerResult(0.0, v, it, True, 0.0, tuple(history))
        v = w / nw
        if lam_prev is not None:
            c = max(lam - lam_prev, 0.0)
            changes.append(c)
            if c <= 1e-15 * max(abs(lam), 1.0):
                converged = True
                break
            if c < cfg.tolerance and len(changes) >= 2:
                ratios = [b / a for a, b in zip(changes[-4:-1], changes[-3:]) if a > 0]
                rho = max(ratios) if ratios else 1.0
                if rho < 1.0 and c * rho / (1.0 - rho) < cfg.tolerance:
                    converged = True
                    break
        lam_prev = lam
        if it % 64 == 0:
            _check_deadline(deadline)
    w = matvec_fn(v)
    lam = float(np.vdot(v, w).real)
    history.append(lam)
    residual = float(np.linalg.norm(w - lam * v))
    return PowerResult(lam, v, iterations, converged, residual, tuple(history))


def extremal_eigs(net_a: OperatorNetwork, net_complement: OperatorNetwork,
                  cfg: PowerIterationConfig, deadline=None) -> ExtremalEigs:
    """λ_max from M_A, λ_min from 1 − λ_max(M_complement), with eigenvectors."""
    run_max = power_iteration(lambda v: matvec(net_a, v), net_a.dim, cfg, deadline)
    run_min = power_iteration(lambda v: matvec(net_complement, v), net_a.dim, cfg, deadline)
    return ExtremalEigs(
        lambda_max=run_max.value,
        lambda_min=1.0 - run_min.value,
        psi=run_max.vector,
        phi=run_min.vector,
        max_run=run_max,
        min_run=run_min,
    )


def _resolve_config(model: DecisionModel, cfg) -> PowerIterationConfig:
    if cfg is not None:
        return cfg
    solver = model.metadata.get("solver")
    if isinstance(solver, dict):
        return PowerIterationConfig(
            max_iters=int(solver.get("max_iters", 10000)),
            tolerance=float(solver.get("tolerance", 1e-7)),
            rng_seed=solver.get("seed", 20),
        )
    return PowerIterationConfig()


def lipschitz_tn(model: DecisionModel, cfg: PowerIterationConfig | None = None,
                 deadline=None, strategy: str = "auto") -> LipschitzReport:
    """Lipschitz constant via the tensor-network power method."""
    labels = model.labels
    if len(labels) > MAX_OUTCOMES:
        raise ValueError(f"outcome set too large ({len(labels)} > {MAX_OUTCOMES})")
    cfg = _resolve_config(model, cfg)
    t0 = time.perf_counter()

    nets: dict[tuple[str, ...], OperatorNetwork] = {}

    def net_for(subset) -> OperatorNetwork:
        key = tuple(sorted(subset))
        if key not in nets:
            nets[key] = build_operator_network(model, key, strategy)
        return nets[key]

    spreads: dict[tuple[str, ...], float] = {}
    best = None
    best_subset, best_spread = None, -1.0
    all_converged = True
    runs_info = []
    for subset in subset_candidates(labels):
        complement = tuple(sorted(set(labels) - set(subset)))
        eigs = extremal_eigs(net_for(subset), net_for(complement), cfg, deadline)
        spread = eigs.lambda_max - eigs.lambda_min
        spreads[subset] = spread
        all_converged &= eigs.converged
        runs_info.append({
            "subset": list(subset),
            "iterations": [eigs.max_run.iterations, eigs.min_run.iterations],
            "residuals": [eigs.max_run.residual, eigs.min_run.residual],
            "converged": eigs.converged,
        })
        if spread > best_spread or (spread == best_spread and subset < best_subset):
            best_subset, best_spread, best = subset, spread, eigs
        _check_deadline(deadline)

    n = model.num_qubits
    # clamp eigensolver roundoff: K* is in [0, 1] by the Lipschitz bound
    k_star = float(min(max(best_spread, 0.0), 1.0))
    degenerate = k_star <= TOL.degenerate_spread
    if degenerate:
        psi = np.zeros(2**n, dtype=complex)
        phi = np.zeros(2**n, dtype=complex)
        psi[0], phi[1] = 1.0, 1.0
    else:
        psi = phase_fix(best.psi)
        phi = phase_fix(best.phi)

    solver_info = {
        "tolerance": cfg.tolerance,
        "max_iters": cfg.max_iters,
        "seed": cfg.rng_seed,
        "strategies": {",".join(k): v.strategy for k, v in nets.items()},
        "runs": runs_info,
    }
    return LipschitzReport(
        k_star=k_star,
        optimal_subset=best_subset,
        kernel_psi=PureState(n, psi),
        kernel_phi=PureState(n, phi),
        subset_spreads=spreads,
        wall_time=time.perf_counter() - t0,
        backend="tensor-network",
        degenerate=degenerate,
        converged=all_converged,
        solver_info=solver_info,
    )
