"""The dense Lipschitz backend: worked values, spectra, and the oracle."""

import numpy as np
import pytest

from qfair import (
    CircuitChannel,
    DecisionModel,
    DensityMatrix,
    LocalOp,
    Povm,
    append_noise,
    build_qcnn,
    build_rotation_entangling,
    distinguishability,
    forward,
    from_measurement_ops,
    heisenberg_effects,
    last_qubit_projective,
    lipschitz,
    oracle_k_star,
    pure_to_density,
    trace_distance,
    tv_distance,
)
from qfair.lipschitz_dense import subset_candidates
from conftest import batched_output_distance, batched_trace_distance, random_density


def _identity_model(n=2):
    return DecisionModel(CircuitChannel(n), last_qubit_projective(n))


def _diag_effects_model():
    povm = from_measurement_ops(
        [np.diag([np.sqrt(0.8), np.sqrt(0.3)]), np.diag([np.sqrt(0.2), np.sqrt(0.7)])]
    )
    return DecisionModel(CircuitChannel(1), povm)


def _uninformative_model(n=1):
    dim = 2**n
    povm = Povm(n, {"0": np.eye(dim) / 2, "1": np.eye(dim) / 2})
    return DecisionModel(CircuitChannel(n), povm)


class TestHeisenbergEffects:
    def test_identity_circuit_returns_effects(self):
        m = _identity_model(2)
        w = heisenberg_effects(m)
        for lab in ("0", "1"):
            np.testing.assert_allclose(w[lab], m.povm.effects[lab], atol=1e-14)

    def test_unitary_circuit_preserves_spectrum(self, rng):
        circ = CircuitChannel(2, (
            LocalOp("gate", (0,), name="ry", params=(1.2,)),
            LocalOp("gate", (0, 1), name="rxx", params=(0.7,)),
        ))
        m = DecisionModel(circ, last_qubit_projective(2))
        w = heisenberg_effects(m)
        for lab in ("0", "1"):
            got = np.sort(np.linalg.eigvalsh(w[lab]))
            want = np.sort(np.linalg.eigvalsh(m.povm.effects[lab]))
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_bit_flip_effect_value(self):
        circ = CircuitChannel(1, (LocalOp("noise", (0,), name="bit-flip", p=0.1),))
        m = DecisionModel(circ, last_qubit_projective(1))
        np.testing.assert_allclose(heisenberg_effects(m)["0"], np.diag([0.9, 0.1]), atol=1e-15)

    def test_effects_sum_to_identity_and_psd(self, rng):
        m = build_qcnn(4, rng_seed=2, noise=("mixed", 0.05))
        w = heisenberg_effects(m)
        total = sum(w.values())
        np.testing.assert_allclose(total, np.eye(16), atol=1e-9)
        for mat in w.values():
            assert np.linalg.eigvalsh(mat)[0] > -1e-10


class TestSubsetSweep:
    def test_candidates_contain_pivot_and_skip_full_set(self):
        subs = subset_candidates(("0", "1", "2"))
        assert ("0",) in subs and ("0", "1") in subs and ("0", "2") in subs
        assert ("0", "1", "2") not in subs
        assert all(s[0] == "0" for s in subs)

    def test_binary_outcome_single_candidate(self):
        assert subset_candidates(("0", "1")) == [("0",)]

    def test_complement_symmetry(self, rng):
        m = build_rotation_entangling(3, rng_seed=4, noise=("depolarizing", 0.1))
        w = heisenberg_effects(m)
        m0 = w["0"]
        m1 = w["1"]
        e0 = np.linalg.eigvalsh(m0)
        e1 = np.linalg.eigvalsh(m1)
        assert e0[-1] - e0[0] == pytest.approx(e1[-1] - e1[0], abs=1e-10)


class TestLipschitz:
    def test_identity_projective_is_one(self):
        rep = lipschitz(_identity_model(2))
        assert rep.k_star == pytest.approx(1.0, abs=1e-12)
        assert rep.optimal_subset in (("0",), ("1",))

    def test_uninformative_povm_is_zero_and_degenerate(self):
        rep = lipschitz(_uninformative_model())
        assert rep.k_star == pytest.approx(0.0, abs=1e-12)
        assert rep.degenerate
        np.testing.assert_allclose(rep.kernel_psi.amplitudes, [1, 0])
        np.testing.assert_allclose(rep.kernel_phi.amplitudes, [0, 1])

    def test_diag_effects_half_with_basis_kernel(self):
        rep = lipschitz(_diag_effects_model())
        assert rep.k_star == pytest.approx(0.5, abs=1e-14)
        np.testing.assert_allclose(rep.kernel_psi.amplitudes, [1, 0], atol=1e-12)
        np.testing.assert_allclose(rep.kernel_phi.amplitudes, [0, 1], atol=1e-12)

    def test_global_depolarizing_scaling_law(self):
        for p in (1e-4, 1e-3, 1e-2, 0.5):
            m = build_rotation_entangling(3, rng_seed=8)
            noisy = append_noise(m, "global-depolarizing", p)
            base = lipschitz(m).k_star
            got = lipschitz(noisy).k_star
            assert got == pytest.approx((1 - p) * base, abs=1e-12)

    def test_report_invariants(self, rng):
        m = build_qcnn(4, rng_seed=7, noise=("bit-flip", 0.03))
        rep = lipschitz(m)
        assert rep.k_star == pytest.approx(max(rep.subset_spreads.values()), abs=1e-12)
        overlap = abs(np.vdot(rep.kernel_psi.amplitudes, rep.kernel_phi.amplitudes))
        assert overlap < 1e-9
        assert 0.0 <= rep.k_star <= 1.0 + 1e-12
        assert rep.backend == "dense"

    def test_kernel_optimality(self, rng):
        for seed in range(4):
            m = build_rotation_entangling(3, rng_seed=seed, noise=("mixed", 0.05))
            rep = lipschitz(m)
            psi = pure_to_density(rep.kernel_psi)
            phi = pure_to_density(rep.kernel_phi)
            out_dist = tv_distance(forward(m, psi), forward(m, phi))
            assert out_dist == pytest.approx(rep.k_star, abs=1e-9)
            assert trace_distance(psi, phi) == pytest.approx(1.0, abs=1e-9)

    def test_multi_outcome_povm(self, rng):
        # three outcomes; sweep must consider {0}, {0,1}, {0,2}
        ops = [np.diag([np.sqrt(0.5), np.sqrt(0.1)]),
               np.diag([np.sqrt(0.3), np.sqrt(0.2)]),
               np.diag([np.sqrt(0.2), np.sqrt(0.7)])]
        povm = from_measurement_ops(ops)
        m = DecisionModel(CircuitChannel(1), povm)
        rep = lipschitz(m)
        assert set(rep.subset_spreads) == {("0",), ("0", "1"), ("0", "2")}
        # best split groups outcomes 0,1 against 2: spread = 0.7 - 0.2 = 0.5
        assert rep.k_star == pytest.approx(0.5, abs=1e-12)
        assert rep.optimal_subset == ("0", "1")

    def test_outcome_guard(self):
        effects = {str(i): np.eye(2) / 21 for i in range(21)}
        effects["20"] = np.eye(2) - 20 * np.eye(2) / 21
        povm = Povm(1, effects)
        with pytest.raises(ValueError, match="too large"):
            lipschitz(DecisionModel(CircuitChannel(1), povm))


class TestLemma1AndMonotonicity:
    def test_output_distance_bounded_by_trace_distance(self, rng):
        m = build_rotation_entangling(3, rng_seed=1, noise=("depolarizing", 0.05))
        w = np.stack(list(heisenberg_effects(m).values()))
        rhos = np.stack([random_density(3, rng).matrix for _ in range(200)])
        sigmas = np.stack([random_density(3, rng).matrix for _ in range(200)])
        deltas = rhos - sigmas
        assert np.all(
            batched_output_distance(w, deltas) <= batched_trace_distance(deltas) + 1e-10
        )

    def test_appending_noise_never_increases_k_star(self, rng):
        for seed in range(5):
            m = build_rotation_entangling(2, rng_seed=seed)
            base = lipschitz(m).k_star
            for name in ("bit-flip", "phase-flip", "depolarizing", "mixed"):
                noisy = append_noise(m, name, float(rng.uniform(0, 0.3)))
                assert lipschitz(noisy).k_star <= base + 1e-10


class TestDistinguishability:
    def test_orthogonal_states_perfectly_distinguished(self):
        povm = last_qubit_projective(1)
        zero = DensityMatrix(1, np.diag([1.0, 0.0]))
        one = DensityMatrix(1, np.diag([0.0, 1.0]))
        assert distinguishability(povm.effects, zero, one) == pytest.approx(1.0)

    def test_equal_states_coin_flip(self, rng):
        rho = random_density(2, rng)
        povm = last_qubit_projective(2)
        assert distinguishability(povm.effects, rho, rho) == pytest.approx(0.5)

    def test_uninformative_povm_coin_flip(self, rng):
        effects = {"0": np.eye(2) / 2, "1": np.eye(2) / 2}
        a, b = random_density(1, rng), random_density(1, rng)
        assert distinguishability(effects, a, b) == pytest.approx(0.5)

    def test_equals_half_plus_half_tv(self, rng):
        m = build_rotation_entangling(2, rng_seed=3, noise=("bit-flip", 0.1))
        w = heisenberg_effects(m)
        a, b = random_density(2, rng), random_density(2, rng)
        tv = tv_distance(forward(m, a), forward(m, b))
        assert distinguishability(w, a, b) == pytest.approx(0.5 * (1 + tv), abs=1e-10)


class TestOracle:
    def test_uninformative_povm_yields_zero(self):
        assert oracle_k_star(_uninformative_model(), 500, rng_seed=1) == pytest.approx(0.0, abs=1e-12)

    def test_diag_effects_converges_to_half(self):
        val = oracle_k_star(_diag_effects_model(), 100_000, rng_seed=5)
        assert 0.49 <= val <= 0.5 + 1e-9

    def test_never_exceeds_k_star(self, rng):
        for seed in range(3):
            m = build_rotation_entangling(2, rng_seed=seed, noise=("mixed", 0.1))
            k = lipschitz(m).k_star
            assert oracle_k_star(m, 20_000, rng_seed=seed) <= k + 1e-9

    def test_size_guard(self):
        with pytest.raises(ValueError, match="guard"):
            oracle_k_star(_identity_model(5), 100, rng_seed=0)
