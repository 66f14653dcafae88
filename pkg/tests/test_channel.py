"""Kraus channels: named noises, embedding, evolution and the adjoint map."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfair import (
    CircuitChannel,
    DensityMatrix,
    KrausChannel,
    LocalOp,
    adjoint_apply,
    apply,
    embed,
    noise_channel,
)
from qfair.gates import X, Z, gate_matrix
from conftest import random_density


def _one(kind, targets, **kw):
    return LocalOp(kind, targets, **kw)


class TestNoiseChannel:
    def test_bit_flip_zero_probability_is_identity(self):
        ch = noise_channel("bit-flip", 0.0)
        assert len(ch.kraus_ops) == 2
        np.testing.assert_allclose(ch.kraus_ops[0], np.eye(2))
        np.testing.assert_allclose(ch.kraus_ops[1], np.zeros((2, 2)))

    def test_full_depolarizing_sends_everything_to_maximally_mixed(self, rng):
        circ = CircuitChannel(1, (_one("noise", (0,), name="depolarizing", p=1.0),))
        for _ in range(5):
            out = apply(circ, random_density(1, rng))
            np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-12)

    def test_bit_flip_quarter_on_zero_state(self):
        # hand Kraus sum: (1-p)|0⟩⟨0| + p X|0⟩⟨0|X = diag(0.75, 0.25)
        circ = CircuitChannel(1, (_one("noise", (0,), name="bit-flip", p=0.25),))
        out = apply(circ, DensityMatrix(1, np.diag([1.0, 0.0])))
        np.testing.assert_allclose(out.matrix, np.diag([0.75, 0.25]), atol=1e-14)

    def test_unknown_name_and_bad_probability(self):
        with pytest.raises(ValueError):
            noise_channel("amplitude-damping", 0.1)
        with pytest.raises(ValueError):
            noise_channel("bit-flip", 1.5)

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(["bit-flip", "phase-flip", "bit-phase-flip", "depolarizing", "mixed"]),
           st.floats(0.0, 1.0))
    def test_all_noises_trace_preserving(self, name, p):
        ch = noise_channel(name, p)  # constructor validates Σ K†K = I
        assert ch.num_qubits == 1

    def test_mixed_is_composition_of_three(self):
        p = 0.2
        ch = noise_channel("mixed", p)
        rho = np.array([[0.7, 0.2 + 0.1j], [0.2 - 0.1j, 0.3]])
        got = sum(k @ rho @ k.conj().T for k in ch.kraus_ops)
        step = rho
        for name in ("bit-flip", "phase-flip", "depolarizing"):
            ks = noise_channel(name, p).kraus_ops
            step = sum(k @ step @ k.conj().T for k in ks)
        np.testing.assert_allclose(got, step, atol=1e-14)


class TestEmbed:
    def test_x_on_first_of_two(self):
        ch = embed(_one("gate", (0,), name="x"), 2)
        np.testing.assert_allclose(ch.kraus_ops[0], np.kron(X, np.eye(2)))

    def test_zero_probability_noise_embeds_to_identity(self):
        ch = embed(_one("noise", (1,), name="phase-flip", p=0.0), 2)
        np.testing.assert_allclose(ch.kraus_ops[0], np.eye(4))
        np.testing.assert_allclose(ch.kraus_ops[1], np.zeros((4, 4)), atol=0)

    def test_bit_flip_half_on_second_qubit(self):
        # ½(|00⟩⟨00| + |01⟩⟨01|) by hand Kraus sum
        ch = embed(_one("noise", (1,), name="bit-flip", p=0.5), 2)
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0
        out = sum(k @ rho @ k.conj().T for k in ch.kraus_ops)
        np.testing.assert_allclose(out, np.diag([0.5, 0.5, 0.0, 0.0]), atol=1e-15)

    def test_two_qubit_gate_reversed_targets(self, rng):
        # embedding honors target order: crx on (1, 0) vs (0, 1) differ
        a = embed(_one("gate", (0, 1), name="crx", params=(0.7,)), 2).kraus_ops[0]
        b = embed(_one("gate", (1, 0), name="crx", params=(0.7,)), 2).kraus_ops[0]
        assert not np.allclose(a, b)
        swap = np.eye(4)[[0, 2, 1, 3]]
        np.testing.assert_allclose(b, swap @ a @ swap, atol=1e-14)

    def test_out_of_range_target(self):
        with pytest.raises(ValueError, match="out of range"):
            embed(_one("gate", (3,), name="x"), 2)

    def test_matches_direct_application(self, rng):
        op = _one("noise", (1,), name="depolarizing", p=0.3)
        full = embed(op, 3)
        rho = random_density(3, rng)
        direct = apply(CircuitChannel(3, (op,)), rho).matrix
        via_embed = sum(k @ rho.matrix @ k.conj().T for k in full.kraus_ops)
        np.testing.assert_allclose(direct, via_embed, atol=1e-13)


class TestApply:
    def test_empty_circuit_is_identity(self, rng):
        rho = random_density(2, rng)
        np.testing.assert_allclose(apply(CircuitChannel(2), rho).matrix, rho.matrix)

    def test_single_x_flips_zero(self):
        circ = CircuitChannel(1, (_one("gate", (0,), name="x"),))
        out = apply(circ, DensityMatrix(1, np.diag([1.0, 0.0])))
        np.testing.assert_allclose(out.matrix, np.diag([0.0, 1.0]), atol=1e-15)

    def test_single_qubit_depolarizing_formula(self, rng):
        # E_D(ρ) = (1-p)ρ + p·I/2, entrywise at p = 0.3
        p = 0.3
        circ = CircuitChannel(1, (_one("noise", (0,), name="depolarizing", p=p),))
        rho = random_density(1, rng)
        out = apply(circ, rho)
        np.testing.assert_allclose(
            out.matrix, (1 - p) * rho.matrix + p * np.eye(2) / 2, atol=1e-14
        )

    def test_global_depolarizing_formula(self, rng):
        p = 0.3
        circ = CircuitChannel(2, (_one("noise", (), name="global-depolarizing", p=p),))
        rho = random_density(2, rng)
        out = apply(circ, rho)
        np.testing.assert_allclose(
            out.matrix, (1 - p) * rho.matrix + p * np.eye(4) / 4, atol=1e-14
        )

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            apply(CircuitChannel(2), random_density(1, rng))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_trace_and_psd_preserved(self, seed):
        rng = np.random.default_rng(seed)
        layers = (
            _one("gate", (0,), name="rx", params=(rng.uniform(0, 2 * np.pi),)),
            _one("gate", (0, 1), name="rxx", params=(rng.uniform(0, 2 * np.pi),)),
            _one("noise", (1,), name="mixed", p=rng.uniform(0, 1)),
            _one("noise", (0,), name="depolarizing", p=rng.uniform(0, 1)),
        )
        out = apply(CircuitChannel(2, layers), random_density(2, rng))
        assert abs(np.trace(out.matrix).real - 1) < 1e-10
        assert np.linalg.eigvalsh(out.matrix)[0] > -1e-9


class TestAdjointApply:
    def _random_circuit(self, rng, n=2):
        layers = []
        for _ in range(4):
            kind = rng.integers(3)
            if kind == 0:
                layers.append(_one("gate", (int(rng.integers(n)),), name="ry",
                                   params=(rng.uniform(0, 2 * np.pi),)))
            elif kind == 1:
                a, b = rng.choice(n, size=2, replace=False)
                layers.append(_one("gate", (int(a), int(b)), name="rzz",
                                   params=(rng.uniform(0, 2 * np.pi),)))
            else:
                layers.append(_one("noise", (int(rng.integers(n)),), name="bit-flip",
                                   p=float(rng.uniform(0, 1))))
        return CircuitChannel(n, tuple(layers))

    def test_identity_effect_is_fixed_point(self, rng):
        for _ in range(5):
            circ = self._random_circuit(rng)
            out = adjoint_apply(circ, np.eye(4))
            np.testing.assert_allclose(out, np.eye(4), atol=1e-10)

    def test_unitary_layer_conjugates(self):
        theta = 1.1
        circ = CircuitChannel(1, (_one("gate", (0,), name="rx", params=(theta,)),))
        effect = np.diag([1.0, 0.0]).astype(complex)
        u = gate_matrix("rx", (theta,))
        np.testing.assert_allclose(
            adjoint_apply(circ, effect), u.conj().T @ effect @ u, atol=1e-14
        )

    def test_bit_flip_effect_by_hand(self):
        # E†(|0⟩⟨0|) = (1-p)|0⟩⟨0| + p|1⟩⟨1| at p = 0.1
        circ = CircuitChannel(1, (_one("noise", (0,), name="bit-flip", p=0.1),))
        out = adjoint_apply(circ, np.diag([1.0, 0.0]))
        np.testing.assert_allclose(out, np.diag([0.9, 0.1]), atol=1e-15)

    def test_rejects_non_hermitian(self):
        circ = CircuitChannel(1)
        with pytest.raises(ValueError, match="Hermitian"):
            adjoint_apply(circ, np.array([[0, 1], [0, 0]], dtype=complex))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_duality_with_apply(self, seed):
        # tr(M · E(ρ)) = tr(E†(M) · ρ)
        rng = np.random.default_rng(seed)
        circ = self._random_circuit(rng)
        rho = random_density(2, rng)
        h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        effect = h + h.conj().T
        lhs = np.trace(effect @ apply(circ, rho).matrix)
        rhs = np.trace(adjoint_apply(circ, effect) @ rho.matrix)
        assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_unital_and_positivity_preserving(self, rng):
        for _ in range(5):
            circ = self._random_circuit(rng)
            h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            psd = h @ h.conj().T
            out = adjoint_apply(circ, psd)
            assert np.linalg.eigvalsh(out)[0] > -1e-9


class TestValidation:
    def test_kraus_channel_completeness_enforced(self):
        with pytest.raises(ValueError, match="trace preserving"):
            KrausChannel(1, (np.eye(2) * 0.5,))

    def test_gate_must_be_unitary_via_raw(self):
        with pytest.raises(ValueError, match="trace preserving"):
            LocalOp("raw_kraus", (0,), matrices=(np.array([[1, 1], [0, 1]], dtype=complex),))

    def test_raw_unitary_accepted(self):
        LocalOp("raw_kraus", (0,), matrices=(Z,))

    def test_gate_arity_checked(self):
        with pytest.raises(ValueError, match="arity"):
            LocalOp("gate", (0, 1), name="x")

    def test_circuit_rejects_bad_targets(self):
        with pytest.raises(ValueError, match="out of range"):
            CircuitChannel(1, (_one("gate", (1,), name="x"),))
