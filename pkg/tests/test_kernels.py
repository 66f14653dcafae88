"""The numba and numpy kernel implementations must be interchangeable."""

import numpy as np
import pytest

from qfair.kernels import BACKEND, numpy_impl

try:
    from qfair.kernels import numba_impl
    IMPLS = [("numpy", numpy_impl), ("numba", numba_impl)]
except ImportError:  # pragma: no cover
    IMPLS = [("numpy", numpy_impl)]


def _rand_state(rng, n):
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return v / np.linalg.norm(v)


def _rand_unitary(rng, d):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return np.linalg.qr(a)[0]


def _dense_1q(u, n, t):
    full = np.array([[1.0]])
    for q in range(n):
        full = np.kron(full, u if q == t else np.eye(2))
    return full


def test_backend_selected():
    assert BACKEND in ("numba", "numpy")


@pytest.mark.parametrize("name,impl", IMPLS)
@pytest.mark.parametrize("n,t", [(1, 0), (3, 0), (3, 2), (5, 3)])
def test_apply_1q_matches_dense(name, impl, n, t, rng):
    u = _rand_unitary(rng, 2)
    v = _rand_state(rng, n)
    np.testing.assert_allclose(impl.apply_1q(v, u, n, t), _dense_1q(u, n, t) @ v, atol=1e-12)


@pytest.mark.parametrize("name,impl", IMPLS)
@pytest.mark.parametrize("t1,t2", [(0, 1), (1, 0), (0, 3), (3, 1), (2, 3)])
def test_apply_2q_matches_numpy_reference(name, impl, t1, t2, rng):
    n = 4
    u = _rand_unitary(rng, 4)
    v = _rand_state(rng, n)
    got = impl.apply_2q(v, u, n, t1, t2)
    ref = numpy_impl.apply_2q(v, u, n, t1, t2)
    np.testing.assert_allclose(got, ref, atol=1e-12)


def test_apply_2q_respects_target_order(rng):
    # crx-style gate: control on the first listed target
    u = np.eye(4, dtype=complex)
    u[2:, 2:] = _rand_unitary(rng, 2)
    v = _rand_state(rng, 2)
    a = numpy_impl.apply_2q(v, u, 2, 0, 1)
    b = numpy_impl.apply_2q(v, u, 2, 1, 0)
    assert not np.allclose(a, b)


@pytest.mark.parametrize("name,impl", IMPLS)
def test_apply_kq_three_qubit_block(name, impl, rng):
    n = 5
    u = _rand_unitary(rng, 8)
    v = _rand_state(rng, n)
    got = numpy_impl.apply_kq(v, u, n, (0, 2, 4))
    # reference through sequential basis expansion
    full = np.zeros((2**n, 2**n), dtype=complex)
    for col in range(2**n):
        e = np.zeros(2**n, dtype=complex)
        e[col] = 1.0
        full[:, col] = numpy_impl.apply_kq(e, u, n, (0, 2, 4))
    np.testing.assert_allclose(got, full @ v, atol=1e-12)
    np.testing.assert_allclose(full @ full.conj().T, np.eye(2**n), atol=1e-10)


@pytest.mark.parametrize("name,impl", IMPLS)
@pytest.mark.parametrize("p,k,r,q", [(1, 1, 1, 2), (4, 6, 3, 8), (16, 8, 8, 4)])
def test_mpo_step_is_batched_matmul(name, impl, p, k, r, q, rng):
    t3 = rng.standard_normal((p, k, q)) + 1j * rng.standard_normal((p, k, q))
    w = rng.standard_normal((r, k)) + 1j * rng.standard_normal((r, k))
    got = impl.mpo_step(t3, w)
    ref = np.einsum("rk,pkq->prq", w, t3)
    np.testing.assert_allclose(got, ref, atol=1e-12)
