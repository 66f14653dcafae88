"""Exact matrix-product-operator machinery.

Operators on n qubits are stored as chains of site tensors with shape
(Dl, 2, 2, Dr): left bond, output (row) leg, input (column) leg, right
bond.  Nothing here truncates: splits keep every singular value above the
machine-noise floor relative to the largest, so contraction results agree
with dense linear algebra to roundoff.

Heisenberg absorption rules (operator M evolving through a layer):
  * 1-local maps never grow bonds,
  * adjacent 2-local maps merge the two sites, act on the blob, and split
    back with a rank-revealing SVD,
  * distant 2-local maps are split into a sum of site-local superoperator
    factors whose index is carried through the intervening bonds.
"""

import numpy as np

ZERO_CUTOFF = 1e-14


def identity_mpo(n: int) -> list[np.ndarray]:
    return [np.eye(2, dtype=complex).reshape(1, 2, 2, 1) for _ in range(n)]


def product_mpo(ops: list[np.ndarray]) -> list[np.ndarray]:
    return [np.asarray(op, dtype=complex).reshape(1, 2, 2, 1) for op in ops]


def mpo_trace(sites: list[np.ndarray]) -> complex:
    env = np.ones(1, dtype=complex)
    for w in sites:
        env = env @ np.trace(w, axis1=1, axis2=2)
    return complex(env[0])


def mpo_to_dense(sites: list[np.ndarray]) -> np.ndarray:
    """Contract to a full 2^n x 2^n matrix (tests and small systems only)."""
    t = sites[0][0]  # (2, 2, D)
    rows, cols = 2, 2
    for w in sites[1:]:
        t = np.einsum("rcb,bxyd->rxcyd", t.reshape(rows, cols, -1), w)
        rows, cols = rows * 2, cols * 2
        t = t.reshape(rows, cols, -1)
    return t[:, :, 0]


def dense_to_mpo(mat: np.ndarray, n: int) -> list[np.ndarray]:
    """Exact MPO of a dense 2^n x 2^n operator via sequential splits."""
    t = mat.reshape((2,) * (2 * n))
    # interleave row/col legs site by site: (r0, c0, r1, c1, ...)
    order = [ax for q in range(n) for ax in (q, n + q)]
    t = t.transpose(order).reshape(1, -1)
    sites = []
    left = 1
    for q in range(n - 1):
        t = t.reshape(left * 4, -1)
        u, s, vh = np.linalg.svd(t, full_matrices=False)
        rank = _rank(s)
        sites.append(u[:, :rank].reshape(left, 2, 2, rank))
        t = s[:rank, None] * vh[:rank]
        left = rank
    sites.append(t.reshape(left, 2, 2, 1))
    return sites


def mpo_add(a: list[np.ndarray], b: list[np.ndarray]) -> list[np.ndarray]:
    """Direct-sum block combination of two chains."""
    out = []
    n = len(a)
    for k, (wa, wb) in enumerate(zip(a, b)):
        la, ra = wa.shape[0], wa.shape[3]
        lb, rb = wb.shape[0], wb.shape[3]
        if n == 1:
            out.append(wa + wb)
            continue
        if k == 0:
            w = np.zeros((1, 2, 2, ra + rb), dtype=complex)
            w[:, :, :, :ra] = wa
            w[:, :, :, ra:] = wb
        elif k == n - 1:
            w = np.zeros((la + lb, 2, 2, 1), dtype=complex)
            w[:la] = wa
            w[la:] = wb
        else:
            w = np.zeros((la + lb, 2, 2, ra + rb), dtype=complex)
            w[:la, :, :, :ra] = wa
            w[la:, :, :, ra:] = wb
        out.append(w)
    return out


def _rank(s: np.ndarray) -> int:
    if s.size == 0 or s[0] <= 0:
        return 1
    return max(int(np.count_nonzero(s > s[0] * ZERO_CUTOFF)), 1)


def heisenberg_1q(sites, kraus: list[np.ndarray], t: int) -> None:
    """M ← Σ_j K_j† M K_j on qubit t; bonds unchanged.  In place."""
    w = sites[t]
    acc = np.zeros_like(w)
    for k in kraus:
        acc += np.einsum("ar,LabR,bc->LrcR", k.conj(), w, k)
    sites[t] = acc


def heisenberg_2q_adjacent(sites, kraus: list[np.ndarray], t: int) -> None:
    """Two-site Heisenberg map on (t, t+1) via merge, act, exact split.

    Kraus matrices are 4x4 with qubit t as the high bit of the gate index.
    """
    w1, w2 = sites[t], sites[t + 1]
    blob = np.einsum("LabM,McdR->LacbdR", w1, w2)  # (L, a1, a2, b1, b2, R)
    l, r = blob.shape[0], blob.shape[5]
    blob = blob.reshape(l, 4, 4, r)
    acc = np.zeros_like(blob)
    for k in kraus:
        acc += np.einsum("ar,LabR,bc->LrcR", k.conj(), blob, k)
    acc = acc.reshape(l, 2, 2, 2, 2, r)  # (L, r1, r2, c1, c2, R)
    mat = acc.transpose(0, 1, 3, 2, 4, 5).reshape(l * 4, 4 * r)  # (L,r1,c1)x(r2,c2,R)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    rank = _rank(s)
    sq = np.sqrt(s[:rank])
    sites[t] = (u[:, :rank] * sq).reshape(l, 2, 2, rank)
    sites[t + 1] = (sq[:, None] * vh[:rank]).reshape(rank, 2, 2, r)


def heisenberg_2q_distant(sites, kraus: list[np.ndarray], t1: int, t2: int) -> None:
    """Heisenberg map on non-adjacent (t1 < t2); factor index carried through.

    The 16x16 superoperator M ↦ Σ K† M K is SVD-split between the t1 legs
    (r1,c1,a1,b1) and the t2 legs, giving Σ_k P_k ⊗ Q_k with at most 16
    terms; k rides along the intervening bonds.
    """
    s_op = np.zeros((16, 16), dtype=complex)
    for k in kraus:
        kt = k.reshape(2, 2, 2, 2)  # kt[a1, a2, r1, r2] = K[(a1 a2), (r1 r2)]
        contrib = np.einsum("xurw,yvcd->rcxywduv", kt.conj(), kt)
        s_op += contrib.reshape(16, 16)
    u, s, vh = np.linalg.svd(s_op)
    rank = _rank(s)
    sq = np.sqrt(s[:rank])
    p_fac = (u[:, :rank] * sq).T.reshape(rank, 2, 2, 2, 2)  # [k, r, c, a, b]
    q_fac = (sq[:, None] * vh[:rank]).reshape(rank, 2, 2, 2, 2)

    w = sites[t1]
    sites[t1] = np.einsum("krcab,LabR->LrckR", p_fac, w).reshape(
        w.shape[0], 2, 2, rank * w.shape[3]
    )
    for q in range(t1 + 1, t2):
        w = sites[q]
        grown = np.einsum("km,LabR->kLabmR", np.eye(rank), w)
        sites[q] = grown.reshape(rank * w.shape[0], 2, 2, rank * w.shape[3])
    w = sites[t2]
    sites[t2] = np.einsum("krcab,LabR->kLrcR", q_fac, w).reshape(
        rank * w.shape[0], 2, 2, w.shape[3]
    )


def global_depolarizing_mpo(sites, p: float) -> list[np.ndarray]:
    """M ← (1−p) M + p tr(M)/N · I, as an exact MPO sum."""
    n = len(sites)
    tr = mpo_trace(sites)
    scaled = [w.copy() for w in sites]
    scaled[0] = scaled[0] * (1 - p)
    eye = identity_mpo(n)
    eye[0] = eye[0] * (p * tr / 2**n)
    return compress(mpo_add(scaled, eye))


def compress(sites: list[np.ndarray]) -> list[np.ndarray]:
    """Exact two-sweep canonicalization dropping only machine-zero modes."""
    sites = [w.copy() for w in sites]
    n = len(sites)
    for k in range(n - 1):
        w = sites[k]
        l, r = w.shape[0], w.shape[3]
        q, rmat = np.linalg.qr(w.reshape(l * 4, r))
        sites[k] = q.reshape(l, 2, 2, q.shape[1])
        sites[k + 1] = np.einsum("ab,bxyR->axyR", rmat, sites[k + 1])
    for k in range(n - 1, 0, -1):
        w = sites[k]
        l, r = w.shape[0], w.shape[3]
        u, s, vh = np.linalg.svd(w.reshape(l, 4 * r), full_matrices=False)
        rank = _rank(s)
        sites[k] = vh[:rank].reshape(rank, 2, 2, r)
        carry = u[:, :rank] * s[:rank]
        sites[k - 1] = np.einsum("LxyB,Ba->Lxya", sites[k - 1], carry)
    return sites


def max_bond(sites: list[np.ndarray]) -> int:
    return max(w.shape[3] for w in sites)


def matvec_tensors(sites: list[np.ndarray]) -> list[np.ndarray]:
    """Per-site sweep matrices: rows indexed (r, Dr), columns (Dl, c)."""
    return [
        np.ascontiguousarray(
            w.transpose(1, 3, 0, 2).reshape(2 * w.shape[3], w.shape[0] * 2)
        )
        for w in sites
    ]


def matvec(wmats: list[np.ndarray], v: np.ndarray, step_fn) -> np.ndarray:
    """Apply the MPO to a dense vector by sweeping qubit-wise."""
    t = v.reshape(1, 1, v.shape[0])
    for wm in wmats:
        p, d, q = t.shape
        t = t.reshape(p, d * 2, q // 2)
        t = step_fn(t, wm)  # (P, 2*Dr, Q/2)
        t = t.reshape(p * 2, wm.shape[0] // 2, q // 2)
    return t.reshape(-1)
