"""Independent brute-force oracles for the test suite.

These deliberately avoid the package's code paths: Kronecker products and
partial traces are explicit index loops, region maps go through permutation
matrices and a single bipartite contraction, and defect suprema come from
dense parameter-space search with nested refinement.
"""

from __future__ import annotations

import math

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def kron_loop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Four-index loop over the definition of the Kronecker product."""
    p, q = a.shape
    r, s = b.shape
    out = np.zeros((p * r, q * s), dtype=complex)
    for i in range(p):
        for j in range(q):
            for k in range(r):
                for l in range(s):
                    out[i * r + k, j * s + l] = a[i, j] * b[k, l]
    return out


def partial_trace_2_loop(m: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Double-index sum over the definition of the second-factor trace."""
    out = np.zeros((d1, d1), dtype=complex)
    for i in range(d1):
        for j in range(d1):
            for k in range(d2):
                out[i, j] += m[i * d2 + k, j * d2 + k]
    return out


def opnorm_eig(m: np.ndarray) -> float:
    """Largest singular value via a Hermitian eigensolve of M*M."""
    w = np.linalg.eigvalsh(m.conj().T @ m)
    return float(np.sqrt(max(float(w[-1]), 0.0)))


def lift_second(u: np.ndarray, d1: int) -> np.ndarray:
    """Block-diagonal 1 (x) U, built by direct placement."""
    d2 = u.shape[0]
    out = np.zeros((d1 * d2, d1 * d2), dtype=complex)
    for i in range(d1):
        out[i * d2 : (i + 1) * d2, i * d2 : (i + 1) * d2] = u
    return out


def _batch_commutator_sigma(amat: np.ndarray, d1: int, us: np.ndarray) -> np.ndarray:
    """sigma_max([A, 1 (x) U_b]) for a stack of d2 x d2 matrices."""
    d2 = us.shape[-1]
    w = np.zeros(us.shape[:-2] + (d1 * d2, d1 * d2), dtype=complex)
    for i in range(d1):
        w[..., i * d2 : (i + 1) * d2, i * d2 : (i + 1) * d2] = us
    c = amat @ w - w @ amat
    return np.linalg.svd(c, compute_uv=False)[..., 0]


def defect_sup_2x2(amat: np.ndarray, n_coarse: int = 90, rounds: int = 9, top_k: int = 4) -> float:
    """sup over U(2) of ||[A, 1 (x) U]|| by dense search plus refinement.

    Chart reduction: every U(2) element is e^{i phi}(cos t + i sin t m.sigma)
    for a unit vector m; the phase and the identity component drop out of
    the commutator, so ||[A, 1 (x) U]|| = |sin t| ||[A, 1 (x) m.sigma]|| and
    the supremum is the maximum of ||[A, 1 (x) m.sigma]|| over the sphere.
    """
    d1 = amat.shape[0] // 2

    def evaluate(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
        mx = np.sin(theta) * np.cos(phi)
        my = np.sin(theta) * np.sin(phi)
        mz = np.cos(theta)
        us = (
            mx[..., None, None] * SX
            + my[..., None, None] * SY
            + mz[..., None, None] * SZ
        )
        return _batch_commutator_sigma(amat, d1, us)

    th = np.linspace(0.0, np.pi, n_coarse)
    ph = np.linspace(0.0, 2.0 * np.pi, 2 * n_coarse, endpoint=False)
    tg, pg = np.meshgrid(th, ph, indexing="ij")
    vals = evaluate(tg, pg)
    flat = np.argsort(vals, axis=None)[-top_k:]
    best = float(vals.max())
    for idx in flat:
        i, j = np.unravel_index(idx, vals.shape)
        t0, p0 = float(tg[i, j]), float(pg[i, j])
        wt = np.pi / n_coarse
        for _ in range(rounds):
            tt = np.linspace(t0 - wt, t0 + wt, 17)
            pp = np.linspace(p0 - wt, p0 + wt, 17)
            tg2, pg2 = np.meshgrid(tt, pp, indexing="ij")
            v2 = evaluate(tg2, pg2)
            k = np.unravel_index(np.argmax(v2), v2.shape)
            if float(v2[k]) > best:
                best = float(v2[k])
            t0, p0 = float(tg2[k]), float(pg2[k])
            wt *= 0.25
    return best


def haar_batch(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of Haar unitaries (batched QR with phase correction)."""
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.einsum("nii->ni", r).copy()
    diag[diag == 0] = 1.0
    return q * (diag / np.abs(diag))[:, None, :]


def haar_grid_max(amat: np.ndarray, d1: int, d2: int, n: int, rng: np.random.Generator) -> float:
    """Max commutator norm over n Haar samples, evaluated in batches."""
    best = 0.0
    left = n
    while left > 0:
        take = min(8192, left)
        left -= take
        us = haar_batch(d2, take, rng)
        best = max(best, float(_batch_commutator_sigma(amat, d1, us).max()))
    return best


def permutation_to_front(dims: tuple[int, ...], front: tuple[int, ...]) -> tuple[np.ndarray, list[int]]:
    """Permutation matrix moving the `front` sites first (others keep order)."""
    n = len(dims)
    order = list(front) + [x for x in range(n) if x not in set(front)]
    total = math.prod(dims)
    radix = [dims[s] for s in order]
    p = np.zeros((total, total))
    for f in range(total):
        digits = []
        rem = f
        for d in reversed(dims):
            digits.append(rem % d)
            rem //= d
        digits.reverse()
        g = 0
        for pos, site in enumerate(order):
            g = g * radix[pos] + digits[site]
        p[g, f] = 1.0
    return p, order


def e_region_oracle(
    a: np.ndarray,
    region: tuple[int, ...],
    dims: tuple[int, ...],
    states: list[np.ndarray],
) -> np.ndarray:
    """Sitewise state slice via permutation matrices and one contraction.

    Moves the region factors to the front with an explicit permutation
    matrix, contracts the complement block against the tensor product of
    the reference states with stride slicing, and permutes back.
    """
    region = tuple(sorted(region))
    comp = [x for x in range(len(dims)) if x not in set(region)]
    if not comp:
        return a.copy()
    p, order = permutation_to_front(dims, region)
    b = p @ a @ p.T
    dreg = math.prod(dims[s] for s in region) if region else 1
    dcomp = math.prod(dims[x] for x in comp)
    k = np.eye(1, dtype=complex)
    for x in comp:
        k = np.kron(k, states[x])
    sliced = np.zeros((dreg, dreg), dtype=complex)
    for m in range(dcomp):
        for n_ in range(dcomp):
            if k[m, n_] != 0:
                sliced += k[m, n_] * b[n_::dcomp, m::dcomp]
    return p.T @ np.kron(sliced, np.eye(dcomp, dtype=complex)) @ p
