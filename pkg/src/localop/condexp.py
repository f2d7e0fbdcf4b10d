"""Conditional-expectation maps on bipartite operators: the tracial
(normalized partial trace) slice, state slices, exact twirls over projected
unitary subgroups, Monte-Carlo twirls, and Choi-matrix positivity checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .opcore import (
    BipartiteOperator,
    DensityMatrix,
    as_matrix,
    ginibre,
    haar_unitary,
    make_rng,
    op_norm,
    partial_trace_2,
)

__all__ = [
    "ProjectedSubgroup",
    "ChoiMatrix",
    "e_tr",
    "e_rho",
    "mc_twirl",
    "exact_projected_twirl",
    "choi_of_map",
    "is_cp",
]

PROJECTOR_TOL = 1e-10

_LINEARITY_PROBE_SEED = 271828


def e_tr(a: BipartiteOperator) -> np.ndarray:
    """Normalized partial trace over the second factor (the tracial slice)."""
    return partial_trace_2(a) / a.d2


def e_rho(a: BipartiteOperator, rho: DensityMatrix) -> np.ndarray:
    """Slice the second factor with the state rho: X (x) Y -> Tr(rho Y) X.

    Contracts the d2 x d2 block <i| (x) 1 . A . |j> (x) 1 against rho, which
    needs O(d1^2 d2^2) work instead of a superoperator matrix.
    """
    if rho.d != a.d2:
        raise ValueError(f"state dimension {rho.d} does not match d2 = {a.d2}")
    t = a.matrix.reshape(a.d1, a.d2, a.d1, a.d2)
    return np.einsum("mn,injm->ij", rho.matrix, t)


def mc_twirl(a: BipartiteOperator, n_samples: int, seed) -> tuple[BipartiteOperator, float]:
    """Average (1 (x) U*) A (1 (x) U) over n Haar samples on the second factor.

    Returns the sample average together with max_i ||[A, 1 (x) U_i]||; by the
    triangle inequality over the samples this bounds ||A - average|| exactly.
    """
    n_samples = int(n_samples)
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = make_rng(seed)
    eye1 = np.eye(a.d1, dtype=np.complex128)
    acc = np.zeros_like(a.matrix)
    worst = 0.0
    for _ in range(n_samples):
        w = np.kron(eye1, haar_unitary(a.d2, rng))
        acc += w.conj().T @ (a.matrix @ w)
        worst = max(worst, op_norm(a.matrix @ w - w @ a.matrix))
    return BipartiteOperator(acc / n_samples, a.d1, a.d2), worst


@dataclass(frozen=True)
class ProjectedSubgroup:
    """Unitaries of H2 acting as the identity on ker P and arbitrarily on ran P."""

    d2: int
    projector: np.ndarray

    def __post_init__(self):
        p = as_matrix(self.projector, square=True).copy()
        d2 = int(self.d2)
        if p.shape[0] != d2:
            raise ValueError(f"projector is {p.shape[0]} x {p.shape[0]}, expected {d2}")
        if float(np.abs(p - p.conj().T).max()) > PROJECTOR_TOL:
            raise ValueError("projector is not Hermitian")
        if float(np.abs(p @ p - p).max()) > PROJECTOR_TOL:
            raise ValueError("projector is not idempotent")
        p.setflags(write=False)
        object.__setattr__(self, "projector", p)
        object.__setattr__(self, "d2", d2)

    @property
    def rank(self) -> int:
        return int(round(float(self.projector.trace().real)))

    def basis_split(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal column bases (range, kernel) of the projector."""
        p = self.projector
        _, v = np.linalg.eigh((p + p.conj().T) / 2.0)
        k = self.d2 - self.rank
        return v[:, k:], v[:, :k]

    def sample(self, seed) -> np.ndarray:
        """Haar draw from the subgroup: identity on ker P, Haar on ran P."""
        if self.rank == 0:
            return np.eye(self.d2, dtype=np.complex128)
        vr, vk = self.basis_split()
        w = haar_unitary(self.rank, seed)
        return vk @ vk.conj().T + vr @ w @ vr.conj().T


def exact_projected_twirl(a: BipartiteOperator, sub: ProjectedSubgroup) -> BipartiteOperator:
    """Closed-form average of (1 (x) U*) A (1 (x) U) over the projected subgroup.

    Block picture on H2 = ran P + ker P: the (ran, ran) block becomes its
    tracial slice (x) identity, both off-diagonal blocks average to zero
    (for rank 1 this is the circle average of a phase), and the (ker, ker)
    block is untouched.  Rank d2 gives the full twirl, rank 0 the identity.
    """
    if sub.d2 != a.d2:
        raise ValueError(f"subgroup dimension {sub.d2} does not match d2 = {a.d2}")
    r = sub.rank
    if r == 0:
        return a
    if r == a.d2:
        return BipartiteOperator(np.kron(e_tr(a), np.eye(a.d2, dtype=np.complex128)), a.d1, a.d2)
    vr, vk = sub.basis_split()
    eye1 = np.eye(a.d1, dtype=np.complex128)
    lr = np.kron(eye1, vr)  # isometry H1 (x) C^r -> H1 (x) H2
    lk = np.kron(eye1, vk)
    a_rr = lr.conj().T @ a.matrix @ lr
    x = partial_trace_2(BipartiteOperator(a_rr, a.d1, r)) / r
    out = lr @ np.kron(x, np.eye(r, dtype=np.complex128)) @ lr.conj().T
    out += lk @ (lk.conj().T @ a.matrix @ lk) @ lk.conj().T
    return BipartiteOperator(out, a.d1, a.d2)


@dataclass(frozen=True)
class ChoiMatrix:
    """Block matrix sum_ij Phi(E_ij) (x) E_ij of a linear map Phi."""

    matrix: np.ndarray
    d_in: int
    d_out: int

    def __post_init__(self):
        m = as_matrix(self.matrix, square=True).copy()
        d_in, d_out = int(self.d_in), int(self.d_out)
        if m.shape[0] != d_in * d_out:
            raise ValueError(f"Choi dimension {m.shape[0]} does not equal d_in*d_out = {d_in * d_out}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "d_in", d_in)
        object.__setattr__(self, "d_out", d_out)


def choi_of_map(phi: Callable[[np.ndarray], np.ndarray], d_in: int, d_out: int) -> ChoiMatrix:
    """Assemble the Choi matrix of phi over the matrix units of C^d_in.

    phi must be linear; that is probed on a fixed random combination and a
    violation raises ValueError, as does an inconsistent output shape.
    """
    d_in, d_out = int(d_in), int(d_out)
    if d_in < 1 or d_out < 1:
        raise ValueError("dimensions must be positive")

    def call(x: np.ndarray) -> np.ndarray:
        y = np.asarray(phi(x), dtype=np.complex128)
        if y.shape != (d_out, d_out):
            raise ValueError(f"map output has shape {y.shape}, expected {(d_out, d_out)}")
        return y

    rng = make_rng(_LINEARITY_PROBE_SEED)
    x, y = ginibre(d_in, d_in, rng), ginibre(d_in, d_in, rng)
    alpha = complex(*rng.standard_normal(2))
    beta = complex(*rng.standard_normal(2))
    lhs = call(alpha * x + beta * y)
    rhs = alpha * call(x) + beta * call(y)
    if float(np.abs(lhs - rhs).max()) > 1e-8 * max(1.0, float(np.abs(rhs).max())):
        raise ValueError("map failed the linearity probe")

    choi = np.zeros((d_out * d_in, d_out * d_in), dtype=np.complex128)
    for i in range(d_in):
        for j in range(d_in):
            unit = np.zeros((d_in, d_in), dtype=np.complex128)
            unit[i, j] = 1.0
            choi += np.kron(call(unit), unit)
    return ChoiMatrix(choi, d_in, d_out)


def is_cp(choi: ChoiMatrix, tol: float) -> bool:
    """Whether the Choi matrix is positive semidefinite down to -tol.

    For finite-dimensional maps Choi positivity is equivalent to complete
    positivity; the matrix is hermitized first (it already is Hermitian for
    Hermiticity-preserving maps).
    """
    m = choi.matrix
    w = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
    return bool(float(w[0]) >= -float(tol))
