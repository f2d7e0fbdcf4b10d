"""Dense complex-matrix foundation: tensor products, norms, commutators,
partial traces, Hermitian matrix functions, and seeded random sampling.

Operators are plain 2-d complex128 numpy arrays.  The bipartite index
convention is first-factor major throughout the package: the product basis
vector |i> (x) |k> of C^d1 (x) C^d2 sits at flat index i*d2 + k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "BipartiteOperator",
    "DensityMatrix",
    "as_matrix",
    "check_seed",
    "make_rng",
    "derive_seed",
    "kron",
    "op_norm",
    "commutator",
    "partial_trace_2",
    "embed_left",
    "herm_expm",
    "haar_unitary",
    "ginibre",
    "swap_matrix",
]

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)

#: relative Hermitian-defect bound accepted by herm_expm
HERMITICITY_TOL = 1e-10

_DENSITY_TOL = 1e-12


def as_matrix(m, *, square: bool = False) -> np.ndarray:
    """Coerce to a 2-d complex128 array, rejecting NaN/Inf entries."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if a.size == 0:
        raise ValueError("empty matrix")
    if not np.isfinite(a).all():
        raise ValueError("matrix has non-finite entries")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def check_seed(seed) -> int:
    """Validate a 64-bit unsigned seed and return it as an int."""
    s = int(seed)
    if not 0 <= s < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return s


def make_rng(seed, *key: int) -> np.random.Generator:
    """Generator for `seed`; extra key indices select independent child streams.

    A Generator passed through is returned as-is (no key allowed), so
    sampling helpers can share one stream.
    """
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot derive a child stream from a Generator")
        return seed
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def derive_seed(seed, *key: int) -> int:
    """Deterministic 64-bit child seed for (seed, key...)."""
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class BipartiteOperator:
    """Square operator on C^d1 (x) C^d2 with the tensor split recorded.

    Basis ordering is first-factor major: |i> (x) |k> has flat index i*d2 + k.
    """

    matrix: np.ndarray
    d1: int
    d2: int

    def __post_init__(self):
        m = as_matrix(self.matrix, square=True).copy()
        d1, d2 = int(self.d1), int(self.d2)
        if d1 < 1 or d2 < 1:
            raise ValueError("factor dimensions must be positive")
        if m.shape[0] != d1 * d2:
            raise ValueError(f"matrix dimension {m.shape[0]} does not equal d1*d2 = {d1 * d2}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", d2)

    @property
    def dim(self) -> int:
        return self.d1 * self.d2


@dataclass(frozen=True)
class DensityMatrix:
    """Positive semidefinite, unit-trace complex matrix (a state)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, square=True).copy()
        scale = max(1.0, float(np.abs(m).max()))
        herm_defect = float(np.abs(m - m.conj().T).max())
        if herm_defect > _DENSITY_TOL * scale:
            raise ValueError(f"state is not Hermitian (defect {herm_defect:.3e})")
        w = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        if float(w.min()) < -_DENSITY_TOL:
            raise ValueError(f"state has negative eigenvalue {float(w.min()):.3e}")
        tr = complex(m.trace())
        if abs(tr - 1.0) > _DENSITY_TOL:
            raise ValueError(f"state trace is {tr}, expected 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(int(d), dtype=np.complex128) / int(d))

    @classmethod
    def pure_basis(cls, d: int, k: int = 0) -> "DensityMatrix":
        """|k><k| in the computational basis of C^d."""
        d, k = int(d), int(k)
        if not 0 <= k < d:
            raise ValueError(f"basis index {k} outside dimension {d}")
        m = np.zeros((d, d), dtype=np.complex128)
        m[k, k] = 1.0
        return cls(m)


def kron(a, b) -> np.ndarray:
    """Kronecker product, first factor major: out[i*p+k, j*q+l] = a[i,j] b[k,l]."""
    return np.kron(as_matrix(a), as_matrix(b))


def op_norm(m) -> float:
    """Operator (spectral) norm: the largest singular value."""
    return float(np.linalg.norm(as_matrix(m), 2))


def commutator(a, b) -> np.ndarray:
    """[A, B] = AB - BA."""
    a = as_matrix(a, square=True)
    b = as_matrix(b, square=True)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def partial_trace_2(a: BipartiteOperator) -> np.ndarray:
    """Unnormalized trace over the second factor; Tr_2(X (x) Y) = Tr(Y) X."""
    t = a.matrix.reshape(a.d1, a.d2, a.d1, a.d2)
    return np.einsum("ikjk->ij", t)


def embed_left(a_prime, d2: int) -> BipartiteOperator:
    """Lift A' on the first factor to A' (x) 1 on C^d1 (x) C^d2."""
    ap = as_matrix(a_prime, square=True)
    d2 = int(d2)
    if d2 < 1:
        raise ValueError("d2 must be positive")
    return BipartiteOperator(np.kron(ap, np.eye(d2, dtype=np.complex128)), ap.shape[0], d2)


def herm_expm(h, scale: complex) -> np.ndarray:
    """exp(scale*H) for Hermitian H, via eigendecomposition.

    Purely imaginary `scale` yields a unitary result.
    """
    m = as_matrix(h, square=True)
    scale = complex(scale)
    defect = float(np.abs(m - m.conj().T).max())
    if defect > HERMITICITY_TOL * max(1.0, float(np.abs(m).max())):
        raise ValueError(f"input is not Hermitian (defect {defect:.3e})")
    w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
    return (v * np.exp(scale * w)) @ v.conj().T


def haar_unitary(d: int, seed) -> np.ndarray:
    """Haar-distributed d x d unitary.

    Complex Gaussian matrix, QR-orthonormalized, each column rephased so the
    triangular factor has positive diagonal (removes the QR gauge freedom).
    """
    d = int(d)
    if d < 1:
        raise ValueError("d must be positive")
    rng = make_rng(seed)
    z = ginibre(d, d, rng)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    diag[diag == 0] = 1.0
    return q * (diag / np.abs(diag))


def ginibre(rows: int, cols: int, seed) -> np.ndarray:
    """Matrix of iid standard complex Gaussians (Re/Im variance 1/2 each).

    The induced distribution is invariant under left and right unitary
    multiplication.
    """
    rows, cols = int(rows), int(cols)
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    rng = make_rng(seed)
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return np.sqrt(0.5) * (re + 1j * im)


def swap_matrix(d: int) -> np.ndarray:
    """Flip operator on C^d (x) C^d: |i> (x) |k>  ->  |k> (x) |i>."""
    d = int(d)
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for k in range(d):
            s[i * d + k, k * d + i] = 1.0
    return s
