"""Finite chains of quantum sites with product reference states: region
embeddings, sitewise state-slice maps (a compatible family of conditional
expectations), Heisenberg-picture time evolution, and localization-error
curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .opcore import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    as_matrix,
    herm_expm,
    op_norm,
)

__all__ = [
    "MAX_TOTAL_DIM",
    "Region",
    "LatticeSystem",
    "ChainHamiltonian",
    "heisenberg_hamiltonian",
    "hamiltonian_matrix",
    "embed_region",
    "e_region",
    "evolve",
    "localization_curve",
]

#: dense matrix exponentials stay feasible up to this total dimension
MAX_TOTAL_DIM = 4096

_TERM_HERM_TOL = 1e-10


@dataclass(frozen=True)
class Region:
    """Sorted set of site indices (may be empty)."""

    sites: tuple[int, ...]

    def __post_init__(self):
        sites = tuple(sorted(int(s) for s in self.sites))
        if len(set(sites)) != len(sites):
            raise ValueError("region has duplicate sites")
        if sites and sites[0] < 0:
            raise ValueError(f"negative site index {sites[0]}")
        object.__setattr__(self, "sites", sites)

    def __len__(self) -> int:
        return len(self.sites)


def _as_region(region, n_sites: int) -> Region:
    reg = region if isinstance(region, Region) else Region(tuple(region))
    if reg.sites and reg.sites[-1] >= n_sites:
        raise ValueError(f"site index {reg.sites[-1]} outside chain of {n_sites} sites")
    return reg


@dataclass(frozen=True)
class LatticeSystem:
    """Ordered chain of finite-dimensional sites with a product reference state."""

    site_dims: tuple[int, ...]
    site_states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        states = tuple(self.site_states)
        if not dims:
            raise ValueError("chain needs at least one site")
        if any(d < 1 for d in dims):
            raise ValueError("site dimensions must be positive")
        if len(states) != len(dims):
            raise ValueError(f"{len(states)} site states for {len(dims)} sites")
        for x, (d, st) in enumerate(zip(dims, states)):
            if not isinstance(st, DensityMatrix):
                raise TypeError(f"site state {x} is not a DensityMatrix")
            if st.d != d:
                raise ValueError(f"state at site {x} has dimension {st.d}, expected {d}")
        total = math.prod(dims)
        if total > MAX_TOTAL_DIM:
            raise ValueError(f"total dimension {total} exceeds the dense guard {MAX_TOTAL_DIM}")
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "site_states", states)

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    @property
    def dim(self) -> int:
        return math.prod(self.site_dims)

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "LatticeSystem":
        dims = tuple(int(d) for d in dims)
        return cls(dims, tuple(DensityMatrix.maximally_mixed(d) for d in dims))

    @classmethod
    def pure_basis(cls, dims: Sequence[int], k: int = 0) -> "LatticeSystem":
        dims = tuple(int(d) for d in dims)
        return cls(dims, tuple(DensityMatrix.pure_basis(d, k) for d in dims))


@dataclass(frozen=True)
class ChainHamiltonian:
    """Nearest-neighbour terms: (left site x, Hermitian matrix on H_x (x) H_{x+1})."""

    terms: tuple[tuple[int, np.ndarray], ...]

    def __post_init__(self):
        normalized = []
        for x, mat in self.terms:
            x = int(x)
            if x < 0:
                raise ValueError(f"negative site index {x}")
            m = as_matrix(mat, square=True).copy()
            defect = float(np.abs(m - m.conj().T).max())
            if defect > _TERM_HERM_TOL * max(1.0, float(np.abs(m).max())):
                raise ValueError(f"term at site {x} is not Hermitian (defect {defect:.3e})")
            m.setflags(write=False)
            normalized.append((x, m))
        object.__setattr__(self, "terms", tuple(normalized))


def heisenberg_hamiltonian(n_sites: int) -> ChainHamiltonian:
    """Isotropic nearest-neighbour Heisenberg coupling for a qubit chain."""
    n_sites = int(n_sites)
    if n_sites < 2:
        raise ValueError("need at least two sites")
    hh = (np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y) + np.kron(PAULI_Z, PAULI_Z)) / 4.0
    return ChainHamiltonian(tuple((x, hh) for x in range(n_sites - 1)))


def embed_region(a_loc, region, sys: LatticeSystem) -> np.ndarray:
    """Extend an operator on the region's tensor factors by identity elsewhere.

    Axis permutations are done by index arithmetic on the 2n-leg tensor, not
    by permutation matrices.
    """
    reg = _as_region(region, sys.n_sites)
    a_loc = as_matrix(a_loc, square=True)
    dims = sys.site_dims
    n = sys.n_sites
    dreg = math.prod(dims[s] for s in reg.sites) if reg.sites else 1
    if a_loc.shape[0] != dreg:
        raise ValueError(f"operator dimension {a_loc.shape[0]} does not match region dimension {dreg}")
    in_region = set(reg.sites)
    comp = [x for x in range(n) if x not in in_region]
    if not comp:
        return a_loc.astype(np.complex128, copy=True)
    dcomp = math.prod(dims[x] for x in comp)
    full = np.kron(a_loc, np.eye(dcomp, dtype=np.complex128))
    order = list(reg.sites) + comp  # site carried by each tensor factor of `full`
    inv = np.argsort(order)
    axes = [dims[s] for s in order]
    t = full.reshape(axes + axes)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(sys.dim, sys.dim)


def e_region(a, region, sys: LatticeSystem) -> np.ndarray:
    """Contract every complement site with its reference state and re-embed.

    For the full region this is the identity; for maximally mixed reference
    states it reduces to the normalized partial trace over the complement.
    These maps are compatible: slicing to a region then to a subregion equals
    slicing to the subregion directly.
    """
    reg = _as_region(region, sys.n_sites)
    a = as_matrix(a, square=True)
    if a.shape[0] != sys.dim:
        raise ValueError(f"operator dimension {a.shape[0]} does not match chain dimension {sys.dim}")
    n = sys.n_sites
    dims = sys.site_dims
    in_region = set(reg.sites)
    comp = [x for x in range(n) if x not in in_region]
    if not comp:
        return a.astype(np.complex128, copy=True)
    t = a.reshape(dims + dims)
    # einsum with integer labels: row leg of site x is label x, column leg is
    # label n + x; contracting site x with rho pairs the row leg with rho's
    # second index and the column leg with its first (Tr(rho . block)).
    operands = [t, list(range(2 * n))]
    for x in comp:
        operands.extend([sys.site_states[x].matrix, [n + x, x]])
    out = [s for s in reg.sites] + [n + s for s in reg.sites]
    a_reg = np.einsum(*operands, out, optimize=True)
    dreg = math.prod(dims[s] for s in reg.sites) if reg.sites else 1
    return embed_region(a_reg.reshape(dreg, dreg), reg, sys)


def hamiltonian_matrix(h: ChainHamiltonian, sys: LatticeSystem) -> np.ndarray:
    """Dense chain Hamiltonian assembled from the nearest-neighbour terms."""
    out = np.zeros((sys.dim, sys.dim), dtype=np.complex128)
    for x, mat in h.terms:
        if x + 1 >= sys.n_sites:
            raise ValueError(f"term at site {x} needs neighbour {x + 1} outside the chain")
        dpair = sys.site_dims[x] * sys.site_dims[x + 1]
        if mat.shape[0] != dpair:
            raise ValueError(f"term at site {x} has dimension {mat.shape[0]}, expected {dpair}")
        out += embed_region(mat, Region((x, x + 1)), sys)
    return out


def evolve(a, h: ChainHamiltonian, t: float, sys: LatticeSystem) -> np.ndarray:
    """Heisenberg-picture evolution A -> exp(itH) A exp(-itH)."""
    a = as_matrix(a, square=True)
    if a.shape[0] != sys.dim:
        raise ValueError(f"operator dimension {a.shape[0]} does not match chain dimension {sys.dim}")
    u = herm_expm(hamiltonian_matrix(h, sys), 1j * float(t))
    return u @ a @ u.conj().T


def localization_curve(
    a, center: int, sys: LatticeSystem, radii: Sequence[int]
) -> list[tuple[int, float]]:
    """(radius, ||E_ball(A) - A||) for balls around `center` clipped to the chain.

    A radius covering the whole chain gives error exactly zero.  No
    monotonicity in the radius is asserted.
    """
    center = int(center)
    if not 0 <= center < sys.n_sites:
        raise ValueError(f"center {center} outside chain of {sys.n_sites} sites")
    radii = [int(r) for r in radii]
    if any(r2 < r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValueError("radii must be sorted ascending")
    a = as_matrix(a, square=True)
    out = []
    for r in radii:
        if r < 0:
            ball = Region(())
        else:
            ball = Region(tuple(range(max(0, center - r), min(sys.n_sites, center + r + 1))))
        out.append((r, op_norm(e_region(a, ball, sys) - a)))
    return out
