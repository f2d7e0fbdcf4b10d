"""Toolkit for localizing bipartite and quasi-local operators via
conditional expectations, with adversarial search over commutator norms
and random-matrix campaigns probing the factor 2 in the state-slice
approximation bound."""

from .opcore import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BipartiteOperator,
    DensityMatrix,
    commutator,
    derive_seed,
    embed_left,
    ginibre,
    haar_unitary,
    herm_expm,
    kron,
    make_rng,
    op_norm,
    partial_trace_2,
    swap_matrix,
)
from .condexp import (
    ChoiMatrix,
    ProjectedSubgroup,
    choi_of_map,
    e_rho,
    e_tr,
    exact_projected_twirl,
    is_cp,
    mc_twirl,
)
from .defect import (
    DefectEstimate,
    OptimizerConfig,
    commutator_norm,
    defect_lower_bound,
    defect_sampled,
    twirl_gap,
)
from .quasilocal import (
    ChainHamiltonian,
    LatticeSystem,
    Region,
    e_region,
    embed_region,
    evolve,
    hamiltonian_matrix,
    heisenberg_hamiltonian,
    localization_curve,
)
from .experiments import (
    BoundSuiteReport,
    CampaignReport,
    TrialRecord,
    bound_suite,
    factor2_campaign,
    factor2_trial,
)

__version__ = "0.1.0"
