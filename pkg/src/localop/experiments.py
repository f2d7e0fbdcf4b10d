"""Random-matrix campaigns: adversarial trials probing whether the factor 2
in the state-slice approximation bound is necessary, plus batch verification
of the exact inequality chain on random ensembles."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from statistics import median
from typing import Sequence

import numpy as np

from .condexp import e_rho, e_tr, mc_twirl
from .defect import OptimizerConfig, defect_lower_bound
from .opcore import (
    BipartiteOperator,
    DensityMatrix,
    as_matrix,
    derive_seed,
    ginibre,
    make_rng,
    op_norm,
)

__all__ = [
    "SUCCESS_TOL",
    "TrialRecord",
    "CampaignReport",
    "DimBoundReport",
    "BoundSuiteReport",
    "factor2_trial",
    "factor2_campaign",
    "bound_margins",
    "bound_suite",
]

#: absolute slack in the per-trial comparison best_gap >= delta
SUCCESS_TOL = 1e-9

_CHAIN_TOL = 1e-10
_LEMMA_TOL = 1e-4
_MC_TOL = 1e-10


@dataclass(frozen=True)
class TrialRecord:
    """One adversarial trial: state-slice gap delta vs best unitary gap found."""

    trial_id: int
    seed: int
    delta: float
    best_gap: float
    ratio: float
    success: bool
    witness: np.ndarray

    def csv_row(self) -> tuple:
        return (self.trial_id, self.seed, self.delta, self.best_gap, self.ratio, self.success)


def factor2_trial(
    d1: int,
    d2: int,
    seed: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    operator: np.ndarray | None = None,
    trial_id: int = 0,
) -> TrialRecord:
    """Draw A from the unitarily invariant Gaussian ensemble, slice with the
    pure state |0><0| on the second factor (the state farthest from tracial;
    by unitary invariance of the ensemble the basis vector choice is
    statistically irrelevant), and search for a unitary whose conjugation
    moves A at least as far as the slice does.

    `operator` overrides the random draw (testing hook).
    """
    d1, d2 = int(d1), int(d2)
    if d1 < 2 or d2 < 2:
        raise ValueError("both factor dimensions must be at least 2")
    seed = int(seed)
    dim = d1 * d2
    m = ginibre(dim, dim, seed) if operator is None else as_matrix(operator, square=True)
    a = BipartiteOperator(m, d1, d2)
    rho = DensityMatrix.pure_basis(d2, 0)
    delta = op_norm(np.kron(e_rho(a, rho), np.eye(d2)) - a.matrix)
    est = defect_lower_bound(a, cfg)
    best_gap = est.value
    success = bool(best_gap >= delta - SUCCESS_TOL)
    ratio = best_gap / delta if delta > 0 else 0.0
    return TrialRecord(
        trial_id=int(trial_id),
        seed=seed,
        delta=delta,
        best_gap=best_gap,
        ratio=ratio,
        success=success,
        witness=est.witness,
    )


@dataclass(frozen=True)
class CampaignReport:
    """Aggregate of a factor-2 trial campaign."""

    dims: tuple[int, int]
    n_trials: int
    n_success: int
    min_ratio: float
    median_ratio: float
    max_ratio: float
    optimizer: OptimizerConfig
    wall_time_s: float
    records: tuple[TrialRecord, ...]

    def summary_dict(self) -> dict:
        """Canonical summary; excludes wall time so reruns are byte-identical."""
        return {
            "dims": list(self.dims),
            "n_trials": self.n_trials,
            "n_success": self.n_success,
            "min_ratio": self.min_ratio,
            "median_ratio": self.median_ratio,
            "max_ratio": self.max_ratio,
            "optimizer": {
                "restarts": self.optimizer.restarts,
                "max_iters": self.optimizer.max_iters,
                "step_init": self.optimizer.step_init,
                "grad_tol": self.optimizer.grad_tol,
                "seed": self.optimizer.seed,
            },
        }


def _run_trial(args) -> TrialRecord:
    d1, d2, seed, cfg, trial_id = args
    return factor2_trial(d1, d2, seed, cfg, trial_id=trial_id)


def factor2_campaign(
    d1: int,
    d2: int,
    n_trials: int,
    base_seed: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    workers: int = 1,
) -> CampaignReport:
    """Run factor-2 trials with per-trial seeds derived from (base_seed, index).

    Trials are independent, so the report does not depend on the worker
    count; records are kept in trial order.
    """
    n_trials = int(n_trials)
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    workers = max(1, int(workers))
    t0 = time.perf_counter()
    jobs = [(d1, d2, derive_seed(base_seed, i), cfg, i) for i in range(n_trials)]
    if workers == 1 or n_trials == 1:
        records = [_run_trial(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial, jobs))
    records.sort(key=lambda r: r.trial_id)
    ratios = [r.ratio for r in records]
    return CampaignReport(
        dims=(int(d1), int(d2)),
        n_trials=n_trials,
        n_success=sum(r.success for r in records),
        min_ratio=min(ratios),
        median_ratio=float(median(ratios)),
        max_ratio=max(ratios),
        optimizer=cfg,
        wall_time_s=time.perf_counter() - t0,
        records=tuple(records),
    )


@dataclass(frozen=True)
class DimBoundReport:
    """Bound checks at one dimension pair over a random ensemble.

    Margins are the worst (smallest) slack seen, rhs-with-tolerance minus
    lhs; nonnegative means every instance passed.
    """

    dims: tuple[int, int]
    n: int
    chain_failures: int
    chain_worst_margin: float
    lemma_failures: int
    lemma_worst_margin: float
    lemma_retries: int
    mc_failures: int
    mc_worst_margin: float


@dataclass(frozen=True)
class BoundSuiteReport:
    per_dim: tuple[DimBoundReport, ...]
    n_per_dim: int
    base_seed: int
    optimizer: OptimizerConfig

    @property
    def all_pass(self) -> bool:
        return all(
            d.chain_failures == 0 and d.lemma_failures == 0 and d.mc_failures == 0
            for d in self.per_dim
        )

    def summary_dict(self) -> dict:
        return {
            "n_per_dim": self.n_per_dim,
            "per_dim": [
                {
                    "dims": list(d.dims),
                    "n": d.n,
                    "chain_failures": d.chain_failures,
                    "chain_worst_margin": d.chain_worst_margin,
                    "lemma_failures": d.lemma_failures,
                    "lemma_worst_margin": d.lemma_worst_margin,
                    "lemma_retries": d.lemma_retries,
                    "mc_failures": d.mc_failures,
                    "mc_worst_margin": d.mc_worst_margin,
                }
                for d in self.per_dim
            ],
        }


def _wishart_state(d: int, rng: np.random.Generator) -> DensityMatrix:
    g = ginibre(d, d, rng)
    w = g @ g.conj().T
    return DensityMatrix(w / w.trace().real)


def bound_margins(
    a: BipartiteOperator,
    rho: DensityMatrix,
    cfg: OptimizerConfig,
    mc_samples: int,
    mc_seed,
) -> tuple[float, float, float, bool]:
    """Slacks of the three bound checks for one instance.

    Returns (chain_margin, lemma_margin, mc_margin, lemma_retried); each
    margin is rhs-with-tolerance minus lhs, so nonnegative means pass.  The
    lemma check is retried once at 5x restarts before its margin is final.
    """
    eye2 = np.eye(a.d2, dtype=np.complex128)
    gap_tr = op_norm(np.kron(e_tr(a), eye2) - a.matrix)
    gap_rho = op_norm(np.kron(e_rho(a, rho), eye2) - a.matrix)
    chain_margin = 2.0 * gap_tr + _CHAIN_TOL - gap_rho

    est = defect_lower_bound(a, cfg)
    lemma_margin = est.value + _LEMMA_TOL - gap_tr
    retried = False
    if lemma_margin < 0:
        retried = True
        est = defect_lower_bound(a, replace(cfg, restarts=cfg.restarts * 5))
        lemma_margin = est.value + _LEMMA_TOL - gap_tr

    avg, bound = mc_twirl(a, mc_samples, mc_seed)
    mc_margin = bound + _MC_TOL - op_norm(a.matrix - avg.matrix)
    return chain_margin, lemma_margin, mc_margin, retried


def bound_suite(
    dims: Sequence[tuple[int, int]],
    n_per_dim: int,
    base_seed: int,
    cfg: OptimizerConfig = OptimizerConfig(),
    mc_samples: int = 50,
) -> BoundSuiteReport:
    """For random (A, rho) at each dimension pair, check:

    (i)   the exact slice chain inequality
          ||e_rho(A) (x) 1 - A|| <= 2 ||e_tr(A) (x) 1 - A|| (never fails);
    (ii)  ||e_tr(A) (x) 1 - A|| <= attained defect lower bound, retried at
          5x restarts before counting a failure (optimizer slack);
    (iii) the Monte-Carlo twirl triangle bound.

    A is Ginibre, rho normalized Wishart (G G* / Tr G G*).
    """
    n_per_dim = int(n_per_dim)
    if n_per_dim < 1:
        raise ValueError("n_per_dim must be at least 1")
    reports = []
    for di, (d1, d2) in enumerate(dims):
        d1, d2 = int(d1), int(d2)
        if d1 * d2 > 64:
            raise ValueError(f"total dimension {d1 * d2} exceeds the bound-suite guard 64")
        chain_fail = lemma_fail = lemma_retries = mc_fail = 0
        chain_margin = lemma_margin = mc_margin = math.inf
        for trial in range(n_per_dim):
            rng = make_rng(base_seed, di, trial)
            a = BipartiteOperator(ginibre(d1 * d2, d1 * d2, rng), d1, d2)
            rho = _wishart_state(d2, rng)
            cm, lm, mm, retried = bound_margins(a, rho, cfg, mc_samples, rng)
            chain_margin = min(chain_margin, cm)
            chain_fail += cm < 0
            lemma_margin = min(lemma_margin, lm)
            lemma_fail += lm < 0
            lemma_retries += retried
            mc_margin = min(mc_margin, mm)
            mc_fail += mm < 0
        reports.append(
            DimBoundReport(
                dims=(d1, d2),
                n=n_per_dim,
                chain_failures=chain_fail,
                chain_worst_margin=chain_margin,
                lemma_failures=lemma_fail,
                lemma_worst_margin=lemma_margin,
                lemma_retries=lemma_retries,
                mc_failures=mc_fail,
                mc_worst_margin=mc_margin,
            )
        )
    return BoundSuiteReport(
        per_dim=tuple(reports),
        n_per_dim=n_per_dim,
        base_seed=int(base_seed),
        optimizer=cfg,
    )
