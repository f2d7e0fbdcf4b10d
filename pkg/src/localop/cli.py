"""Command-line front end: JSON configs in, deterministic CSV/JSON reports out.

Exit codes: 0 success, 1 numerical or guard failure, 2 config validation
failure.  Output files are byte-identical across reruns of the same config
(volatile diagnostics such as wall time go to stderr only).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .checks import run_all_checks
from .defect import OptimizerConfig, defect_lower_bound
from .experiments import factor2_campaign
from .opcore import (
    BipartiteOperator,
    DensityMatrix,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    check_seed,
    embed_left,
    ginibre,
    swap_matrix,
)
from .quasilocal import (
    ChainHamiltonian,
    LatticeSystem,
    Region,
    embed_region,
    evolve,
    heisenberg_hamiltonian,
    localization_curve,
)

__all__ = ["main", "ConfigError"]

_PAULIS = {"sigma-x": PAULI_X, "sigma-y": PAULI_Y, "sigma-z": PAULI_Z}


class ConfigError(Exception):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def fmt17(x: float) -> str:
    """17 significant digits, '.' decimal point: round-trippable doubles."""
    return format(float(x), ".17g")


def matrix_to_pairs(m) -> list:
    """Nested [re, im] pairs for lossless JSON matrix serialization."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def matrix_from_pairs(obj, field: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ConfigError(field, "expected a non-empty list of rows")
    rows = []
    width = None
    for i, row in enumerate(obj):
        if not isinstance(row, list) or not row:
            raise ConfigError(field, f"row {i} is not a non-empty list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ConfigError(field, f"row {i} has {len(row)} entries, expected {width}")
        entries = []
        for j, cell in enumerate(row):
            if (
                not isinstance(cell, list)
                or len(cell) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in cell)
            ):
                raise ConfigError(field, f"entry ({i},{j}) is not an [re, im] pair")
            entries.append(complex(cell[0], cell[1]))
        rows.append(entries)
    m = np.array(rows, dtype=np.complex128)
    if not np.isfinite(m).all():
        raise ConfigError(field, "matrix has non-finite entries")
    return m


def _require(cfg: dict, field: str, parent: str = ""):
    path = f"{parent}.{field}" if parent else field
    if field not in cfg:
        raise ConfigError(path, "missing required field")
    return cfg[field]


def _as_int(value, field: str, minimum: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(field, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(field, f"must be at least {minimum}, got {value}")
    return value


def _as_number(value, field: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(field, f"expected a number, got {value!r}")
    return float(value)


def _as_seed(value, field: str) -> int:
    s = _as_int(value, field, minimum=0)
    try:
        return check_seed(s)
    except ValueError as e:
        raise ConfigError(field, str(e)) from None


def _dims(cfg: dict, minimum: int = 1) -> tuple[int, int]:
    dims = _require(cfg, "dims")
    if not isinstance(dims, list) or len(dims) != 2:
        raise ConfigError("dims", "expected [d1, d2]")
    return _as_int(dims[0], "dims[0]", minimum), _as_int(dims[1], "dims[1]", minimum)


def _optimizer(cfg: dict, default_seed: int | None) -> OptimizerConfig:
    block = cfg.get("optimizer", {})
    if not isinstance(block, dict):
        raise ConfigError("optimizer", "expected an object")
    known = {"restarts", "max_iters", "step_init", "grad_tol", "seed"}
    for key in block:
        if key not in known:
            raise ConfigError(f"optimizer.{key}", "unknown field")
    seed = block.get("seed", default_seed if default_seed is not None else 0)
    try:
        return OptimizerConfig(
            restarts=_as_int(block.get("restarts", 20), "optimizer.restarts", 1),
            max_iters=_as_int(block.get("max_iters", 500), "optimizer.max_iters", 1),
            step_init=_as_number(block.get("step_init", 0.1), "optimizer.step_init"),
            grad_tol=_as_number(block.get("grad_tol", 1e-8), "optimizer.grad_tol"),
            seed=_as_seed(seed, "optimizer.seed"),
        )
    except ValueError as e:
        raise ConfigError("optimizer", str(e)) from None


def _operator_from_spec(cfg: dict, d1: int, d2: int) -> BipartiteOperator:
    spec = _require(cfg, "operator")
    if not isinstance(spec, dict):
        raise ConfigError("operator", "expected an object with a 'kind'")
    kind = _require(spec, "kind", "operator")
    dim = d1 * d2
    if kind == "inline":
        m = matrix_from_pairs(_require(spec, "matrix", "operator"), "operator.matrix")
        if m.shape != (dim, dim):
            raise ConfigError(
                "operator.matrix", f"matrix is {m.shape[0]}x{m.shape[1]}, but d1*d2 = {dim}"
            )
        return BipartiteOperator(m, d1, d2)
    if kind == "embedded":
        m = matrix_from_pairs(_require(spec, "matrix", "operator"), "operator.matrix")
        if m.shape != (d1, d1):
            raise ConfigError("operator.matrix", f"embedded matrix must be {d1}x{d1}")
        return embed_left(m, d2)
    if kind == "swap":
        if d1 != d2:
            raise ConfigError("operator.kind", f"swap needs d1 = d2, got {d1} and {d2}")
        return BipartiteOperator(swap_matrix(d1), d1, d2)
    if kind == "ginibre":
        seed = spec.get("seed", cfg.get("seed"))
        if seed is None:
            raise ConfigError("operator.seed", "missing seed for the random operator")
        return BipartiteOperator(ginibre(dim, dim, _as_seed(seed, "operator.seed")), d1, d2)
    raise ConfigError("operator.kind", f"unknown kind {kind!r}")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def cmd_defect(cfg: dict, out_dir: str, workers: int) -> int:
    d1, d2 = _dims(cfg, minimum=1)
    op = _operator_from_spec(cfg, d1, d2)
    opt = _optimizer(cfg, cfg.get("seed"))
    est = defect_lower_bound(op, opt)
    if not (np.isfinite(est.value) and np.isfinite(est.witness).all()):
        print("error: optimizer produced non-finite values", file=sys.stderr)
        return 1
    os.makedirs(out_dir, exist_ok=True)
    _write_json(
        os.path.join(out_dir, "defect.json"),
        {
            "value": est.value,
            "witness": matrix_to_pairs(est.witness),
            "restarts_used": est.restarts_used,
            "converged": est.converged,
        },
    )
    print(f"defect lower bound {fmt17(est.value)} (witness attained)")
    return 0


def cmd_factor2(cfg: dict, out_dir: str, workers: int) -> int:
    d1, d2 = _dims(cfg, minimum=2)
    n_trials = _as_int(_require(cfg, "n_trials"), "n_trials", 1)
    seed = _as_seed(_require(cfg, "seed"), "seed")
    opt = _optimizer(cfg, seed)
    report = factor2_campaign(d1, d2, n_trials, seed, opt, workers=workers)
    if not all(np.isfinite([r.delta, r.best_gap, r.ratio]).all() for r in report.records):
        print("error: campaign produced non-finite values", file=sys.stderr)
        return 1
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "factor2_trials.csv")
    json_path = os.path.join(out_dir, "factor2_summary.json")
    written = []
    try:
        with open(csv_path, "w", encoding="utf-8") as fh:
            written.append(csv_path)
            fh.write("trial_id,seed,delta,best_gap,ratio,success\n")
            for r in report.records:
                fh.write(
                    f"{r.trial_id},{r.seed},{fmt17(r.delta)},{fmt17(r.best_gap)},"
                    f"{fmt17(r.ratio)},{str(r.success).lower()}\n"
                )
        written.append(json_path)
        _write_json(json_path, report.summary_dict())
    except BaseException:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise
    print(f"{report.n_success}/{report.n_trials} trials found an adversarial unitary")
    print(f"wall time {report.wall_time_s:.1f}s", file=sys.stderr)
    return 0


def _site_states(cfg: dict, dims: tuple[int, ...]) -> tuple[DensityMatrix, ...]:
    spec = cfg.get("site_states", "maximally-mixed")
    if isinstance(spec, (str, dict)):
        spec = [spec] * len(dims)
    if not isinstance(spec, list) or len(spec) != len(dims):
        raise ConfigError("site_states", f"expected one state spec or {len(dims)} of them")
    states = []
    for x, (d, entry) in enumerate(zip(dims, spec)):
        field = f"site_states[{x}]"
        if isinstance(entry, str):
            entry = {"kind": entry}
        if not isinstance(entry, dict):
            raise ConfigError(field, "expected a string or an object")
        kind = _require(entry, "kind", field)
        try:
            if kind == "maximally-mixed":
                states.append(DensityMatrix.maximally_mixed(d))
            elif kind == "pure-basis":
                states.append(DensityMatrix.pure_basis(d, _as_int(entry.get("k", 0), f"{field}.k", 0)))
            elif kind == "matrix":
                m = matrix_from_pairs(_require(entry, "matrix", field), f"{field}.matrix")
                states.append(DensityMatrix(m))
            else:
                raise ConfigError(f"{field}.kind", f"unknown kind {kind!r}")
        except ValueError as e:
            raise ConfigError(field, str(e)) from None
    return tuple(states)


def _chain_hamiltonian(cfg: dict, dims: tuple[int, ...]) -> ChainHamiltonian:
    spec = cfg.get("hamiltonian", "heisenberg")
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict):
        raise ConfigError("hamiltonian", "expected a string or an object")
    kind = _require(spec, "kind", "hamiltonian")
    if kind == "heisenberg":
        if any(d != 2 for d in dims):
            raise ConfigError("hamiltonian", "heisenberg coupling needs qubit sites (all dims 2)")
        return heisenberg_hamiltonian(len(dims))
    if kind == "custom":
        terms_spec = _require(spec, "terms", "hamiltonian")
        if not isinstance(terms_spec, list):
            raise ConfigError("hamiltonian.terms", "expected a list")
        terms = []
        for i, term in enumerate(terms_spec):
            field = f"hamiltonian.terms[{i}]"
            if not isinstance(term, dict):
                raise ConfigError(field, "expected an object")
            x = _as_int(_require(term, "site", field), f"{field}.site", 0)
            if x + 1 >= len(dims):
                raise ConfigError(f"{field}.site", f"site {x} has no right neighbour")
            m = matrix_from_pairs(_require(term, "matrix", field), f"{field}.matrix")
            if m.shape[0] != dims[x] * dims[x + 1]:
                raise ConfigError(
                    f"{field}.matrix", f"expected dimension {dims[x] * dims[x + 1]}"
                )
            terms.append((x, m))
        try:
            return ChainHamiltonian(tuple(terms))
        except ValueError as e:
            raise ConfigError("hamiltonian.terms", str(e)) from None
    raise ConfigError("hamiltonian.kind", f"unknown kind {kind!r}")


def _observable(cfg: dict, dims: tuple[int, ...]) -> tuple[np.ndarray, Region]:
    spec = _require(cfg, "observable")
    if not isinstance(spec, dict):
        raise ConfigError("observable", "expected an object")
    kind = _require(spec, "kind", "observable")
    if kind in _PAULIS:
        site = _as_int(_require(spec, "site", "observable"), "observable.site", 0)
        if site >= len(dims):
            raise ConfigError("observable.site", f"site {site} outside chain of {len(dims)} sites")
        if dims[site] != 2:
            raise ConfigError("observable.site", f"{kind} needs a qubit site, dim is {dims[site]}")
        return _PAULIS[kind], Region((site,))
    if kind == "inline":
        sites = _require(spec, "sites", "observable")
        if not isinstance(sites, list) or not sites:
            raise ConfigError("observable.sites", "expected a non-empty list of site indices")
        sites = [_as_int(s, "observable.sites", 0) for s in sites]
        if len(set(sites)) != len(sites):
            raise ConfigError("observable.sites", "duplicate sites")
        if max(sites) >= len(dims):
            raise ConfigError("observable.sites", f"site {max(sites)} outside the chain")
        m = matrix_from_pairs(_require(spec, "matrix", "observable"), "observable.matrix")
        dreg = int(np.prod([dims[s] for s in sorted(sites)]))
        if m.shape[0] != dreg:
            raise ConfigError("observable.matrix", f"expected dimension {dreg}")
        return m, Region(tuple(sites))
    raise ConfigError("observable.kind", f"unknown kind {kind!r}")


def cmd_chain(cfg: dict, out_dir: str, workers: int) -> int:
    dims_spec = _require(cfg, "site_dims")
    if not isinstance(dims_spec, list) or not dims_spec:
        raise ConfigError("site_dims", "expected a non-empty list of site dimensions")
    dims = tuple(_as_int(d, "site_dims", 1) for d in dims_spec)
    states = _site_states(cfg, dims)
    ham = _chain_hamiltonian(cfg, dims)
    obs_loc, obs_region = _observable(cfg, dims)
    t = _as_number(_require(cfg, "time"), "time")
    radii_spec = _require(cfg, "radii")
    if not isinstance(radii_spec, list) or not radii_spec:
        raise ConfigError("radii", "expected a non-empty list of integers")
    radii = [_as_int(r, "radii", None) for r in radii_spec]
    if any(r2 < r1 for r1, r2 in zip(radii, radii[1:])):
        raise ConfigError("radii", "must be sorted ascending")
    center = _as_int(_require(cfg, "center"), "center", 0)
    if center >= len(dims):
        raise ConfigError("center", f"site {center} outside chain of {len(dims)} sites")

    # construction and evolution may trip the dense-dimension guard: exit 1
    sys_ = LatticeSystem(dims, states)
    a = embed_region(obs_loc, obs_region, sys_)
    a_t = evolve(a, ham, t, sys_)
    curve = localization_curve(a_t, center, sys_, radii)
    if not all(np.isfinite(err) for _, err in curve):
        print("error: localization curve has non-finite values", file=sys.stderr)
        return 1
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "chain_curve.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("radius,error\n")
        for r, err in curve:
            fh.write(f"{r},{fmt17(err)}\n")
    print(f"wrote {len(curve)} radii; final error {fmt17(curve[-1][1])}")
    return 0


def cmd_checks(cfg: dict, out_dir: str, workers: int) -> int:
    seed = _as_seed(cfg.get("seed", 0), "seed")
    n_random = _as_int(cfg.get("n_random", 20), "n_random", 1)
    mc_samples = _as_int(cfg.get("mc_samples", 20000), "mc_samples", 1)
    results = run_all_checks(seed=seed, n_random=n_random, mc_samples=mc_samples)
    width = max(len(r.name) for r in results)
    print(f"{'check'.ljust(width)}  kind              status  margin")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name.ljust(width)}  {r.kind.ljust(16)}  {status}    {r.margin:.3e}  {r.detail}")
    hard_failures = [r for r in results if r.hard and not r.passed]
    soft_failures = [r for r in results if not r.hard and not r.passed]
    if soft_failures:
        print(f"{len(soft_failures)} calibrated check(s) failed (non-gating)", file=sys.stderr)
    if hard_failures:
        print(f"{len(hard_failures)} exact check(s) failed", file=sys.stderr)
        return 1
    return 0


_COMMANDS = {
    "defect": cmd_defect,
    "factor2": cmd_factor2,
    "chain": cmd_chain,
    "checks": cmd_checks,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localop",
        description="Conditional-expectation localization toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "defect": "adversarial lower bound on the commutator defect of an operator",
        "factor2": "random-matrix campaign probing the factor 2 in the slice bound",
        "chain": "localization-error curve of an evolved chain observable",
        "checks": "run the invariant check suites and print a pass/fail table",
    }
    for name, desc in descriptions.items():
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=".", help="output directory (default: cwd)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--workers", type=int, default=None, help="concurrency cap")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as e:
            raise ConfigError("config", f"cannot read {args.config}: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"invalid JSON: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config", "top-level JSON value must be an object")
        if args.seed is not None:
            cfg["seed"] = _as_seed(args.seed, "--seed")
        if args.workers is not None:
            workers = args.workers
            if workers < 1:
                raise ConfigError("--workers", "must be at least 1")
        else:
            workers = cfg.get("workers", os.cpu_count() or 1)
            workers = _as_int(workers, "workers", 1)
        return _COMMANDS[args.command](cfg, args.out, workers)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
