"""Command-line entry point: ``euler-semiflow {simulate,select,check,equilibrium,riemann}``.

Exit codes: 0 success, 1 failed check, 2 bad arguments or config, 3 solver
error, 4 unusable candidate set, 5 corrupt input file.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import shutil
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .equilibrium import default_seed, equilibrium_state, maximizer_audit
from .errors import (
    DatumMismatchError,
    DomainError,
    EulerSemiflowError,
    FileFormatError,
    SolverError,
)
from .io import RunManifest, atomic_write, config_hash, now, read_trajectory, write_diagnostics, write_trajectory
from .riemann import RiemannDatum, riemann_initial_datum, solve_expansion_shock, solve_riemann
from .selection import SelectionParams, order_sigma, sieve_select
from .solver import SCHEMES, SchemeConfig, equilibrium_datum, generate_candidates, smooth_bump_datum
from .state import FluidState, Grid, InitialDatum
from .thermo import GasConstants
from .trajectory import check_trajectory

log = logging.getLogger("euler_semiflow")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER, EXIT_CANDIDATES, EXIT_CORRUPT = 0, 1, 2, 3, 4, 5


class UsageError(Exception):
    pass


class CandidateSetError(Exception):
    pass


# -- configuration ----------------------------------------------------------------------


def _triple(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.replace(",", " ").split()]
    if len(parts) != 3:
        raise ValueError(f"expected three numbers, got {text!r}")
    return tuple(parts)


def load_config(path: str | Path) -> tuple[configparser.ConfigParser, str]:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    text = path.read_text()
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from exc
    return cp, text


def gas_from_config(cp) -> GasConstants:
    return GasConstants(cp.getfloat("gas", "gamma", fallback=1.4), cp.getfloat("gas", "s0", fallback=0.0))


def grid_from_config(cp) -> Grid:
    return Grid(cp.getint("grid", "N", fallback=200), cp.getfloat("grid", "L", fallback=1.0))


def suite_from_config(cp, grid: Grid) -> list[SchemeConfig]:
    sec = "scheme"
    names = cp.get(sec, "scheme", fallback="hllc").strip()
    schemes = list(SCHEMES) if names == "all" else [s.strip() for s in names.split(",")]
    eps = [float(e) for e in cp.get(sec, "epsilon", fallback="0").replace(",", " ").split()]
    common = dict(
        cfl=cp.getfloat(sec, "cfl", fallback=0.5),
        N=grid.N,
        L=grid.L,
        t_end=cp.getfloat(sec, "t_end", fallback=0.2),
        dt_out=cp.getfloat(sec, "dt_out", fallback=0.01),
    )
    return [SchemeConfig(s, e, **common) for s in schemes for e in eps]


def datum_from_config(cp, grid: Grid, gas: GasConstants, base: Path = Path(".")) -> InitialDatum:
    sec = "datum"
    preset = cp.get(sec, "preset", fallback="constant").strip().lower()
    E0 = cp.getfloat(sec, "E0", fallback=None)
    if preset == "constant":
        st = FluidState.constant(
            grid, cp.getfloat(sec, "rho", fallback=1.0), cp.getfloat(sec, "m", fallback=0.0), cp.getfloat(sec, "S", fallback=0.0)
        )
        return InitialDatum.from_state(st, gas, E0)
    if preset == "bump":
        d = smooth_bump_datum(grid, gas, cp.getfloat(sec, "amplitude", fallback=0.1), cp.getfloat(sec, "width", fallback=0.1))
        return d if E0 is None else InitialDatum.from_state(d.state, gas, E0)
    if preset in ("sod", "riemann"):
        if preset == "sod":
            rd = RiemannDatum((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))
        else:
            rd = RiemannDatum(_triple(cp.get(sec, "left")), _triple(cp.get(sec, "right")))
        return riemann_initial_datum(rd, grid, gas, cp.getfloat(sec, "x0", fallback=None))
    if preset == "file":
        data = np.load(base / cp.get(sec, "file"))
        st = FluidState(grid, data["rho"], data["m"], data["S"])
        return InitialDatum.from_state(st, gas, E0)
    if preset == "equilibrium":
        return equilibrium_datum(grid, gas, cp.getfloat(sec, "rho", fallback=1.0), cp.getfloat(sec, "S", fallback=0.0))
    raise UsageError(f"unknown datum preset {preset!r}")


def params_from_config(cp) -> SelectionParams:
    sec = "selection"
    return SelectionParams(
        lambda0=cp.getfloat(sec, "lambda0", fallback=1.0),
        zeta=cp.getfloat(sec, "zeta", fallback=1.0),
        n_funcs=cp.getint(sec, "n_funcs", fallback=8),
        x_scale=cp.getfloat(sec, "x_scale", fallback=1.0),
        tie_tol=cp.getfloat(sec, "tie_tol", fallback=1e-9),
    )


# -- commands -----------------------------------------------------------------------------


def _manifest(command: str, cfg_text: str, inputs, out_dir: Path) -> RunManifest:
    m = RunManifest(command, config_hash(cfg_text), __version__, default_seed(), [str(p) for p in inputs])
    m.write(out_dir / "manifest.json")
    return m


def cmd_simulate(args) -> int:
    cp, text = load_config(args.config)
    try:
        gas = gas_from_config(cp)
        grid = grid_from_config(cp)
        suite = suite_from_config(cp, grid)
        datum = datum_from_config(cp, grid, gas, Path(args.config).parent)
    except (ValueError, KeyError, configparser.Error, OSError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _manifest("simulate", text, [args.config], out)

    cands = generate_candidates(datum, suite, gas, closed_form=args.closed_form)
    if cands.failures and not args.allow_failures:
        first = next(iter(cands.failures.values()))
        raise SolverError(first)
    for label, err in cands.failures.items():
        log.warning("%s failed: %s", label, err)
    for traj in cands:
        manifest.outputs.append(str(write_trajectory(out / f"{traj.id}.json", traj, gas)))
        manifest.outputs.append(str(write_diagnostics(out / f"{traj.id}.csv", traj, gas)))
        print(f"{traj.id}: {len(traj)} nodes -> {out / (traj.id + '.json')}")
    manifest.finished = now()
    manifest.write(out / "manifest.json")
    return EXIT_OK


def _load_candidates(directory: Path):
    if not directory.is_dir():
        raise CandidateSetError(f"not a directory: {directory}")
    files = sorted(p for p in directory.glob("*.json") if p.name not in ("manifest.json", "selection.json", "selected.json"))
    if not files:
        raise CandidateSetError(f"no trajectory containers in {directory}")
    loaded = [read_trajectory(p) for p in files]
    gas = loaded[0][1]
    trajs = [t for t, _ in loaded]
    for (t, g), p in zip(loaded, files):
        if g != gas:
            raise CandidateSetError(f"{p.name} uses different gas constants")
        if not t.datum.equals(trajs[0].datum):
            raise CandidateSetError(f"{p.name} starts from a different initial datum")
    return files, trajs, gas


def _interval(v) -> dict:
    return {"value": v.value, "tail": v.tail, "lower": v.interval[0], "upper": v.interval[1]}


def cmd_select(args) -> int:
    directory = Path(args.candidates)
    files, trajs, gas = _load_candidates(directory)
    base = params_from_config(load_config(args.config)[0]) if args.config else SelectionParams()
    flags = {"lambda0": args.lambda0, "zeta": args.zeta, "n_funcs": args.n, "x_scale": args.x_scale, "tie_tol": args.tie_tol}
    try:
        params = replace(base, alpha=None, **{k: v for k, v in flags.items() if v is not None})
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out) if args.out else directory
    out.mkdir(parents=True, exist_ok=True)
    _manifest("select", json.dumps(vars(args), sort_keys=True, default=str), files, out)
    result = sieve_select(trajs, params)
    by_id = {t.id: t for t in trajs}
    ids = sorted(by_id)
    report = {
        "selected": result.id,
        "final_tie_break": result.tie_break,
        "params": {"lambda0": params.lambda0, "zeta": params.zeta, "n_funcs": params.n_funcs,
                   "x_scale": params.x_scale, "tie_tol": params.tie_tol},
        "stages": [
            {
                "stage": s.stage,
                "lambda": s.lam,
                "functional": s.functional,
                "intervals": {k: _interval(v) for k, v in s.values.items()},
                "survivors": list(s.survivors),
            }
            for s in result.stages
        ],
        "order_sigma": {a: {b: order_sigma(by_id[a], by_id[b]).relation for b in ids if b != a} for a in ids},
    }
    atomic_write(out / "selection.json", json.dumps(report, sort_keys=True, indent=2) + "\n")
    shutil.copyfile(files[[t.id for t in trajs].index(result.id)], out / "selected.json")
    print(f"selected {result.id}")
    for s in result.stages:
        print(f"  stage {s.stage} lambda={s.lam:g} {s.functional}: {len(s.survivors)} survivor(s)")
    return EXIT_OK


def cmd_check(args) -> int:
    traj, gas = read_trajectory(args.trajectory)
    results = check_trajectory(traj, gas, rtol=args.rtol)
    if args.suite == "ledger":
        results = [r for r in results if r.name in ("energy_ledger", "mass")]
    verdicts = [{"name": r.name, "passed": bool(r.passed), "detail": r.detail} for r in results]
    print(json.dumps({"id": traj.id, "checks": verdicts}, indent=2, sort_keys=True))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_equilibrium(args) -> int:
    gas = GasConstants(args.gamma, args.s0)
    eq = equilibrium_state(args.mass, args.energy, args.length, gas)
    print(f"rho_bar = {eq.rho_bar!r}")
    print(f"S_bar   = {eq.S_bar!r}")
    if args.audit:
        a = maximizer_audit(eq, args.audit, gas, seed=args.seed)
        print(f"audit: {a.samples} samples, {a.violations} violations, {a.skipped} skipped, min gap {a.min_gap:.6e}")
        return EXIT_OK if a.passed else EXIT_FAIL
    return EXIT_OK


def cmd_riemann(args) -> int:
    gas = GasConstants(args.gamma, args.s0)
    rd = RiemannDatum(_triple(args.left), _triple(args.right))
    sol = solve_riemann(rd, gas)
    print(f"p_star = {sol.p_star!r}")
    print(f"u_star = {sol.u_star!r}")
    print(f"waves  = {', '.join(f'{x:.6g}' for x in sol.breakpoints())}")
    print(f"rankine_hugoniot_residual = {sol.rankine_hugoniot_residual():.3e}")
    if args.expansion_shock:
        try:
            alt = solve_expansion_shock(rd, gas)
            print(f"expansion-shock p_star = {alt.p_star!r}")
        except EulerSemiflowError as exc:
            print(f"expansion-shock: {exc}")
    if args.out:
        grid = Grid(args.N, args.length)
        datum = riemann_initial_datum(rd, grid, gas)
        n_out = max(1, round(args.t_end / args.dt_out))
        cands = generate_candidates(datum, [SchemeConfig("hllc", 0.0, 0.5, args.N, args.length, n_out * args.dt_out, args.dt_out)], gas)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for traj in cands:
            if traj.meta.get("kind") == "riemann":
                write_trajectory(out / f"{traj.id}.json", traj, gas)
                print(f"wrote {out / (traj.id + '.json')}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="euler-semiflow", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run schemes from a config file")
    s.add_argument("config")
    s.add_argument("-o", "--out", default="run")
    s.add_argument("--no-closed-form", dest="closed_form", action="store_false",
                   help="skip exact Riemann candidates")
    s.add_argument("--allow-failures", action="store_true", help="write survivors when some members fail")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("select", help="run the sieve over a directory of trajectories")
    s.add_argument("candidates")
    s.add_argument("--config", default=None, help="read defaults from its [selection] section")
    s.add_argument("--lambda0", type=float, default=None, help="default 1")
    s.add_argument("--zeta", type=float, default=None, help="default 1")
    s.add_argument("--n", type=int, default=None, help="tie-breaking stages (default 8)")
    s.add_argument("--x-scale", type=float, default=None, help="default 1")
    s.add_argument("--tie-tol", type=float, default=None, help="default 1e-9")
    s.add_argument("-o", "--out", default=None, help="report directory (default: the candidate directory)")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("check", help="verify ledgers and entropy conditions of a trajectory")
    s.add_argument("trajectory")
    s.add_argument("--suite", choices=("all", "ledger"), default="all")
    s.add_argument("--rtol", type=float, default=1e-10)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("equilibrium", help="entropy-maximizing constant state")
    s.add_argument("--mass", type=float, required=True)
    s.add_argument("--energy", type=float, required=True)
    s.add_argument("--length", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=1.4)
    s.add_argument("--s0", type=float, default=0.0)
    s.add_argument("--audit", type=int, default=0, metavar="N")
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(func=cmd_equilibrium)

    s = sub.add_parser("riemann", help="exact Riemann solution")
    s.add_argument("--left", required=True, help="rho,u,p")
    s.add_argument("--right", required=True, help="rho,u,p")
    s.add_argument("--gamma", type=float, default=1.4)
    s.add_argument("--s0", type=float, default=-1.0)
    s.add_argument("--expansion-shock", action="store_true")
    s.add_argument("-o", "--out", default=None, help="write exact trajectories here")
    s.add_argument("--N", type=int, default=400)
    s.add_argument("--length", type=float, default=1.0)
    s.add_argument("--t-end", type=float, default=0.2)
    s.add_argument("--dt-out", type=float, default=0.01)
    s.set_defaults(func=cmd_riemann)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileFormatError as exc:
        print(f"corrupt input: {exc}", file=sys.stderr)
        return EXIT_CORRUPT
    except (CandidateSetError, DatumMismatchError) as exc:
        print(f"candidate set: {exc}", file=sys.stderr)
        return EXIT_CANDIDATES
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EulerSemiflowError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
