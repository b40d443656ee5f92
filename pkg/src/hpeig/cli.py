"""Command line interface.

Subcommands:
  run                run a configured adaptive study, write the CSV log
  verify-references  recompute the reference spectra and check them
  oracle-check       run the defect oracle on a configured problem
  list-problems      print the benchmark registry

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 acceptance-check failure.
"""

import argparse
import sys

import numpy as np

from .assembly import assemble_mass, assemble_stiffness
from .config import ConfigError, parse_config
from .defects import oracle_checks
from .eigensolve import SolverError, solve_lowest
from .problems import problem, problem_keys
from .runner import run_study
from .space import DofHandler
from .spectra import registry, verify_references

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CHECK = 4


def _cmd_run(args):
    try:
        setup = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        records, _ = run_study(setup, out_path=args.out, vtk_dir=args.vtk_dir)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    final = records[-1]
    values = " ".join(f"{v:.9g}" for v in final.cluster.values)
    print(f"{setup.problem_key}: {len(records)} steps, "
          f"{final.n_dofs} dofs, values [{values}]")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_verify_references(args):
    checks = verify_references()
    bad = 0
    for check in checks:
        status = "ok" if check["ok"] else "FAIL"
        print(f"{status:4s} {check['name']}: got {check['got']:.15g}, "
              f"want {check['want']:.15g} (tol {check['tol']:g})")
        bad += not check["ok"]
    if bad:
        print(f"{bad} of {len(checks)} reference checks failed",
              file=sys.stderr)
        return EXIT_CHECK
    print(f"all {len(checks)} reference checks passed")
    return EXIT_OK


def _cmd_oracle_check(args):
    try:
        setup = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    spec = problem(setup.problem_key)
    cfg = setup.config
    mesh = spec.mesh(setup.initial_cells)
    handler = DofHandler(mesh, np.full(mesh.n_elements, cfg.p_init),
                         dirichlet_tags=spec.dirichlet_tags)
    B = assemble_stiffness(handler, spec.coefficients)
    M = assemble_mass(handler)
    shift = 0.0 if spec.dirichlet_tags else -1.0
    try:
        cluster = solve_lowest(B, M, cfg.m, shift=shift, tol=cfg.solver_tol,
                               max_iter=cfg.solver_max_iter, seed=cfg.seed)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    spectrum = registry(spec.reference)
    vals, _ = spectrum.flat(cfg.m)
    all_vals, _ = spectrum.flat()
    next_value = all_vals[cfg.m] if len(all_vals) > cfg.m else None
    refs = vals if all(abs(v) > 1e-300 for v in vals) else None
    try:
        checks, report = oracle_checks(handler, spec.coefficients,
                                       cluster.values, cluster.vectors,
                                       refs=refs, next_value=next_value)
    except ValueError as exc:
        print(f"oracle not applicable: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    bad = 0
    for check in checks:
        status = "ok" if check["ok"] else "FAIL"
        detail = ", ".join(f"{k}={v:.6g}" for k, v in check.items()
                           if k not in ("name", "ok")
                           and isinstance(v, (int, float)))
        print(f"{status:4s} {check['name']}: {detail}")
        bad += not check["ok"]
    print(f"defect spectrum: {np.array2string(report.eta2, precision=6)}")
    if bad:
        print(f"{bad} of {len(checks)} oracle checks failed",
              file=sys.stderr)
        return EXIT_CHECK
    print(f"all {len(checks)} oracle checks passed "
          f"({handler.n_dofs} dofs, surrogate {report.fine_dofs})")
    return EXIT_OK


def _cmd_list_problems(args):
    for key in problem_keys():
        spec = problem(key)
        print(f"{key:20s} m={spec.m}  {spec.description}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hpeig", description="hp-adaptive elliptic eigenvalue solver")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an adaptive study from a config")
    run.add_argument("--config", required=True, help="INI run file")
    run.add_argument("--out", required=True, help="CSV output path")
    run.add_argument("--vtk-dir", default=None,
                     help="directory for per-step VTK snapshots")
    run.set_defaults(func=_cmd_run)

    ver = sub.add_parser("verify-references",
                         help="recompute and check reference spectra")
    ver.set_defaults(func=_cmd_verify_references)

    orc = sub.add_parser("oracle-check",
                         help="defect-oracle checks on a configured problem")
    orc.add_argument("--config", required=True, help="INI run file")
    orc.set_defaults(func=_cmd_oracle_check)

    lst = sub.add_parser("list-problems", help="list benchmark keys")
    lst.set_defaults(func=_cmd_list_problems)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, matching our config code
        return int(exc.code) if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
