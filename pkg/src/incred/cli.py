"""Command-line front end.

Subcommands: ``reduce``, ``deriv``, ``certify``, ``invariance``,
``matrosov``, ``simulate``, ``validate-gradient``. Each loads a system
definition JSON file, runs the corresponding analysis, and writes CSV /
JSON / text reports into the output directory.

Exit codes: 0 success (and CERTIFIED / checks passed), 1 analysis
negative (VIOLATED, INCONCLUSIVE, or a failed trajectory check), 2 input
parse error, 3 semantic error.

Runs are deterministic: identical inputs, flags and seed produce
byte-identical outputs. The environment variable ``INCRED_THREADS``
caps worker parallelism; the current implementation evaluates
sequentially (equivalent to a cap of 1) and only validates the value.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys as _sys
from pathlib import Path

from . import certify as cert
from .derivative import (baseline_interval_derivative, baseline_max_derivative,
                         generalized_derivative)
from .errors import DslSyntaxError, IncredError, SchemaError
from .grids import GridSpec
from .reduction import tabulate_reduction
from .setmaps import (SimSpec, SystemDef, eval_map, load_system,
                      validate_gradient, _parse_grid)
from .simulate import (SelectionStrategy, check_lyapunov_descent,
                       check_partial_convergence, check_reduction_membership,
                       integrate, write_trajectory_csv)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_PARSE = 2
EXIT_SEMANTIC = 3


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_json(path: Path, obj) -> None:
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _check_thread_cap() -> None:
    raw = os.environ.get("INCRED_THREADS")
    if raw is None:
        return
    try:
        cap = int(raw)
    except ValueError:
        raise SchemaError(f"INCRED_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise SchemaError("INCRED_THREADS must be >= 1")


def _load(args) -> SystemDef:
    system = load_system(args.input)
    if getattr(args, "baseline", False):
        if not system.candidate.regular:
            raise SchemaError(
                "--baseline needs a regular candidate function")
        system = SystemDef(
            n=system.n, inclusion=system.inclusion,
            candidate=system.candidate, reducers=(system.candidate,),
            domain=system.domain, params=system.params, grid=system.grid,
            matrosov=system.matrosov, checks=system.checks, sim=system.sim)
    if args.grid is not None or args.grid_file is not None:
        if args.grid is not None and args.grid_file is not None:
            raise SchemaError("give at most one of --grid and --grid-file")
        if args.grid is not None:
            base = system.grid
            if base is None:
                base = GridSpec((args.grid,) * system.n,
                                ((),) * system.n)
            grid = base.with_uniform_counts(args.grid)
        else:
            with open(args.grid_file, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            doc = doc.get("grid", doc)
            grid = _parse_grid(doc, system.n, "grid")
        system = SystemDef(
            n=system.n, inclusion=system.inclusion,
            candidate=system.candidate, reducers=system.reducers,
            domain=system.domain, params=system.params, grid=grid,
            matrosov=system.matrosov, checks=system.checks, sim=system.sim)
    return system


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _report(args, line: str, text: str | None = None) -> None:
    print(line)
    if args.verbose and text:
        print(text, end="")


def cmd_reduce(args) -> int:
    system = _load(args)
    grid = system.require_grid()
    t0 = grid.time_nodes[0]
    probes = [(x, t0) for x in grid.nodes(system.domain)]
    table = tabulate_reduction(system.inclusion, system.reducers, probes)
    out = _outdir(args)
    _write_text(out / "reduction_table.csv", table.to_csv())
    _write_text(out / "reduction_table.txt", table.to_text())
    _report(args, f"reduce: {len(table.rows)} probes -> "
            f"{out / 'reduction_table.csv'}", table.to_text())
    return EXIT_OK


def cmd_deriv(args) -> int:
    system = _load(args)
    grid = system.require_grid()
    t0 = grid.time_nodes[0]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    n = system.n
    writer.writerow([f"x{i+1}" for i in range(n)] + ["t", "generalized",
                    "baseline_max", "baseline_lo", "baseline_hi"])
    for x in grid.nodes(system.domain):
        gen = generalized_derivative(system.candidate, system.inclusion,
                                     system.reducers, x, t0)
        bmax = baseline_max_derivative(system.candidate, system.inclusion,
                                       x, t0)
        bint = baseline_interval_derivative(system.candidate,
                                            system.inclusion, x, t0)
        row = [repr(v) for v in x] + [repr(t0)]
        row.append("-inf" if gen.is_minus_inf else repr(gen.value))
        row.append("-inf" if bmax.is_minus_inf else repr(bmax.value))
        if bint.value.is_empty:
            row += ["", ""]
        else:
            row += [repr(bint.value.lo), repr(bint.value.hi)]
        writer.writerow(row)
    out = _outdir(args)
    _write_text(out / "derivatives.csv", buf.getvalue())
    _report(args, f"deriv: wrote {out / 'derivatives.csv'}")
    return EXIT_OK


def cmd_certify(args) -> int:
    system = _load(args)
    checks = system.checks
    tol = args.tol if args.tol is not None else 1e-9
    if checks is not None and checks.decrease_bound is not None:
        bound = checks.decrease_bound
        sandwich = None
        if checks.lower_envelope is not None and \
                checks.upper_envelope is not None:
            sandwich = (checks.lower_envelope, checks.upper_envelope)
        certificate = cert.certify_lyapunov(system, bound, tol=tol,
                                            sandwich=sandwich)
    elif checks is not None and checks.semidef_bound is not None:
        certificate = cert.certify_semidefinite(system, checks.semidef_bound,
                                                tol=tol)
    else:
        raise SchemaError(
            "certify needs a 'certify' block with a 'W' or 'W_semidef' "
            "expression")
    out = _outdir(args)
    _write_json(out / "certificate.json", certificate.to_dict())
    _write_text(out / "certificate.txt", certificate.to_text())
    _report(args, f"certify: {certificate.verdict} "
            f"({out / 'certificate.json'})", certificate.to_text())
    return EXIT_OK if certificate.certified else EXIT_NEGATIVE


def cmd_invariance(args) -> int:
    system = _load(args)
    zero_tol = args.tol
    if zero_tol is None:
        zero_tol = system.checks.zero_tol if system.checks else 1e-6
    report = cert.invariance_data(system, zero_tol=zero_tol)
    out = _outdir(args)
    _write_json(out / "invariance.json", report.to_dict())
    lines = [report.semidefinite.to_text(),
             f"vanishing-derivative nodes: {len(report.e_nodes)}"]
    for c in report.candidates:
        word = "equilibrium" if c.is_equilibrium else "not an equilibrium"
        lines.append(f"candidate {list(c.point)}: {word}")
    text = "\n".join(lines) + "\n"
    _write_text(out / "invariance.txt", text)
    _report(args, f"invariance: {report.semidefinite.verdict}, "
            f"{len(report.e_nodes)} vanishing nodes "
            f"({out / 'invariance.json'})", text)
    return EXIT_OK if report.semidefinite.certified else EXIT_NEGATIVE


def cmd_matrosov(args) -> int:
    system = _load(args)
    problem = cert.build_matrosov_problem(system)
    grid = system.require_grid()
    eq_tol = args.tol if args.tol is not None else 1e-6
    z_nodes, x_nodes = cert.matrosov_grid(problem, system, grid)
    chain = cert.matrosov_chain(problem, z_nodes, x_nodes, eq_tol=eq_tol)
    result = None
    verify = None
    if chain.certified:
        result = cert.matrosov_constants(problem, z_nodes, x_nodes,
                                         zeta_target=args.zeta_target,
                                         eq_tol=eq_tol)
        if result.certificate.certified and args.verify_factor > 1:
            fine = grid.refined(args.verify_factor)
            zf, xf = cert.matrosov_grid(problem, system, fine)
            verify = cert.verify_combined_bound(
                problem, result.constants, result.zeta, zf, xf)
    bounds = cert.matrosov_derivative_bounds(system, problem, grid)
    doc = {"chain": chain.to_dict(),
           "constants": None if result is None else result.to_dict(),
           "verification": None if verify is None else verify.to_dict(),
           "derivative_bounds": bounds.to_dict()}
    out = _outdir(args)
    _write_json(out / "matrosov.json", doc)
    pieces = [chain.to_text()]
    if result is not None:
        pieces.append(f"constants: {list(result.constants)} "
                      f"zeta={result.zeta!r}\n")
        pieces.append(result.certificate.to_text())
    if verify is not None:
        pieces.append(verify.to_text())
    pieces.append(bounds.to_text())
    text = "".join(pieces)
    _write_text(out / "matrosov.txt", text)
    ok = chain.certified and result is not None \
        and result.certificate.certified \
        and (verify is None or verify.certified)
    _report(args, f"matrosov: chain {chain.verdict}"
            + (f", constants {result.certificate.verdict}" if result else "")
            + f" ({out / 'matrosov.json'})", text)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_simulate(args) -> int:
    system = _load(args)
    sim = system.sim or SimSpec()
    if args.x0 is not None:
        x0 = tuple(float(v) for v in args.x0.split(","))
    elif sim.x0 is not None:
        x0 = sim.x0
    else:
        raise SchemaError("simulate needs --x0 or a 'simulate' block "
                          "with an 'x0' entry")
    t0 = args.t0 if args.t0 is not None else sim.t0
    h = args.h if args.h is not None else sim.h
    horizon = args.T if args.T is not None else sim.horizon
    strategy = SelectionStrategy(
        kind=args.strategy if args.strategy else sim.strategy,
        seed=args.seed if args.seed is not None else sim.seed)

    traj = integrate(system, x0, t0, h, horizon, strategy)
    out = _outdir(args)
    write_trajectory_csv(traj, out / "trajectory.csv")

    if args.tol is not None:
        tol = args.tol
    else:
        scale = 0.0
        for step in traj.steps:
            fbox = eval_map(system.inclusion, step.x, step.t)
            scale = max(scale, fbox.max_vertex_norm())
        tol = 1e-2 * max(1.0, scale)
    membership = check_reduction_membership(traj, system, tol)

    diagnostics = {
        "x0": list(x0), "t0": t0, "h": h, "T": horizon,
        "strategy": strategy.kind, "seed": strategy.seed,
        "final_t": traj.final_t, "final_x": list(traj.final_x),
        "final_norm": traj.final_norm, "exited": traj.exited,
        "membership": membership.to_dict(),
    }
    passed = membership.passed
    checks = system.checks
    if checks is not None and checks.decrease_bound is not None:
        descent = check_lyapunov_descent(traj, system, checks.decrease_bound)
        diagnostics["descent"] = descent.to_dict()
        passed = passed and descent.passed
    if checks is not None and checks.semidef_bound is not None:
        tail_fraction = (args.tail_fraction if args.tail_fraction is not None
                         else sim.tail_fraction)
        tail = check_partial_convergence(traj, system, checks.semidef_bound,
                                         tail_fraction, sim.tail_threshold)
        diagnostics["tail"] = tail.to_dict()
        passed = passed and tail.passed
    diagnostics["checks_passed"] = passed
    _write_json(out / "diagnostics.json", diagnostics)
    _report(args, f"simulate: {len(traj.steps)} steps, final norm "
            f"{traj.final_norm:.6g}, checks_passed={passed} "
            f"({out / 'diagnostics.json'})")
    return EXIT_OK if passed else EXIT_NEGATIVE


def cmd_validate_gradient(args) -> int:
    system = _load(args)
    functions = [system.candidate, *system.reducers]
    if system.matrosov is not None:
        functions.extend(system.matrosov.functions)
        for coll in system.matrosov.collections:
            functions.extend(coll)
    probes = _default_probes(system)
    reports = []
    all_passed = True
    for f in functions:
        for x in probes:
            rep = validate_gradient(f, x, 0.0, radius=args.radius,
                                    samples=args.samples, seed=args.seed or 0)
            reports.append(rep.to_dict())
            all_passed = all_passed and rep.passed
    out = _outdir(args)
    _write_json(out / "gradient_validation.json",
                {"passed": all_passed, "radius": args.radius,
                 "samples": args.samples, "reports": reports})
    _report(args, f"validate-gradient: {'PASS' if all_passed else 'FAIL'} "
            f"over {len(reports)} probes "
            f"({out / 'gradient_validation.json'})")
    return EXIT_OK if all_passed else EXIT_NEGATIVE


def _default_probes(system: SystemDef, cap: int = 64) -> list[tuple[float, ...]]:
    """Domain corners/center products plus per-axis include coordinates."""
    axes = []
    for i in range(system.n):
        iv = system.domain.axes[i]
        vals = {iv.lo, iv.center, iv.hi}
        if system.grid is not None:
            vals.update(system.grid.include[i])
        axes.append(sorted(vals))
    import itertools
    probes = list(itertools.product(*axes))
    return probes[:cap]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="incred",
        description="Reduced differential inclusions: reduction tables, "
                    "set-valued derivatives, grid certificates, Matrosov "
                    "chains, and selection-based simulation.",
        epilog="INCRED_THREADS caps parallelism (current implementation is "
               "sequential).")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", "-i", required=True,
                       help="system definition JSON file")
        p.add_argument("--out", "-o", default="out",
                       help="output directory (default: ./out)")
        p.add_argument("--grid", type=int, default=None, metavar="N",
                       help="override: uniform N nodes per axis")
        p.add_argument("--grid-file", default=None, metavar="PATH",
                       help="override: grid block from a JSON file")
        p.add_argument("--tol", type=float, default=None,
                       help="tolerance override (meaning depends on the "
                            "subcommand)")
        p.add_argument("--seed", type=int, default=None,
                       help="random seed where applicable")
        p.add_argument("--baseline", action="store_true",
                       help="use the candidate function as the only reducer")
        p.add_argument("--verbose", "-v", action="store_true")

    p = sub.add_parser("reduce", help="tabulate the reduced inclusion")
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("deriv", help="tabulate derivative values")
    common(p)
    p.set_defaults(func=cmd_deriv)

    p = sub.add_parser("certify", help="grid-certify the decrease condition")
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("invariance", help="vanishing set and equilibrium "
                       "screening (autonomous)")
    common(p)
    p.set_defaults(func=cmd_invariance)

    p = sub.add_parser("matrosov", help="Matrosov chain and constants")
    common(p)
    p.add_argument("--zeta-target", type=float, default=None,
                   help="override the estimated decay level")
    p.add_argument("--verify-factor", type=int, default=10,
                   help="refinement factor for the verification grid "
                        "(default 10; 1 disables)")
    p.set_defaults(func=cmd_matrosov)

    p = sub.add_parser("simulate", help="integrate a trajectory and check it")
    common(p)
    p.add_argument("--x0", default=None,
                   help="initial state, comma separated")
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--h", type=float, default=None, help="step size")
    p.add_argument("--T", type=float, default=None, help="final time")
    p.add_argument("--strategy", default=None,
                   choices=["midpoint", "reduced-descent", "random-extreme"])
    p.add_argument("--tail-fraction", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate-gradient",
                       help="finite-difference check of declared gradients")
    common(p)
    p.add_argument("--radius", type=float, default=2e-5,
                   help="sampling ball radius (default 2e-5)")
    p.add_argument("--samples", type=int, default=200,
                   help="samples per probe point (default 200)")
    p.set_defaults(func=cmd_validate_gradient)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _check_thread_cap()
        return args.func(args)
    except json.JSONDecodeError as e:
        print(f"error: malformed JSON: {e}", file=_sys.stderr)
        return EXIT_PARSE
    except DslSyntaxError as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_PARSE
    except IncredError as e:
        print(f"error: {e}", file=_sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    raise SystemExit(main())
