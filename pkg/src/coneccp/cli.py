"""Command-line front end.

Subcommands:

    solve ccp            feasible-start convex-concave procedure
    solve penalty-ccp    penalty method, infeasible starts allowed
    check criticality    residuals at a candidate point
    check generalized    penalized residual at a (possibly infeasible) point
    decompose lambda-max entrywise DC split of the largest-eigenvalue function
    verify convexity     randomized cone-convexity check of the constraint map
    list builtins        names accepted by --builtin

Exit codes: 0 success, 2 infeasible start (solve ccp), 3 schema/problem-file
error, 4 iteration limit, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import ccp, certificates, penalty
from .dc import lambda_max_dc_decomposition, lambda_max_subgradient, \
    verify_k_convexity
from .errors import ConeCcpError, InfeasibleStart, SchemaError
from .library import BUILTINS, builtin
from .problem_io import load_componentwise, load_problem

EXIT_OK = 0
EXIT_INFEASIBLE_START = 2
EXIT_SCHEMA = 3
EXIT_ITER_LIMIT = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _add_problem_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", metavar="FILE", help="JSON problem file")
    src.add_argument("--builtin", metavar="NAME",
                     help="built-in instance name (see `list builtins`)")


def _add_common_solver_args(p):
    p.add_argument("--x0", metavar="CSV", required=True,
                   help="starting point, comma separated")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="stopping tolerance (objective/merit change)")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", metavar="PATH",
                   help="write one JSON record per iteration (JSONL)")
    p.add_argument("--json", action="store_true",
                   help="print the final report as JSON")


def build_parser() -> _Parser:
    parser = _Parser(prog="coneccp", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    solve = sub.add_parser("solve", help="run a solver")
    solve_sub = solve.add_subparsers(dest="algorithm", required=True,
                                     parser_class=_Parser)
    p_ccp = solve_sub.add_parser("ccp", help="feasible-start CCP")
    _add_problem_args(p_ccp)
    _add_common_solver_args(p_ccp)

    p_pen = solve_sub.add_parser("penalty-ccp", help="penalty CCP")
    _add_problem_args(p_pen)
    _add_common_solver_args(p_pen)
    p_pen.add_argument("--tau0", type=float, default=1.0,
                       help="initial penalty scale along the cone identity")
    p_pen.add_argument("--mu", type=float, default=2.0,
                       help="penalty growth factor (> 1)")
    p_pen.add_argument("--kappa", type=float, default=1e-6,
                       help="slack-norm threshold below which the penalty "
                            "stops growing")
    p_pen.add_argument("--tau-max", type=float, default=float("inf"),
                       help="cap on the penalty norm")

    check = sub.add_parser("check", help="certificates at a point")
    check_sub = check.add_subparsers(dest="what", required=True,
                                     parser_class=_Parser)
    p_crit = check_sub.add_parser("criticality")
    _add_problem_args(p_crit)
    p_crit.add_argument("--x0", metavar="CSV", required=True)
    p_crit.add_argument("--tol", type=float, default=1e-8)
    p_crit.add_argument("--json", action="store_true")
    p_gen = check_sub.add_parser("generalized")
    _add_problem_args(p_gen)
    p_gen.add_argument("--x0", metavar="CSV", required=True)
    p_gen.add_argument("--tau0", type=float, required=True)
    p_gen.add_argument("--tol", type=float, default=1e-8)
    p_gen.add_argument("--json", action="store_true")

    dec = sub.add_parser("decompose", help="DC decompositions")
    dec_sub = dec.add_subparsers(dest="what", required=True,
                                 parser_class=_Parser)
    p_lmax = dec_sub.add_parser("lambda-max")
    _add_problem_args(p_lmax)
    p_lmax.add_argument("--x0", metavar="CSV", default=None,
                        help="also report a subgradient pair at this point")
    p_lmax.add_argument("--samples", type=int, default=25)
    p_lmax.add_argument("--seed", type=int, default=0)
    p_lmax.add_argument("--json", action="store_true")

    ver = sub.add_parser("verify", help="oracle verification")
    ver_sub = ver.add_subparsers(dest="what", required=True,
                                 parser_class=_Parser)
    p_conv = ver_sub.add_parser("convexity")
    _add_problem_args(p_conv)
    p_conv.add_argument("--samples", type=int, default=200)
    p_conv.add_argument("--seed", type=int, default=0)
    p_conv.add_argument("--json", action="store_true")

    lst = sub.add_parser("list", help="enumerate resources")
    lst_sub = lst.add_subparsers(dest="what", required=True,
                                 parser_class=_Parser)
    lst_sub.add_parser("builtins")
    return parser


def _load(args):
    if args.builtin is not None:
        return builtin(args.builtin)
    return load_problem(args.problem)


def _parse_x0(text) -> np.ndarray:
    try:
        return np.array([float(t) for t in str(text).split(",")])
    except ValueError as exc:
        raise SchemaError(f"cannot parse --x0 {text!r}: {exc}") from exc


def _emit(doc, as_json):
    if as_json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for key, val in doc.items():
            print(f"{key}: {val}")


def _write_trace(path, records):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def _cmd_solve(args) -> int:
    problem = _load(args)
    x0 = _parse_x0(args.x0)
    if args.algorithm == "ccp":
        cfg = ccp.CcpConfig(eps_f=args.tol,
                            max_iter=args.max_iter or 500)
        trace = ccp.run_ccp(problem, x0, cfg)
        report = {
            "problem": problem.name, "algorithm": "ccp",
            "termination": trace.termination,
            "iterations": trace.iterations,
            "x": [float(c) for c in trace.final_x],
            "f0": trace.records[-1].f0,
            "infeas": trace.records[-1].infeas,
        }
        limit = trace.termination == ccp.MAX_ITER
    else:
        cfg = penalty.PenaltyConfig(tau0=args.tau0, mu=args.mu,
                                    kappa=args.kappa, tau_max=args.tau_max,
                                    eps_merit=args.tol,
                                    max_iter=args.max_iter or 1000)
        trace = penalty.run_penalty_ccp(problem, x0, cfg)
        last = trace.records[-1]
        report = {
            "problem": problem.name, "algorithm": "penalty_ccp",
            "termination": trace.termination,
            "iterations": trace.iterations,
            "x": [float(c) for c in trace.final_x],
            "f0": last.f0, "infeas": last.infeas,
            "s_norm": last.s_norm, "tau": last.tau, "merit": last.merit,
        }
        limit = trace.termination == penalty.MAX_ITER
    if args.trace:
        _write_trace(args.trace, trace.jsonl_records())
    _emit(report, args.json)
    return EXIT_ITER_LIMIT if limit else EXIT_OK


def _cmd_check(args) -> int:
    problem = _load(args)
    x = _parse_x0(args.x0)
    if args.what == "criticality":
        cert = certificates.certify(problem, x, lam=_known_multiplier(problem, x))
        report = {
            "x": [float(c) for c in x],
            "residual": cert.subproblem_gap,
            "verdict": "critical" if cert.subproblem_gap <= args.tol
                       else "not critical",
            "infeasibility": certificates.infeasibility(problem, x),
            "slater": None if cert.slater is None else {
                "holds": cert.slater.holds,
                "min_value": cert.slater.min_value,
            },
            "kkt": None if cert.kkt is None else {
                "stationarity": cert.kkt.stationarity,
                "complementarity": cert.kkt.complementarity,
                "dual_feasibility": cert.kkt.dual_feasibility,
            },
        }
    else:
        res = certificates.generalized_criticality_residual(
            problem, x, args.tau0)
        report = {
            "x": [float(c) for c in x], "tau": args.tau0, "residual": res,
            "verdict": "generalized critical" if res <= args.tol
                       else "not generalized critical",
            "infeasibility": certificates.infeasibility(problem, x),
        }
    _emit(report, args.json)
    return EXIT_OK


def _known_multiplier(problem, x):
    mults = problem.known_facts.get("multipliers")
    if not isinstance(mults, dict) or x.size != 1:
        return None
    lam = mults.get(f"{float(x[0]):.1f}") or mults.get(str(float(x[0])))
    if lam is None:
        return None
    return problem.constraint.cone.element(np.array([float(lam)]))


def _cmd_decompose(args) -> int:
    F, fs, name = load_componentwise(
        {"kind": "builtin", "name": args.builtin} if args.builtin
        else args.problem)
    split = lambda_max_dc_decomposition(F)
    rng = np.random.default_rng(args.seed)
    rows = []
    worst = 0.0
    for _ in range(args.samples):
        x = rng.uniform(fs.lo, fs.hi)
        lam = float(np.linalg.eigvalsh(F.value(x))[-1])
        g, h = split.g0.value(x), split.h0.value(x)
        worst = max(worst, abs(g - h - lam))
        rows.append({"x": [float(c) for c in x], "lambda_max": lam,
                     "g": g, "h": h})
    report = {"problem": name, "order": F.order,
              "max_identity_error": worst, "samples": rows}
    if args.x0 is not None:
        x = _parse_x0(args.x0)
        xi_g, xi_h = lambda_max_subgradient(F, x)
        report["subgradients_at_x0"] = {
            "x0": [float(c) for c in x],
            "g": [float(c) for c in xi_g],
            "h": [float(c) for c in xi_h],
        }
    _emit(report, args.json)
    return EXIT_OK


def _cmd_verify(args) -> int:
    problem = _load(args)
    fs = problem.feasible_set
    bounds = (fs.lo, fs.hi)
    report = {"problem": problem.name}
    for label, oracle in (("G", problem.constraint.G),
                          ("H", problem.constraint.H)):
        verdict = verify_k_convexity(oracle, problem.constraint.cone,
                                     args.samples, bounds, seed=args.seed)
        entry = {"passed": verdict.passed, "samples": verdict.samples}
        if verdict.witness is not None:
            w = verdict.witness
            entry["witness"] = {
                "x1": [float(c) for c in w.x1],
                "x2": [float(c) for c in w.x2],
                "alpha": w.alpha, "block": w.block,
                "z": [float(c) for c in w.z],
                "violation": w.violation,
            }
        report[label] = entry
    _emit(report, args.json)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "decompose":
            return _cmd_decompose(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "list":
            for name in sorted(BUILTINS):
                print(name)
            return EXIT_OK
    except InfeasibleStart as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE_START
    except (SchemaError, ConeCcpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
