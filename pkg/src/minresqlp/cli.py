"""Command-line driver: load or generate a problem, run a solver, emit a
JSON report and optional CSV convergence history.

Exit codes: 0 when the solve converged or hit exact breakdown (flags 0, 1,
2, 6), 2 when a regularization limit stopped it (flags 3, 4, 5), 1 for any
error (I/O, parsing, asymmetric input, indefinite preconditioner).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import problems
from .common import SUCCESS_FLAGS, SolverConfig
from .minres import minres_solve
from .operators import (DenseSymmetricMatrix, check_symmetry,
                        load_matrix_market)
from .oracle import (MAX_ORACLE_DIM, condition_number, eigendecomposition,
                     optimal_residual_norm, pseudoinverse_solution)
from .precondition import binormalize, build_reformulation, diag_scaling
from .qlp import minresqlp_solve

DUMP_X_LIMIT = 10000


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="minresqlp",
        description="Solve a symmetric (possibly singular) system "
                    "(A - shift*I)x ~ b with MINRES or MINRES-QLP.")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="Matrix Market file (.mtx)")
    src.add_argument("--problem",
                     help="named problem, e.g. diag110, sec62, "
                          "laplacian:N=20, householder:n=797,eta=1e-8, "
                          "random_singular:n=30,deficit=2,seed=1")
    p.add_argument("--rhs", default="ones", choices=problems.RHS_MODES,
                   help="right-hand side mode (default: ones)")
    p.add_argument("--seed", type=int, default=0, help="rhs generator seed")
    p.add_argument("--solver", default="minresqlp",
                   choices=("minres", "minresqlp"))
    p.add_argument("--precond", default="none",
                   help="none | diag:<delta> | binorm")
    p.add_argument("--reform", default="none",
                   choices=("none",) + tuple(
                       ("augmented", "kkt", "normal_reg", "two_layer",
                        "kkt_reg")),
                   help="solve an equivalent compatible block system")
    p.add_argument("--delta", type=float, default=0.0,
                   help="regularization parameter for --reform")
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--maxit", type=int, default=None)
    p.add_argument("--maxxnorm", type=float, default=1e7)
    p.add_argument("--maxcond", type=float, default=1e15)
    p.add_argument("--trancond", type=float, default=1e7)
    p.add_argument("--symtol", type=float, default=1e-12,
                   help="relative symmetry tolerance for general-format input")
    p.add_argument("--history", help="write per-iteration CSV here")
    p.add_argument("--json", dest="json_path", help="write the report here")
    p.add_argument("--verify", action="store_true",
                   help=f"compare against the dense eigendecomposition "
                        f"oracle (n <= {MAX_ORACLE_DIM})")
    p.add_argument("--dump-x", action="store_true",
                   help=f"include x in the report even above n = {DUMP_X_LIMIT}")
    return p


def _build_preconditioner(spec: str, op):
    if spec == "none":
        return None
    if not isinstance(op, DenseSymmetricMatrix):
        raise ValueError(
            "entry-based preconditioners need an explicit dense matrix")
    if spec == "binorm":
        return binormalize(op).preconditioner()
    if spec.startswith("diag"):
        _, _, val = spec.partition(":")
        delta = float(val) if val else 1.0
        return diag_scaling(op, delta).preconditioner()
    raise ValueError(f"unknown preconditioner {spec!r}")


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except BrokenPipeError:
        raise
    except Exception as exc:  # mapped to exit 1 with a message per contract
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _run(args) -> int:
    if args.matrix:
        op = load_matrix_market(args.matrix, symmetry_tol=args.symtol)
        problem_name = args.matrix
    else:
        op = problems.build_problem(args.problem)
        problem_name = args.problem

    if isinstance(op, DenseSymmetricMatrix):
        b = problems.make_rhs(op, args.rhs, seed=args.seed)
    else:
        if args.rhs != "ones" and args.rhs != "incompatible":
            raise ValueError(
                f"rhs mode {args.rhs!r} needs a dense matrix; "
                "use ones or incompatible for sparse input")
        b = np.ones(op.n) if args.rhs == "ones" else \
            problems.Lcg(args.seed).uniforms(op.n)

    check_symmetry(op, trials=10, rtol=max(args.symtol, 1e-10))

    config = SolverConfig(tol=args.tol, maxit=args.maxit,
                          maxxnorm=args.maxxnorm, maxcond=args.maxcond,
                          trancond=args.trancond, shift=args.shift)

    solve_op, solve_rhs, extract = op, b, (lambda u: u)
    if args.reform != "none":
        solve_op, solve_rhs, extract = build_reformulation(
            op, b, args.reform, args.delta)

    precond = _build_preconditioner(args.precond, solve_op)

    t0 = time.perf_counter()
    if args.solver == "minres":
        if precond is not None:
            raise ValueError("the minres driver takes no preconditioner; "
                             "use --solver minresqlp")
        result = minres_solve(solve_op, solve_rhs, config,
                              record_history=bool(args.history))
    else:
        result = minresqlp_solve(solve_op, solve_rhs, config, precond=precond,
                                 record_history=bool(args.history))
    wall = time.perf_counter() - t0

    x = extract(result.x)
    # direct checks against the original system, one extra apply each
    r = b - op.apply(x) + args.shift * x
    rnorm = float(np.linalg.norm(r))
    arnorm = float(np.linalg.norm(op.apply(r) - args.shift * r))

    report = {
        "solver": args.solver,
        "problem": problem_name,
        "config": {
            "rhs": args.rhs, "seed": args.seed, "shift": args.shift,
            "tol": args.tol, "maxit": config.resolve_maxit(solve_op.n),
            "maxxnorm": args.maxxnorm, "maxcond": args.maxcond,
            "trancond": args.trancond, "precond": args.precond,
            "reform": args.reform, "delta": args.delta,
        },
        "result": {
            "flag": int(result.flag),
            "flag_name": result.flag.name,
            "iterations": result.iterations,
            "phi": result.phi, "psi": result.psi, "chi": result.chi,
            "anorm": result.anorm, "kappa": result.kappa,
            "omega": result.omega,
        },
        "direct": {
            "rnorm": rnorm, "arnorm": arnorm,
            "xnorm": float(np.linalg.norm(x)),
        },
        "wall_time_s": wall,
    }
    if op.n <= DUMP_X_LIMIT or args.dump_x:
        report["x"] = [float(v) for v in x]

    if args.verify:
        report["oracle"] = _verify(op, b, x, rnorm)

    text = json.dumps(report, indent=2)
    if args.json_path:
        with open(args.json_path, "w") as fh:
            fh.write(text + "\n")
    print(text)

    if args.history and result.history is not None:
        result.history.to_csv(args.history)

    return 0 if result.flag in SUCCESS_FLAGS else 2


def _verify(op, b, x, rnorm) -> dict:
    if op.n > MAX_ORACLE_DIM:
        return {"skipped": f"n > {MAX_ORACLE_DIM}"}
    a = op.array if isinstance(op, DenseSymmetricMatrix) else op.to_dense().array
    evd = eigendecomposition(a)
    x_dagger = pseudoinverse_solution(a, b, evd=evd)
    opt = optimal_residual_norm(a, b, evd=evd)
    return {
        "anorm": evd.anorm,
        "cond": condition_number(a, t=1.0, evd=evd),
        "pinv_distance": float(np.linalg.norm(x - x_dagger)),
        "pinv_xnorm": float(np.linalg.norm(x_dagger)),
        "optimal_rnorm": opt,
        "excess_rnorm": rnorm - opt,
    }


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
