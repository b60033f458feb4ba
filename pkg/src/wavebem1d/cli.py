"""Command-line interface: ``wavebem1d <subcommand> [options]``.

Subcommands
-----------
solve        solve one model problem and emit the density samples
convergence  run a refinement study (columns N,error,eoc,kappa)
infsup       discrete inf-sup constants under refinement or growing T
condnum      spectral condition number of one Galerkin matrix
verify       run the self-check suite and report pass/fail per property

Exit status is 0 on success, 2 for invalid parameters and 3 for numerical
failures.  The environment variable ``WAVEBEM1D_THREADS`` caps the number
of BLAS threads.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .basis import DiscreteSpace, SpaceKind, trace_samples_csv
from .checks import run_checks
from .errors import PreconditionError
from .experiments import (
    FAMILIES,
    PROBLEMS,
    convergence_study,
    family_mesh,
    h_half_error,
    infsup_study,
    l2_error,
    make_problem,
    format_table,
    records_to_csv,
    records_to_json,
    solve_problem,
)
from .operator import INTERIOR, assemble_matrix, write_matrix_binary
from .solver import condition_number_2

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
THREADS_ENV = "WAVEBEM1D_THREADS"

log = logging.getLogger("wavebem1d")


class UsageError(ValueError):
    """Invalid combination of command-line parameters."""


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one CLI invocation."""

    command: str
    problem: str = "a"
    space: str = "p0"
    mesh: str = "uniform"
    N: int = 64
    levels: int = 6
    L: float = 3.0
    T: float = 6.0
    modes: int | None = None
    out: str | None = None
    format: str = "csv"
    seed: int = 0
    error: str = "auto"
    study: str = "refine"
    n_max: int = 6
    matrix_out: str | None = None

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise UsageError(f"unknown problem {self.problem!r}")
        if self.mesh not in FAMILIES:
            raise UsageError(f"unknown mesh family {self.mesh!r}")
        if self.N < 2 or self.levels < 1 or self.n_max < 1:
            raise UsageError("--N must be at least 2, --levels and --n-max at least 1")
        if not (self.L > 0 and self.T > 0 and math.isfinite(self.L) and math.isfinite(self.T)):
            raise UsageError("--L and --T must be positive and finite")
        if self.modes is not None and self.modes < 1:
            raise UsageError("--modes must be positive")
        if self.error == "h12" and self.space == "p0":
            raise UsageError("the H^1/2 error needs --space p1")
        if self.command == "convergence" and self.levels < 2:
            raise UsageError("a convergence study needs --levels >= 2")
        if self.command == "infsup" and self.mesh not in ("uniform", "paper_nonuniform"):
            raise UsageError("infsup supports --mesh uniform or paper_nonuniform")
        if self.format == "table" and self.command not in ("convergence",):
            raise UsageError("--format table is only available for convergence")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", choices=PROBLEMS, default="a", help="model problem (default a)")
    common.add_argument("--space", choices=[k.value for k in SpaceKind], default="p0", help="boundary element space")
    common.add_argument("--mesh", choices=FAMILIES, default="uniform", help="mesh family")
    common.add_argument("--N", type=int, default=64, help="total element count of the (coarsest) mesh")
    common.add_argument("--levels", type=int, default=6, help="number of refinement levels")
    common.add_argument("--L", type=float, default=3.0, help="interval length")
    common.add_argument("--T", type=float, default=6.0, help="final time")
    common.add_argument("--modes", type=int, default=None, help="sine modes for H^1/2 quantities (default: automatic)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json", "table"), default="csv")
    common.add_argument("--seed", type=int, default=0, help="seed for randomised meshes and checks")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="wavebem1d", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve one problem")
    s.add_argument("--matrix-out", default=None, help="also write the Galerkin matrix (binary, JSON header)")
    c = sub.add_parser("convergence", parents=[common], help="refinement study")
    c.add_argument("--error", choices=("auto", "l2", "h12"), default="auto", help="error measure")
    i = sub.add_parser("infsup", parents=[common], help="inf-sup constants")
    i.add_argument("--study", choices=("refine", "vary-T"), default="refine",
                   help="refine at fixed T, or vary T=nL (uniform) / T=n*pi (paper_nonuniform) at fixed h")
    i.add_argument("--n-max", type=int, default=6, help="largest n for --study vary-T")
    sub.add_parser("condnum", parents=[common], help="condition number of one matrix")
    sub.add_parser("verify", parents=[common], help="run the self-check suite")
    return p


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _solve(cfg: RunConfig) -> int:
    spec = make_problem(cfg.problem, cfg.L, cfg.T)
    space = DiscreteSpace(SpaceKind(cfg.space), family_mesh(cfg.mesh, 0, cfg.L, cfg.T, cfg.N, cfg.seed))
    sol = solve_problem(spec, space)
    l2 = l2_error(sol.trace, spec.exact_density, spec.density_quadrature())
    summary = {"N": space.mesh.total_elements, "l2_error": l2, "kappa": condition_number_2(sol.matrix)}
    if space.kind is SpaceKind.PW_LINEAR_ZERO_INIT:
        summary["h12_error"] = h_half_error(sol.coeffs, spec, space, cfg.modes)
    if cfg.matrix_out:
        write_matrix_binary(cfg.matrix_out, sol.matrix, space, INTERIOR)
    if cfg.format == "json":
        doc = {"schema": 1, "problem": cfg.problem, "space": cfg.space, "mesh": cfg.mesh, "L": cfg.L, "T": cfg.T,
               **summary, "mesh_breaks": json.loads(space.mesh.to_json()), "coeffs": sol.coeffs.tolist()}
        _emit(json.dumps(doc, indent=2) + "\n", cfg.out)
    else:
        _emit(trace_samples_csv(sol.trace), cfg.out)
    for k, v in summary.items():
        log.info("%s = %s", k, v)
    return 0


def _convergence(cfg: RunConfig) -> int:
    records = convergence_study(
        cfg.problem, cfg.space, cfg.mesh, cfg.levels, cfg.L, cfg.T, cfg.N, cfg.modes, seed=cfg.seed, error=cfg.error,
    )
    if cfg.format == "json":
        text = records_to_json(records, problem=cfg.problem, space=cfg.space, mesh=cfg.mesh, L=cfg.L, T=cfg.T) + "\n"
    elif cfg.format == "table":
        text = format_table(records) + "\n"
    else:
        text = records_to_csv(records)
    _emit(text, cfg.out)
    return 0


def _infsup(cfg: RunConfig) -> int:
    if cfg.study == "refine":
        pts = infsup_study("refine_fixed_T", cfg.mesh, levels=cfg.levels, L=cfg.L, K=cfg.modes)
        header = ("N", "constant")
    else:
        pts = infsup_study("vary_T_fixed_h", cfg.mesh, ns=range(1, cfg.n_max + 1), L=cfg.L, K=cfg.modes)
        header = ("n", "constant")
    if cfg.format == "json":
        rows = [dict(zip(header, p)) for p in pts]
        _emit(json.dumps({"schema": 1, "study": cfg.study, "mesh": cfg.mesh, "rows": rows}, indent=2) + "\n", cfg.out)
    else:
        _emit(_rows_csv(header, pts), cfg.out)
    return 0


def _condnum(cfg: RunConfig) -> int:
    space = DiscreteSpace(SpaceKind(cfg.space), family_mesh(cfg.mesh, 0, cfg.L, cfg.T, cfg.N, cfg.seed))
    kappa = condition_number_2(assemble_matrix(space, INTERIOR))
    if cfg.format == "json":
        doc = {"schema": 1, "space": cfg.space, "mesh": cfg.mesh, "N": space.mesh.total_elements, "kappa": kappa}
        _emit(json.dumps(doc, indent=2) + "\n", cfg.out)
    else:
        _emit(_rows_csv(("N", "kappa"), [(space.mesh.total_elements, kappa)]), cfg.out)
    return 0


def _verify(cfg: RunConfig) -> int:
    results = run_checks(cfg.seed)
    if cfg.format == "json":
        rows = [{"name": r.name, "passed": r.passed, "value": r.value, "tol": r.tol} for r in results]
        _emit(json.dumps({"schema": 1, "seed": cfg.seed, "checks": rows}, indent=2) + "\n", cfg.out)
    else:
        _emit("".join(r.line() + "\n" for r in results), cfg.out)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {"solve": _solve, "convergence": _convergence, "infsup": _infsup, "condnum": _condnum, "verify": _verify}


def _thread_limit() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def run(cfg: RunConfig) -> int:
    """Execute a validated configuration and return the exit status."""
    cfg.validate()
    with threadpool_limits(limits=_thread_limit()):
        return COMMANDS[cfg.command](cfg)


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = vars(parser.parse_args(argv))
    logging.basicConfig(level=logging.INFO if args.pop("verbose") else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(RunConfig(**args))
    # LinAlgError derives from ValueError, so it must be caught first
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"wavebem1d {args['command']}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, PreconditionError, ValueError) as exc:
        print(f"wavebem1d {args['command']}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
