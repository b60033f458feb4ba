"""Model problems, error measures and the convergence / inf-sup studies.

Two travelling-wave solutions of the interior problem on (0, L) x (0, T)
supply Dirichlet data::

    u_a(x, t) = (t - x - 2)^3 (t - x)^3 / 2    for x <= t <= x + 2, else 0
    u_b(x, t) = |sin(pi (x - t))| / 2          for x <= t,          else 0

Both satisfy g(0, t) = g(L, t + L), so the second-kind equation with
sign -1/2 has the closed-form density z(0, t) = -2 g(L, t + L), z(L, t) = 0.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .basis import DiscreteSpace, SpaceKind, StrandPair, TraceFunction, nodal_interpolate, to_trace
from .errors import PreconditionError
from .mesh import LateralMesh, paper_nonuniform_initial, refine, shifted_pair_mesh, slice_count, uniform_mesh
from .operator import INTERIOR, QuadratureSpec, assemble_matrix, assemble_rhs, gauss_nodes, mass_matrix
from .solver import InfSupProblem, condition_number_2, infsup_constant, min_rayleigh_quotient, solve_dense
from .spectral import dual_gram, h_half_norm, primal_gram

logger = logging.getLogger(__name__)

PROBLEMS = ("a", "b")
FAMILIES = ("uniform", "shifted_pair", "paper_fig1", "paper_nonuniform")
ERROR_MEASURES = ("l2", "h12")


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------
def _u_a(x: float):
    def g(t):
        s = np.asarray(t, dtype=float) - x
        return np.where((s >= 0) & (s <= 2), 0.5 * (s - 2) ** 3 * s**3, 0.0)

    return g


def _u_b(x: float):
    def g(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= x, 0.5 * np.abs(np.sin(np.pi * (x - t))), 0.0)

    return g


def _kinks_a(x: float, T: float) -> np.ndarray:
    k = np.array([x, x + 2.0])
    return k[(k >= 0) & (k <= T)]


def _kinks_b(x: float, T: float) -> np.ndarray:
    k = x + np.arange(0, math.ceil(T - x) + 1) if T >= x else np.array([])
    return k[(k >= 0) & (k <= T)]


@dataclass(frozen=True)
class TraceData:
    """Lateral traces of a model solution and a kink locator per strand."""

    g: tuple[Callable, Callable]
    kink_locator: Callable[[float, float], np.ndarray]
    L: float

    def kinks(self, T: float) -> tuple[np.ndarray, np.ndarray]:
        return (self.kink_locator(0.0, T), self.kink_locator(self.L, T))


def trace_data(problem: str, L: float) -> TraceData:
    """Dirichlet traces g(0, .), g(L, .) of u_a or u_b."""
    if problem == "a":
        return TraceData((_u_a(0.0), _u_a(L)), _kinks_a, L)
    if problem == "b":
        return TraceData((_u_b(0.0), _u_b(L)), _kinks_b, L)
    raise ValueError(f"unknown problem {problem!r}; expected one of {PROBLEMS}")


@dataclass(frozen=True)
class ProblemSpec:
    id: str
    L: float
    T: float
    g: tuple[Callable, Callable]
    g_kinks: tuple[np.ndarray, np.ndarray]
    exact_density: tuple[Callable, Callable] | None = None
    density_kinks: tuple[np.ndarray, np.ndarray] = field(default=((), ()))

    def rhs_quadrature(self, order: int = 8) -> QuadratureSpec:
        return QuadratureSpec(order, self.g_kinks)

    def density_quadrature(self, order: int = 8) -> QuadratureSpec:
        return QuadratureSpec(order, self.density_kinks)


def satisfies_shift_condition(g: StrandPair, L: float, T: float, n_samples: int = 2001, atol: float = 1e-12) -> bool:
    """Sampled check of g(0, t) = g(L, t + L) on [-L, T]."""
    t = np.linspace(-L, T, n_samples)
    return bool(np.max(np.abs(np.asarray(g[0](t)) - np.asarray(g[1](t + L)))) <= atol)


def exact_density(data: TraceData, T: float) -> tuple[tuple[Callable, Callable], tuple[np.ndarray, np.ndarray]]:
    """Closed-form solution of (-Id/2 + K) z = g and its kink sets."""
    L = data.L
    if not satisfies_shift_condition(data.g, L, T):
        raise PreconditionError("Dirichlet data does not satisfy g(0, t) = g(L, t + L)")
    gL = data.g[1]

    def z0(t):
        return -2.0 * np.asarray(gL(np.asarray(t, dtype=float) + L), dtype=float)

    def zL(t):
        return np.zeros_like(np.asarray(t, dtype=float))

    k = data.kink_locator(L, T + L) - L
    return (z0, zL), (k[(k >= 0) & (k <= T)], np.array([]))


def make_problem(problem: str, L: float = 3.0, T: float = 6.0) -> ProblemSpec:
    data = trace_data(problem, L)
    dens, dk = exact_density(data, T)
    return ProblemSpec(problem, L, T, data.g, data.kinks(T), dens, dk)


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------
def _graded_seed(L: float, m: int) -> np.ndarray:
    return L * (np.arange(m + 1) / m) ** 1.5


def _random_seed(L: float, m: int, rng: np.random.Generator) -> np.ndarray:
    w = rng.uniform(0.5, 1.5, m)
    return np.concatenate([[0.0], L * np.cumsum(w)[:-1] / w.sum(), [L]])


def family_mesh(family: str, level: int, L: float = 3.0, T: float = 6.0, N: int = 64, seed: int = 0) -> LateralMesh:
    """Mesh number ``level`` (0-based, by uniform bisection) of a family whose
    coarsest member has about ``N`` elements in total."""
    if family == "uniform":
        if N % 2:
            raise ValueError("uniform family needs an even total element count")
        base = uniform_mesh(L, T, N // 2)
    elif family == "paper_nonuniform":
        base = paper_nonuniform_initial(L, T, 40 * N // 64, 24 * N // 64)
    elif family in ("shifted_pair", "paper_fig1"):
        n = slice_count(L, T).n
        if abs(n * L - T) > 1e-12 * T:
            raise ValueError(f"{family} meshes need T = nL; got T={T}, L={L}")
        m = max(1, N // (2 * n))
        if family == "paper_fig1":
            seeds = (np.linspace(0.0, L, m + 1), _graded_seed(L, m))
        else:
            rng = np.random.default_rng(seed)
            seeds = (_random_seed(L, m, rng), _random_seed(L, m, rng))
        base = shifted_pair_mesh(L, n, *seeds)
        base = LateralMesh(base.L, base.T, base.left_breaks, base.right_breaks, family=family)
    else:
        raise ValueError(f"unknown mesh family {family!r}; expected one of {FAMILIES}")
    for _ in range(level):
        base = refine(base)
    return base


# ---------------------------------------------------------------------------
# solving and errors
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Solution:
    space: DiscreteSpace
    coeffs: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray

    @property
    def trace(self) -> TraceFunction:
        return to_trace(self.space, self.coeffs)


def solve_problem(spec: ProblemSpec, space: DiscreteSpace, quad_order: int = 8) -> Solution:
    A = assemble_matrix(space, INTERIOR)
    b = assemble_rhs(spec.g, space, spec.rhs_quadrature(quad_order))
    return Solution(space, solve_dense(A, b), A, b)


def l2_error(numeric: TraceFunction, exact: StrandPair, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """||numeric - exact||_{L2(Sigma)} by Gauss quadrature split at the
    numeric breakpoints and the declared kinks of ``exact``."""
    total = 0.0
    for s, f in enumerate(numeric.strands):
        t, w, _, _ = gauss_nodes(f.breaks, quad.kinks_on(s), quad.order)
        d = f(t) - np.asarray(exact[s](t), dtype=float)
        total += float(np.sum(d * d * w))
    return math.sqrt(total)


def h_half_error(
    numeric_coeffs,
    spec: ProblemSpec,
    space: DiscreteSpace,
    K: int | None = None,
    interp_refinements: int = 1,
) -> float:
    """||I z - z_h||_{H^{1/2}_{0,}(Sigma)} with I a nodal interpolant.

    The interpolant of the exact density lives on ``space``'s mesh bisected
    ``interp_refinements`` times.  The default of one bisection measures the
    error against a reference twice as fine as the discretisation; with 0
    it is the plain nodal interpolant I_h on the same mesh.
    """
    if space.kind is not SpaceKind.PW_LINEAR_ZERO_INIT:
        raise ValueError("the H^1/2 error needs the p1 space")
    if spec.exact_density is None:
        raise PreconditionError("no exact density available")
    if int(interp_refinements) != interp_refinements or interp_refinements < 0:
        raise ValueError("interp_refinements must be a non-negative integer")
    fine = space
    for _ in range(int(interp_refinements)):
        fine = DiscreteSpace(space.kind, refine(fine.mesh))
    reference = to_trace(fine, nodal_interpolate(spec.exact_density, fine))
    numeric = to_trace(space, np.asarray(numeric_coeffs, dtype=float))
    return h_half_norm(reference - numeric, K)


def residual_l2(spec: ProblemSpec, space_points: int = 4096, order: int = 8) -> float:
    """||(-Id/2 + K) z - g||_{L2(Sigma)} for the exact density, by quadrature."""
    L, T = spec.L, spec.T
    z = spec.exact_density
    total = 0.0
    for s in (0, 1):
        kinks = np.concatenate([spec.g_kinks[s], spec.density_kinks[s], spec.density_kinks[1 - s] + L])
        t, w, _, _ = gauss_nodes(np.linspace(0.0, T, space_points + 1), kinks, order)
        delayed = np.where(t - L >= 0, z[1 - s](np.maximum(t - L, 0.0)), 0.0)
        r = -0.5 * z[s](t) - 0.5 * delayed - spec.g[s](t)
        total += float(np.sum(r * r * w))
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# studies
# ---------------------------------------------------------------------------
@dataclass
class ConvergenceRecord:
    N: int
    error: float
    eoc: float | None
    kappa: float
    min_rayleigh: float | None = None


def eoc(errors: Sequence[float]) -> list[float | None]:
    """log2 of successive error ratios; None for the first entry."""
    out: list[float | None] = [None]
    for e0, e1 in zip(errors[:-1], errors[1:]):
        out.append(math.log2(e0 / e1))
    return out


def convergence_study(
    problem: str,
    kind: str | SpaceKind,
    family: str = "uniform",
    levels: int = 6,
    L: float = 3.0,
    T: float = 6.0,
    N: int = 64,
    K: int | None = None,
    quad_order: int = 8,
    seed: int = 0,
    with_rayleigh: bool = False,
    error: str = "auto",
    interp_refinements: int = 1,
) -> list[ConvergenceRecord]:
    """Assemble, solve and measure on ``levels`` successive bisections.

    ``error`` is ``"l2"`` (against the exact density), ``"h12"`` (the
    H^{1/2}_{0,} norm against an interpolant, see :func:`h_half_error`; p1
    only) or ``"auto"``, which picks l2 for p0 and h12 for p1.
    """
    if levels < 2:
        raise ValueError("a convergence study needs at least two levels")
    kind = SpaceKind(kind)
    if error == "auto":
        error = "l2" if kind is SpaceKind.PW_CONSTANT else "h12"
    if error not in ERROR_MEASURES:
        raise ValueError(f"unknown error measure {error!r}; expected one of {ERROR_MEASURES}")
    if error == "h12" and kind is SpaceKind.PW_CONSTANT:
        raise ValueError("the H^1/2 error is only defined for the p1 space")
    spec = make_problem(problem, L, T)
    errors, kappas, rq, Ns = [], [], [], []
    for lev in range(levels):
        space = DiscreteSpace(kind, family_mesh(family, lev, L, T, N, seed))
        sol = solve_problem(spec, space, quad_order)
        if error == "l2":
            err = l2_error(sol.trace, spec.exact_density, spec.density_quadrature(quad_order))
        else:
            err = h_half_error(sol.coeffs, spec, space, K, interp_refinements)
        errors.append(err)
        kappas.append(condition_number_2(sol.matrix))
        Ns.append(space.mesh.total_elements)
        rq.append(min_rayleigh_quotient(sol.matrix, mass_matrix(space)) if with_rayleigh else None)
        logger.info("problem %s %s N=%d error=%.3e kappa=%.3f", problem, kind.value, Ns[-1], err, kappas[-1])
    return [ConvergenceRecord(n, e, o, k, r) for n, e, o, k, r in zip(Ns, errors, eoc(errors), kappas, rq)]


def infsup_point(mesh: LateralMesh, K: int | None = None) -> float:
    space = DiscreteSpace(SpaceKind.PW_LINEAR_ZERO_INIT, mesh)
    B = assemble_matrix(space, INTERIOR)
    return infsup_constant(InfSupProblem(B, primal_gram(space, K), dual_gram(space, K)))


def infsup_study(
    mode: str,
    family: str = "uniform",
    levels: int = 5,
    ns: Iterable[int] = range(1, 7),
    L: float = 3.0,
    K: int | None = None,
) -> list[tuple[int, float]]:
    """Discrete inf-sup constants of the p1 scheme.

    ``refine_fixed_T``: successive bisections starting from 16 elements in
    total (uniform, T=6) or from the 40/24 mesh (paper_nonuniform, T=2*pi);
    returns (N, constant).  ``vary_T_fixed_h``: T = nL with h = 3/16
    (uniform) or T = n*pi with h_0 = pi/20, h_L = pi/12 (paper_nonuniform);
    returns (n, constant).
    """
    out = []
    if mode == "refine_fixed_T":
        if family == "uniform":
            meshes = [family_mesh("uniform", lev, L, 6.0, 16) for lev in range(levels)]
        elif family == "paper_nonuniform":
            meshes = [family_mesh("paper_nonuniform", lev, L, 2 * math.pi, 64) for lev in range(levels)]
        else:
            raise ValueError(f"unsupported family {family!r} for refine_fixed_T")
        for m in meshes:
            out.append((m.total_elements, infsup_point(m, K)))
    elif mode == "vary_T_fixed_h":
        for n in ns:
            if family == "uniform":
                T = n * L
                m = uniform_mesh(L, T, round(T / (3 / 16)))
            elif family == "paper_nonuniform":
                m = paper_nonuniform_initial(L, n * math.pi, 20 * n, 12 * n)
            else:
                raise ValueError(f"unsupported family {family!r} for vary_T_fixed_h")
            out.append((n, infsup_point(m, K)))
    else:
        raise ValueError(f"unknown inf-sup study mode {mode!r}")
    return out


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------
CSV_COLUMNS = ("N", "error", "eoc", "kappa")


def records_to_csv(records: Sequence[ConvergenceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.N, repr(r.error), "" if r.eoc is None else repr(r.eoc), repr(r.kappa)])
    return buf.getvalue()


def records_to_json(records: Sequence[ConvergenceRecord], **meta) -> str:
    return json.dumps({"schema": 1, **meta, "rows": [asdict(r) for r in records]}, indent=2)


def format_table(records: Sequence[ConvergenceRecord]) -> str:
    """Human-readable table with three significant digits."""
    lines = [f"{'N':>6}  {'error':>9}  {'eoc':>5}  {'kappa':>9}"]
    for r in records:
        o = "-" if r.eoc is None else f"{r.eoc:.2f}"
        lines.append(f"{r.N:>6}  {r.error:9.2E}  {o:>5}  {r.kappa:9.2E}")
    return "\n".join(lines)


def study_basename(problem: str, kind: str, family: str) -> str:
    return f"convergence_{problem}_{SpaceKind(kind).value}_{family}"
