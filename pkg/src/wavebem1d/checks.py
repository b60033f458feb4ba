"""Self-checks of the discretisation, run by ``wavebem1d verify``.

Each check builds small randomised instances from a seed and compares two
independent routes to the same number.  The result records the observed
discrepancy next to the tolerance it was held to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import DiscreteSpace, SpaceKind, basis_function, l2_inner, nodal_interpolate, to_trace
from .experiments import make_problem, residual_l2
from .mesh import refine, satisfies_slice_shift, shifted_pair_mesh, uniform_mesh
from .operator import EXTERIOR, INTERIOR, apply_K, apply_second_kind, assemble_matrix, mass_matrix, shift_pairing_matrix
from .solver import InfSupProblem, condition_number_2, infsup_constant, min_rayleigh_quotient
from .spectral import (
    SpectralCoeffs,
    derivative,
    direct_dual_pairing,
    dual_gram,
    dual_norm_sq,
    frequencies,
    h1_dual_norm_sq,
    h_half_norm,
    ht_forward,
    ht_inverse,
    l2_norm_sq,
    primal_gram,
    primal_norm_sq,
    sine_coefficients,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tol: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}  (observed {self.value:.3e}, tolerance {self.tol:.1e})"


def _random_space(rng: np.random.Generator, kind: SpaceKind, n: int = 2, m: int = 5, L: float = 3.0) -> DiscreteSpace:
    seeds = [np.sort(rng.uniform(0.05, 0.95, m - 1)) * L for _ in range(2)]
    return DiscreteSpace(kind, shifted_pair_mesh(L, n, *seeds))


def _trace_matrix(space: DiscreteSpace, op: Callable) -> np.ndarray:
    """Galerkin matrix of ``op`` via exact trace arithmetic, column by column."""
    basis = [basis_function(space, i) for i in range(space.dof_count)]
    A = np.empty((space.dof_count, space.dof_count))
    for j, phi in enumerate(basis):
        image = op(phi)
        for i, psi in enumerate(basis):
            A[i, j] = l2_inner(image, psi)
    return A


def check_slice_shift(rng) -> float:
    bad = 0
    for n in (1, 2, 3):
        space = _random_space(rng, SpaceKind.PW_CONSTANT, n=n)
        bad += not satisfies_slice_shift(space.mesh, tol=0.0)
        # bisection midpoints agree with their shifted images only to rounding
        bad += not satisfies_slice_shift(refine(space.mesh))
    return float(bad)


def check_trace_vs_assembly(rng) -> float:
    worst = 0.0
    for kind in SpaceKind:
        space = _random_space(rng, kind, n=2, m=3)
        L = space.mesh.L
        for sign in (INTERIOR, EXTERIOR):
            A = assemble_matrix(space, sign)
            B = _trace_matrix(space, lambda v: apply_second_kind(v, sign, L))
            worst = max(worst, float(np.max(np.abs(A - B))))
    return worst


def check_double_shift(rng) -> float:
    worst = 0.0
    for kind in SpaceKind:
        space = _random_space(rng, kind, n=3, m=3)
        L = space.mesh.L
        K2 = _trace_matrix(space, lambda v: apply_K(apply_K(v, L), L).scaled(4.0))
        worst = max(worst, float(np.max(np.abs(K2 - shift_pairing_matrix(space, 2 * L, swap=False)))))
    return worst


def check_exterior_minus_interior(rng) -> float:
    worst = 0.0
    for kind in SpaceKind:
        space = _random_space(rng, kind)
        D = assemble_matrix(space, EXTERIOR) - assemble_matrix(space, INTERIOR) - mass_matrix(space)
        worst = max(worst, float(np.max(np.abs(D))))
    return worst


def check_ellipticity(rng) -> float:
    """Largest shortfall of the Rayleigh quotient below sin^2(pi/(2(n+1)))."""
    worst = -math.inf
    for n in (1, 2, 3):
        for kind in SpaceKind:
            space = _random_space(rng, kind, n=n)
            cs = math.sin(math.pi / (2 * (n + 1))) ** 2
            rq = min_rayleigh_quotient(assemble_matrix(space, INTERIOR), mass_matrix(space))
            worst = max(worst, cs - rq)
    return worst


def check_first_slice(rng) -> float:
    L = 3.0
    T = float(rng.uniform(0.5, 1.0)) * L
    worst = 0.0
    for kind in SpaceKind:
        space = DiscreteSpace(kind, uniform_mesh(L, T, 7))
        rq = min_rayleigh_quotient(assemble_matrix(space, INTERIOR), mass_matrix(space))
        worst = max(worst, abs(rq - 0.5))
    return worst


def check_mode_norms(rng) -> float:
    T = float(rng.uniform(1.0, 8.0))
    K = 64
    # sample the modes by quadrature and recover their coefficients
    k = rng.integers(0, K, size=4)
    worst = 0.0
    for kk in k:
        om = frequencies(K)[kk] / T
        c = sine_coefficients((lambda t: np.sin(om * t), lambda t: 0.0 * t), K, T)
        target = np.zeros(K)
        target[kk] = 1.0
        worst = max(worst, float(np.max(np.abs(c.coeffs[0] - target))))
        lam = frequencies(K)[kk]
        single = SpectralCoeffs(np.vstack([target, np.zeros(K)]), T)
        p, d = primal_norm_sq(single), dual_norm_sq(single)
        worst = max(worst, abs(p - lam / 2), abs(d - T**2 / (2 * lam)) / T**2, abs(p * d - l2_norm_sq(single) ** 2) / T**2)
        worst = max(worst, abs(l2_norm_sq(single) - T / 2))
    return worst


def check_hilbert_commutation(rng) -> float:
    T = float(rng.uniform(1.0, 8.0))
    c = SpectralCoeffs(rng.standard_normal((2, 40)), T)
    a = ht_forward(derivative(c))
    b = derivative(ht_inverse(c))
    return float(np.max(np.abs(a.coeffs + b.coeffs)) + (a.basis != b.basis))


def check_dual_isometry(rng) -> float:
    """[H^1_{0,}]' norm of d/dt f equals ||f||_{L2} for f in the cosine span."""
    T = float(rng.uniform(1.0, 8.0))
    K = 24
    c = SpectralCoeffs(rng.standard_normal((2, K)) / (1 + np.arange(K)), T, "cos")
    # <d/dt f, sin_j>, integrated by quadrature from the sampled derivative
    df = derivative(c)
    fs = [(lambda t, s=s: df(s, t)) for s in (0, 1)]
    action = sine_coefficients(fs, K, T).coeffs * T / 2
    return abs(h1_dual_norm_sq(action, T) - l2_norm_sq(c)) / l2_norm_sq(c)


def check_gram_definite(rng) -> float:
    space = _random_space(rng, SpaceKind.PW_LINEAR_ZERO_INIT)
    worst = 0.0
    for G in (primal_gram(space), dual_gram(space)):
        worst = max(worst, float(np.max(np.abs(G - G.T))) / float(np.max(np.abs(G))))
        np.linalg.cholesky(G)
    return worst


def check_dual_pairing(rng) -> float:
    space = _random_space(rng, SpaceKind.PW_LINEAR_ZERO_INIT, m=4)
    return float(np.max(np.abs(direct_dual_pairing(space) + dual_gram(space))))


def check_interpolant_error(rng) -> float:
    space = _random_space(rng, SpaceKind.PW_LINEAR_ZERO_INIT)
    g = (lambda t: np.sin(t) ** 2, lambda t: t * np.cos(t))
    c = nodal_interpolate(g, space)
    f = to_trace(space, c)
    return h_half_norm(f - f)


def check_exact_density() -> float:
    return max(residual_l2(make_problem(p)) for p in ("a", "b"))


def check_infsup_invariance(rng) -> float:
    n = 6
    B = rng.standard_normal((n, n))
    X = rng.standard_normal((n, n))
    Y = rng.standard_normal((n, n))
    Mx, My = X @ X.T + n * np.eye(n), Y @ Y.T + n * np.eye(n)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    P, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = infsup_constant(InfSupProblem(B, Mx, My))
    b = infsup_constant(InfSupProblem(P.T @ B @ Q, Q.T @ Mx @ Q, P.T @ My @ P))
    c = condition_number_2(B)
    d = condition_number_2(-3.7 * B)
    return abs(a - b) / a + abs(c - d) / c


def run_checks(seed: int = 0) -> list[CheckResult]:
    """Run the full verification suite with reproducible random instances."""
    specs = [
        ("slice-shift meshes keep the shift property", check_slice_shift, 0.0),
        ("assembled matrix equals trace-arithmetic matrix", check_trace_vs_assembly, 1e-13),
        ("(2K)^2 equals the pure 2L-shift matrix", check_double_shift, 1e-13),
        ("exterior minus interior matrix is the mass matrix", check_exterior_minus_interior, 1e-14),
        ("Rayleigh quotient respects sin^2(pi/(2(n+1)))", check_ellipticity, 1e-10),
        ("first time slice is -1/2 Id", check_first_slice, 1e-12),
        ("single-mode L2, primal and dual norms", check_mode_norms, 1e-12),
        ("H_T d/dt = -d/dt H_T^-1 on truncated expansions", check_hilbert_commutation, 1e-12),
        ("dual norm of d/dt f equals L2 norm of f", check_dual_isometry, 1e-10),
        ("primal and dual Grams symmetric positive definite", check_gram_definite, 1e-13),
        ("spectral dual Gram matches direct dual pairing", check_dual_pairing, 1e-10),
        ("H^1/2 error of the interpolant against itself is 0", check_interpolant_error, 0.0),
        ("exact densities solve the second-kind equation", lambda rng: check_exact_density(), 1e-10),
        ("inf-sup and condition number invariances", check_infsup_invariance, 1e-10),
    ]
    out = []
    for i, (name, fn, tol) in enumerate(specs):
        rng = np.random.default_rng([seed, i])
        try:
            value = float(fn(rng))
            passed = value <= tol
        except np.linalg.LinAlgError:
            value, passed = math.inf, False
        out.append(CheckResult(name, passed, value, tol))
    return out

