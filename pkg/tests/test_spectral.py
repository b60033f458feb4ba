import math
import warnings

import numpy as np
import pytest

from wavebem1d.basis import DiscreteSpace, PiecewiseLinear, SpaceKind, TraceFunction, basis_function, nodal_interpolate, to_trace
from wavebem1d.errors import ModeTruncationWarning, PreconditionError
from wavebem1d.mesh import paper_nonuniform_initial, refine, shifted_pair_mesh, uniform_mesh
from wavebem1d.spectral import (
    SpectralCoeffs,
    antiderivative_back,
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

P1 = SpaceKind.PW_LINEAR_ZERO_INIT
T = 6.0


def _single_mode(k, K=16, T=T):
    c = np.zeros((2, K))
    c[0, k] = 1.0
    return SpectralCoeffs(c, T)


def test_frequencies():
    lam = frequencies(4)
    np.testing.assert_allclose(lam, [np.pi / 2, 3 * np.pi / 2, 5 * np.pi / 2, 7 * np.pi / 2])


def test_analytic_mode_recovered():
    lam0 = frequencies(1)[0]
    c = sine_coefficients((lambda t: np.sin(lam0 * t / T), lambda t: 0 * t), 8, T)
    target = np.zeros((2, 8))
    target[0, 0] = 1.0
    np.testing.assert_allclose(c.coeffs, target, atol=1e-13)


def test_zero_function_coefficients():
    zero = PiecewiseLinear.zero([0.0, 2.0, T])
    c = sine_coefficients(TraceFunction(zero, zero), 32)
    assert np.all(c.coeffs == 0)


def test_hat_coefficients_match_quadrature():
    space = DiscreteSpace(P1, shifted_pair_mesh(3.0, 2, [0.7], [1.9]))
    hat = basis_function(space, 1)
    exact = sine_coefficients(hat, 40).coeffs
    fs = [(lambda t, s=s: hat(s, t)) for s in (0, 1)]
    quad = sine_coefficients(fs, 40, T, quad_points=1 << 13).coeffs
    # the quadrature path does not split at the hat's kinks, hence 1e-9
    np.testing.assert_allclose(exact, quad, atol=1e-9)
    x, w = np.polynomial.legendre.leggauss(20)
    b = np.linspace(0.0, T, 601)
    a_, b_ = b[:-1, None], b[1:, None]
    t = (0.5 * (a_ + b_) + 0.5 * (b_ - a_) * x).ravel()
    wt = (0.5 * (b_ - a_) * w).ravel()
    ref = [2 / T * np.sum(hat("left", t) * np.sin(lam * t / T) * wt) for lam in frequencies(40)]
    np.testing.assert_allclose(exact[0], ref, atol=1e-12)


def test_invalid_mode_count():
    zero = PiecewiseLinear.zero([0.0, T])
    with pytest.raises(ValueError):
        sine_coefficients(TraceFunction(zero, zero), 0)
    with pytest.raises(ValueError):
        sine_coefficients((np.sin, np.sin), 4)


@pytest.mark.parametrize("k", [0, 1, 5, 12])
def test_single_mode_norms(k):
    c = _single_mode(k)
    lam = frequencies(16)[k]
    assert primal_norm_sq(c) == pytest.approx(lam / 2, abs=1e-12)
    assert dual_norm_sq(c) == pytest.approx(T**2 / (2 * lam), abs=1e-12)
    assert l2_norm_sq(c) == pytest.approx(T / 2, abs=1e-12)
    assert primal_norm_sq(c) * dual_norm_sq(c) == pytest.approx((T / 2) ** 2, abs=1e-12)
    assert primal_norm_sq(_single_mode(0)) == pytest.approx(math.pi / 4, abs=1e-15)
    assert dual_norm_sq(_single_mode(0)) == pytest.approx(T**2 / math.pi, abs=1e-12)


def test_hilbert_transform_maps_modes():
    c = _single_mode(0)
    h = ht_forward(c)
    assert h.basis == "cos"
    t = np.linspace(0, T, 11)
    np.testing.assert_allclose(h(0, t), np.cos(np.pi * t / (2 * T)), atol=1e-15)
    np.testing.assert_array_equal(ht_inverse(h).coeffs, c.coeffs)
    # H_T^2 = -Id
    np.testing.assert_array_equal(ht_forward(ht_forward(c)).coeffs, -c.coeffs)


def test_hilbert_commutes_with_derivative_up_to_sign():
    rng = np.random.default_rng(1)
    c = SpectralCoeffs(rng.standard_normal((2, 30)), T)
    a, b = ht_forward(derivative(c)), derivative(ht_inverse(c))
    assert a.basis == b.basis == "sin"
    np.testing.assert_allclose(a.coeffs, -b.coeffs, atol=1e-12)


def test_primal_norm_is_dt_pairing_with_ht():
    """<d/dt u, H_T u> by quadrature equals sum_k u_k^2 lam_k / 2."""
    rng = np.random.default_rng(2)
    c = SpectralCoeffs(rng.standard_normal((2, 10)), T)
    du, hu = derivative(c), ht_forward(c)
    x, w = np.polynomial.legendre.leggauss(200)
    t = 0.5 * T * (x + 1)
    val = sum(np.sum(du(s, t) * hu(s, t) * w) * T / 2 for s in (0, 1))
    assert val == pytest.approx(primal_norm_sq(c), rel=1e-12)


def test_dual_isometry_of_derivative():
    rng = np.random.default_rng(4)
    c = SpectralCoeffs(rng.standard_normal((2, 20)) / np.arange(1, 21), T, "cos")
    d = derivative(c)
    action = sine_coefficients([lambda t: d(0, t), lambda t: d(1, t)], 20, T).coeffs * T / 2
    assert h1_dual_norm_sq(action, T) == pytest.approx(l2_norm_sq(c), rel=1e-10)


def test_antiderivative_back():
    one = PiecewiseLinear([0.0, 2.0, T], [1.0, 1.0], [1.0, 1.0])
    F = antiderivative_back(one)
    t = np.linspace(0, T, 13)
    np.testing.assert_allclose(F(t), t - T, atol=1e-14)
    # -int_t^T sin(lam_0 s / T) ds = -(T / lam_0) cos(lam_0 t / T)
    lam0 = np.pi / 2
    b = np.linspace(0, T, 2001)
    f = PiecewiseLinear.from_nodal(b, np.sin(lam0 * b / T))
    np.testing.assert_allclose(antiderivative_back(f)(t), -(T / lam0) * np.cos(lam0 * t / T), atol=1e-6)
    mid = 0.5 * (b[:-1] + b[1:])
    np.testing.assert_allclose(antiderivative_back(f).derivative(mid), f(mid), atol=1e-14)
    assert antiderivative_back(f)(T) == pytest.approx(0.0, abs=1e-15)


def test_cos_integrals_closed_form():
    F = antiderivative_back(PiecewiseLinear([0.0, 1.5, T], [0.0, 2.0], [2.0, -1.0]))
    omega = frequencies(12) / T
    x, w = np.polynomial.legendre.leggauss(30)
    ref = []
    for om in omega:
        total = 0.0
        for a, b in ((0.0, 1.5), (1.5, T)):
            t = 0.5 * (a + b) + 0.5 * (b - a) * x
            total += np.sum(F(t) * np.cos(om * t) * w) * (b - a) / 2
        ref.append(total)
    np.testing.assert_allclose(F.cos_integrals(omega), ref, atol=1e-13)


def test_grams_symmetric_positive_definite():
    space = DiscreteSpace(P1, shifted_pair_mesh(3.0, 2, [0.4, 2.0], [1.2]))
    for G in (primal_gram(space), dual_gram(space)):
        np.testing.assert_array_equal(G, G.T)
        np.linalg.cholesky(G)


def test_gram_of_sine_modes_is_diagonal():
    """Modes fed through the quadrature path give diagonal L2, primal and dual Grams."""
    K = 12
    lam = frequencies(K)
    C = np.array([
        sine_coefficients([lambda t, l=l: np.sin(l * t / T), lambda t: 0 * t], K, T).coeffs[0] for l in lam
    ])
    weights = ((np.full(K, T / 2), T / 2), (lam / 2, lam / 2), (T**2 / (2 * lam), T**2 / (2 * lam)))
    for w, diag in weights:
        np.testing.assert_allclose((C * w) @ C.T, np.diag(np.broadcast_to(diag, K)), atol=1e-12)


def test_gram_quadratic_form_of_interpolated_mode():
    lam0 = np.pi / 2
    vals = []
    for N in (16, 64, 256):
        space = DiscreteSpace(P1, uniform_mesh(3.0, T, N))
        c = nodal_interpolate((lambda t: np.sin(lam0 * t / T), lambda t: 0 * t), space)
        vals.append(c @ primal_gram(space, 16 * space.dof_count) @ c)
    errs = np.abs(np.array(vals) - math.pi / 4)
    assert errs[-1] < 1e-4 and np.all(np.diff(errs) < 0)


def test_zero_vector_gives_zero_forms():
    space = DiscreteSpace(P1, uniform_mesh(3.0, T, 4))
    z = np.zeros(space.dof_count)
    assert z @ primal_gram(space) @ z == 0.0 and z @ dual_gram(space) @ z == 0.0


def test_too_few_modes_warns():
    space = DiscreteSpace(P1, uniform_mesh(3.0, T, 8))
    with pytest.warns(ModeTruncationWarning):
        primal_gram(space, 4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        primal_gram(space)
    with pytest.raises(ValueError):
        primal_gram(DiscreteSpace(SpaceKind.PW_CONSTANT, space.mesh))


def test_spectral_dual_gram_equals_minus_direct_pairing():
    space = DiscreteSpace(P1, shifted_pair_mesh(3.0, 2, [0.4, 2.0], [1.2]))
    D = direct_dual_pairing(space)
    M = dual_gram(space)
    np.testing.assert_allclose(D, -M, rtol=0, atol=1e-10)
    # the raw pairing is negative definite; the Gram is its negative
    assert np.linalg.eigvalsh(0.5 * (D + D.T)).max() < 0


def test_h_half_norm_basic():
    zero = PiecewiseLinear.zero([0.0, 3.0, T])
    assert h_half_norm(TraceFunction(zero, zero)) == 0.0
    bad = PiecewiseLinear([0.0, T], [1.0], [1.0])
    with pytest.raises(PreconditionError):
        h_half_norm(TraceFunction(bad, zero))
    jump = PiecewiseLinear([0.0, 3.0, T], [0.0, 2.0], [1.0, 2.0])
    with pytest.raises(PreconditionError):
        h_half_norm(TraceFunction(jump, zero))


def test_h_half_norm_matches_coefficient_sum():
    rng = np.random.default_rng(5)
    space = DiscreteSpace(P1, shifted_pair_mesh(3.0, 2, [0.4, 2.0], [1.2]))
    f = to_trace(space, rng.standard_normal(space.dof_count))
    K = 3000
    direct = math.sqrt(primal_norm_sq(sine_coefficients(f, K)))
    assert h_half_norm(f, K, tail_correction=False) == pytest.approx(direct, rel=1e-12)
    c = rng.standard_normal(space.dof_count)
    assert h_half_norm(to_trace(space, c), K, tail_correction=False) ** 2 == pytest.approx(
        c @ primal_gram(space, K) @ c, rel=1e-11)


def test_h_half_norm_truncation_is_monotone():
    rng = np.random.default_rng(6)
    space = DiscreteSpace(P1, paper_nonuniform_initial())
    f = to_trace(space, rng.standard_normal(space.dof_count))
    vals = [h_half_norm(f, K, tail_correction=False) for K in (64, 128, 256, 1024, 4096)]
    assert np.all(np.diff(vals) >= 0)
    assert h_half_norm(f) >= vals[-1]


@pytest.mark.parametrize("mesh", [uniform_mesh(3.0, T, 64), refine(paper_nonuniform_initial())])
def test_h_half_norm_K_doubling(mesh):
    rng = np.random.default_rng(7)
    space = DiscreteSpace(P1, mesh)
    f = to_trace(space, rng.standard_normal(space.dof_count))
    from wavebem1d.spectral import norm_modes

    K = norm_modes(f)
    assert abs(h_half_norm(f, 2 * K) - h_half_norm(f, K)) < 1e-10


def test_h_half_norm_tail_estimate_on_irregular_mesh():
    rng = np.random.default_rng(8)
    space = DiscreteSpace(P1, shifted_pair_mesh(3.0, 2, np.sort(rng.uniform(0, 3, 7)), np.sort(rng.uniform(0, 3, 5))))
    f = to_trace(space, rng.standard_normal(space.dof_count))
    ref = h_half_norm(f, 1 << 19)
    est = h_half_norm(f)
    assert est == pytest.approx(ref, rel=1e-6)
    # the tail estimate recovers most of what truncation drops
    assert abs(est - ref) < 0.05 * abs(h_half_norm(f, tail_correction=False) - ref)
