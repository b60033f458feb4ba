"""Sine/cosine mode calculus for H^{1/2}_{0,} norms and their duals.

On (0, T) the functions ``sin(lam_k t / T)`` with ``lam_k = pi/2 + k*pi``
form an orthogonal basis vanishing at t=0; ``cos(lam_k t / T)`` is the
matching basis vanishing at t=T.  In these bases:

* the modified Hilbert transform H_T maps sin-mode k to cos-mode k,
* ``<d/dt u, H_T u> = sum_k u_k^2 lam_k / 2``  (squared H^{1/2}_{0,} norm),
* the dual norm of ``sum_k u_k sin_k`` is ``sum_k u_k^2 T^2 / (2 lam_k)``.

All coefficients of piecewise linear functions are closed-form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import zeta

from .basis import DiscreteSpace, PiecewiseLinear, SpaceKind, TraceFunction
from .errors import ModeTruncationWarning, PreconditionError

# modes processed per block when forming coefficient tables
_CHUNK = 4096


def frequencies(K: int) -> np.ndarray:
    """lam_k = pi/2 + k*pi for k = 0..K-1."""
    return np.pi / 2 + np.pi * np.arange(K)


def default_modes(dof_count: int) -> int:
    return max(512, 8 * dof_count)


@dataclass(frozen=True)
class SpectralCoeffs:
    """Per-strand coefficients w.r.t. sin(lam_k t/T) or cos(lam_k t/T).

    ``coeffs`` has shape (2, K): row 0 is the strand x=0, row 1 x=L.
    """

    coeffs: np.ndarray
    T: float
    basis: str = "sin"

    def __post_init__(self):
        if self.basis not in ("sin", "cos"):
            raise ValueError("basis must be 'sin' or 'cos'")
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficients")
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def lam(self) -> np.ndarray:
        return frequencies(self.K)

    def __call__(self, strand: int, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        phase = np.multiply.outer(t, self.lam / self.T)
        trig = np.sin(phase) if self.basis == "sin" else np.cos(phase)
        return trig @ self.coeffs[strand]


def _sin_integrals(breaks, start, end, omega) -> np.ndarray:
    """int over each segment of (linear) * sin(omega t), summed; shape (K,)."""
    a, b = breaks[:-1], breaks[1:]
    slope = (end - start) / (b - a)
    out = np.empty(omega.size)
    for lo in range(0, omega.size, _CHUNK):
        w = omega[lo:lo + _CHUNK, None]
        # antiderivative of P(t) sin(wt): -P cos/w + P' sin/w^2
        Fb = -end * np.cos(w * b) / w + slope * np.sin(w * b) / w**2
        Fa = -start * np.cos(w * a) / w + slope * np.sin(w * a) / w**2
        out[lo:lo + _CHUNK] = np.sum(Fb - Fa, axis=1)
    return out


def strand_sine_coefficients(f: PiecewiseLinear, K: int, T: float | None = None) -> np.ndarray:
    T = f.T if T is None else T
    lam = frequencies(K)
    return (2.0 / T) * _sin_integrals(f.breaks, f.start, f.end, lam / T)


def sine_coefficients(f, K: int, T: float | None = None, quad_points: int = 4096) -> SpectralCoeffs:
    """u_k = (2/T) int_0^T f(t) sin(lam_k t/T) dt on both strands.

    ``f`` is a :class:`TraceFunction` (closed form) or a pair of vectorised
    callables, which are integrated with composite Gauss-Legendre using
    ``quad_points`` panels of 8 nodes (requires ``T``).
    """
    if int(K) != K or K <= 0:
        raise ValueError(f"mode count must be positive, got {K!r}")
    if isinstance(f, TraceFunction):
        T = f.left.T
        c = np.stack([strand_sine_coefficients(s, K, T) for s in f.strands])
        return SpectralCoeffs(c, T)
    if T is None:
        raise ValueError("T is required for callable input")
    x, w = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(0.0, T, quad_points + 1)
    h = np.diff(edges)
    t = (edges[:-1, None] + 0.5 * h[:, None] * (x + 1)).ravel()
    wt = (0.5 * h[:, None] * w).ravel()
    omega = frequencies(K) / T
    fw = np.stack([np.asarray(fs(t), dtype=float) * wt for fs in f])
    c = np.empty((2, K))
    step = max(1, (1 << 24) // t.size)
    for lo in range(0, K, step):
        c[:, lo:lo + step] = fw @ np.sin(np.multiply.outer(t, omega[lo:lo + step]))
    return SpectralCoeffs((2.0 / T) * c, T)


def ht_forward(c: SpectralCoeffs) -> SpectralCoeffs:
    """Modified Hilbert transform: sin_k -> cos_k and cos_k -> -sin_k."""
    if c.basis == "sin":
        return SpectralCoeffs(c.coeffs.copy(), c.T, "cos")
    return SpectralCoeffs(-c.coeffs, c.T, "sin")


def ht_inverse(c: SpectralCoeffs) -> SpectralCoeffs:
    """Inverse of :func:`ht_forward` (H_T is an isometry with H_T^2 = -Id)."""
    if c.basis == "cos":
        return SpectralCoeffs(c.coeffs.copy(), c.T, "sin")
    return SpectralCoeffs(-c.coeffs, c.T, "cos")


def derivative(c: SpectralCoeffs) -> SpectralCoeffs:
    """Termwise d/dt: sin_k -> (lam_k/T) cos_k, cos_k -> -(lam_k/T) sin_k."""
    scale = c.lam / c.T
    if c.basis == "sin":
        return SpectralCoeffs(c.coeffs * scale, c.T, "cos")
    return SpectralCoeffs(-c.coeffs * scale, c.T, "sin")


def l2_norm_sq(c: SpectralCoeffs) -> float:
    return float(np.sum(c.coeffs**2) * c.T / 2)


def primal_norm_sq(c: SpectralCoeffs) -> float:
    """Squared H^{1/2}_{0,} norm of a sine expansion."""
    if c.basis != "sin":
        raise ValueError("expected a sine expansion")
    return float(np.sum(c.coeffs**2 * c.lam / 2))


def dual_norm_sq(c: SpectralCoeffs) -> float:
    """Squared [H^{1/2}_{0,}]' norm of an L2 function given by sine coefficients."""
    if c.basis != "sin":
        raise ValueError("expected a sine expansion")
    return float(np.sum(c.coeffs**2 * c.T**2 / (2 * c.lam)))


def h1_dual_norm_sq(action: np.ndarray, T: float) -> float:
    """Squared [H^1_{0,}]' norm of a functional given by its values on sin_k.

    The H^1_{0,} norm is ||d/dt u||_{L2}, so ||sin_k||^2 = lam_k^2 / (2T).
    """
    action = np.atleast_2d(action)
    lam = frequencies(action.shape[-1])
    return float(np.sum(action**2 * 2 * T / lam**2))


def _kink_weights(f: PiecewiseLinear) -> tuple[np.ndarray, np.ndarray, float]:
    """Interior nodes, minus the slope jumps there, and the final slope."""
    s = f.slopes
    return f.breaks[1:-1], -(s[1:] - s[:-1]), float(s[-1])


def _uniform_count(breaks: np.ndarray, rtol: float = 1e-12) -> int | None:
    """Element count if ``breaks`` is an equispaced partition, else None."""
    m = breaks.size - 1
    h = np.diff(breaks)
    return m if np.all(np.abs(h - breaks[-1] / m) <= rtol * breaks[-1]) else None


def _sine_sums(t: np.ndarray, a: np.ndarray, s_n: float, lam: np.ndarray, T: float, k0: int) -> np.ndarray:
    """S_k = (-1)^k s_n - sum_i jump_i sin(lam_k t_i / T) for modes k0, k0+1, ..."""
    sign = np.where((k0 + np.arange(lam.size)) % 2 == 0, 1.0, -1.0)
    S = sign * s_n
    if t.size:
        step = max(1, (1 << 22) // t.size)
        S = S + np.concatenate([
            np.sin(np.multiply.outer(lam[lo:lo + step] / T, t)) @ a for lo in range(0, lam.size, step)
        ])
    return S


def _strand_norm_sq(f: PiecewiseLinear, K: int, T: float, tail: bool) -> tuple[float, float]:
    """H^{1/2}_{0,} norm^2 of a continuous piecewise linear with f(0)=0.

    Integrating by parts twice gives u_k = 2T/lam_k^2 * S_k with
    S_k = (-1)^k s_n - sum_i jump_i sin(lam_k t_i / T), so each mode
    contributes 2 T^2 S_k^2 / lam_k^3.  Returns (truncated sum, tail estimate).
    """
    t, a, s_n = _kink_weights(f)
    lam = frequencies(K)
    S = _sine_sums(t, a, s_n, lam, T, 0)
    total = float(np.sum(2 * T**2 * S * S / lam**3))
    if not tail:
        return total, 0.0
    m = _uniform_count(f.breaks)
    if m is not None:
        # on m equal elements S_k is periodic in k with period P = 2m, so the
        # tail is a finite sum of Hurwitz zeta values
        P = 2 * m
        lam_p = np.pi / 2 + np.pi * np.arange(K, K + P)
        S_p = _sine_sums(t, a, s_n, lam_p, T, K)
        w = zeta(3, (K + np.arange(P) + 0.5) / P) / (np.pi * P) ** 3
        return total, float(2 * T**2 * np.dot(S_p * S_p, w))
    # Otherwise S_k^2 oscillates about s_n^2 + sum(jump^2)/2 (no cross term
    # resonates because 0 < t_i < T); the mean contributes O(K^-2) through a
    # Hurwitz zeta value, the oscillating remainder is of lower order.
    mean_S2 = s_n**2 + 0.5 * float(np.dot(a, a))
    return total, 2 * T**2 * mean_S2 * float(zeta(3, K + 0.5)) / np.pi**3


def norm_modes(f: TraceFunction) -> int:
    """Default mode count for single-function norms.

    Equispaced strands get an exact periodic tail, so a few modes per node
    suffice; otherwise the asymptotic tail estimate needs many more.
    """
    n = max(s.breaks.size for s in f.strands)
    if all(_uniform_count(s.breaks) is not None for s in f.strands):
        return max(512, 4 * n)
    return max(4096, 32 * n)


def h_half_norm(f: TraceFunction, K: int | None = None, tail_correction: bool = True, atol: float = 1e-12) -> float:
    """H^{1/2}_{0,}(Sigma) norm of a continuous piecewise linear trace.

    Sums ``K`` sine modes exactly and, unless ``tail_correction`` is off,
    adds the remaining modes: exactly when a strand is equispaced, by an
    asymptotic estimate otherwise.  Without the tail the value is the
    truncated series, which is nondecreasing in ``K``.
    """
    T = f.left.T
    for s in f.strands:
        scale = max(1.0, float(np.max(np.abs(s.start))), float(np.max(np.abs(s.end))))
        if abs(s.start[0]) > atol * scale:
            raise PreconditionError("trace does not vanish at t=0")
        if not s.is_continuous(atol * scale):
            raise PreconditionError("trace is discontinuous, so not in H^1/2")
    if K is None:
        K = norm_modes(f)
    if int(K) != K or K <= 0:
        raise ValueError(f"mode count must be positive, got {K!r}")
    parts = [_strand_norm_sq(s, int(K), T, tail_correction) for s in f.strands]
    return float(np.sqrt(sum(a + b for a, b in parts)))


# ---------------------------------------------------------------------------
# Gram matrices of the p1 basis
# ---------------------------------------------------------------------------
def basis_sine_table(space: DiscreteSpace, K: int) -> list[np.ndarray]:
    """Per strand, the (n_dofs_strand, K) sine coefficients of each hat."""
    if space.kind is not SpaceKind.PW_LINEAR_ZERO_INIT:
        raise ValueError("spectral Grams need the p1 space")
    T = space.mesh.T
    omega = frequencies(K) / T
    out = []
    for s in (0, 1):
        b = space.mesh.breaks(s)
        n = b.size - 1
        # hat at node i (1..n): rises on (b[i-1], b[i]), falls on (b[i], b[i+1])
        tab = np.empty((n, K))
        for lo in range(0, K, _CHUNK):
            w = omega[lo:lo + _CHUNK]
            S = np.sin(np.multiply.outer(b, w))  # (n+1, k)
            C = np.cos(np.multiply.outer(b, w))
            h = np.diff(b)
            # rising part: P = (t - a)/h  -> [-P cos/w + sin/(h w^2)]_a^b
            rise = -C[1:] / w + (S[1:] - S[:-1]) / (h[:, None] * w**2)
            # falling part on (b_i, b_{i+1}): P = (b_{i+1} - t)/h
            fall = C[1:-1] / w - (S[2:] - S[1:-1]) / (h[1:, None] * w**2)
            blk = rise.copy()
            blk[:-1] += fall
            tab[:, lo:lo + _CHUNK] = blk
        out.append((2.0 / T) * tab)
    return out


def _check_modes(space: DiscreteSpace, K: int) -> None:
    if K < space.dof_count:
        warnings.warn(
            f"{K} modes cannot resolve {space.dof_count} DoFs; Gram may be singular",
            ModeTruncationWarning,
            stacklevel=3,
        )


def _gram(space: DiscreteSpace, K: int | None, weight: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    K = default_modes(space.dof_count) if K is None else int(K)
    if K <= 0:
        raise ValueError("mode count must be positive")
    _check_modes(space, K)
    G = np.zeros((space.dof_count, space.dof_count))
    wk = weight(frequencies(K))
    for s, tab in enumerate(basis_sine_table(space, K)):
        sl = space.strand_slice(s)
        G[sl, sl] = (tab * wk) @ tab.T
    return 0.5 * (G + G.T)


def primal_gram(space: DiscreteSpace, K: int | None = None) -> np.ndarray:
    """G[i, j] = sum_k phi_ik phi_jk lam_k / 2  (H^{1/2}_{0,} inner products)."""
    return _gram(space, K, lambda lam: lam / 2)


def dual_gram(space: DiscreteSpace, K: int | None = None) -> np.ndarray:
    """M_y[i, j] = sum_k psi_ik psi_jk T^2 / (2 lam_k)  ([H^{1/2}_{0,}]' inner products)."""
    T = space.mesh.T
    return _gram(space, K, lambda lam: T**2 / (2 * lam))


# ---------------------------------------------------------------------------
# backward antiderivative and the direct dual pairing
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PiecewiseQuadratic:
    """On element e: c0[e] + c1[e]*tau + c2[e]*tau^2 with tau = t - breaks[e]."""

    breaks: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        e = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, self.breaks.size - 2)
        tau = t - self.breaks[e]
        return self.c0[e] + tau * (self.c1[e] + tau * self.c2[e])

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        e = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, self.breaks.size - 2)
        return self.c1[e] + 2 * self.c2[e] * (t - self.breaks[e])

    def cos_integrals(self, omega: np.ndarray) -> np.ndarray:
        """int_0^T Q(t) cos(omega t) dt for each omega, in closed form."""
        a, b = self.breaks[:-1], self.breaks[1:]
        h = b - a
        P_b = self.c0 + h * (self.c1 + h * self.c2)
        dP_a, dP_b = self.c1, self.c1 + 2 * self.c2 * h
        out = np.empty(omega.size)
        for lo in range(0, omega.size, _CHUNK):
            w = omega[lo:lo + _CHUNK, None]
            sa, sb, ca, cb = np.sin(w * a), np.sin(w * b), np.cos(w * a), np.cos(w * b)
            # antiderivative of P cos(wt): P sin/w + P' cos/w^2 - P'' sin/w^3
            Fb = P_b * sb / w + dP_b * cb / w**2 - 2 * self.c2 * sb / w**3
            Fa = self.c0 * sa / w + dP_a * ca / w**2 - 2 * self.c2 * sa / w**3
            out[lo:lo + _CHUNK] = np.sum(Fb - Fa, axis=1)
        return out


def antiderivative_back(f: PiecewiseLinear) -> PiecewiseQuadratic:
    """t -> -int_t^T f(s) ds, exact; vanishes at t = T."""
    h = f.widths
    slope = f.slopes
    # value at each element's left end, accumulated from the right
    integral = h * (f.start + f.end) / 2
    F_left = -np.cumsum(integral[::-1])[::-1]
    return PiecewiseQuadratic(f.breaks, F_left, f.start.copy(), slope / 2)


def direct_dual_pairing(space: DiscreteSpace, K: int | None = None) -> np.ndarray:
    """D[i, j] = <H_T psi_i, dbar_t^{-1} psi_j>_Sigma with H_T psi_i truncated
    to K cosine modes and each mode integrated exactly against the piecewise
    quadratic dbar_t^{-1} psi_j.  Negative definite; equals -dual_gram."""
    K = default_modes(space.dof_count) if K is None else int(K)
    T = space.mesh.T
    omega = frequencies(K) / T
    D = np.zeros((space.dof_count, space.dof_count))
    tabs = basis_sine_table(space, K)
    for s in (0, 1):
        b = space.mesh.breaks(s)
        sl = space.strand_slice(s)
        n = b.size - 1
        Q = np.empty((n, K))
        for j in range(n):
            nodal = np.zeros(n + 1)
            nodal[j + 1] = 1.0
            Q[j] = antiderivative_back(PiecewiseLinear.from_nodal(b, nodal)).cos_integrals(omega)
        D[sl, sl] = tabs[s] @ Q.T
    return D
