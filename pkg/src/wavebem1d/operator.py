"""Double layer operator in 1d and exact Galerkin assembly.

In one space dimension the double layer operator acts by a strand swap, a
delay of L and a factor -1/2::

    (K v)(0, t) = -v(L, t - L) / 2
    (K v)(L, t) = -v(0, t - L) / 2

with v extended by zero to t < 0.  Every Galerkin entry is therefore an
overlap integral of two (shifted) piecewise polynomials, which is computed
exactly on the merged breakpoint set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .basis import DiscreteSpace, PiecewiseLinear, StrandPair, TraceFunction, merge_breaks

INTERIOR = -0.5
EXTERIOR = +0.5

# 2-point Gauss-Legendre on [0, 1]; exact for the degree <= 2 products here
_G2_X = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
_G2_W = np.array([0.5, 0.5])


def _check_sign(sign: float) -> float:
    if sign not in (INTERIOR, EXTERIOR):
        raise ValueError(f"sign must be -0.5 (interior) or +0.5 (exterior), got {sign!r}")
    return float(sign)


# ---------------------------------------------------------------------------
# operator action on trace functions
# ---------------------------------------------------------------------------
def delay(f: PiecewiseLinear, shift: float) -> PiecewiseLinear:
    """t -> f(t - shift) on [0, T], zero where t - shift < 0."""
    T = f.T
    if shift <= 0:
        return f
    if shift >= T:
        return PiecewiseLinear.zero(np.array([0.0, T]))
    cut = T - shift
    part = f.on_breaks(np.append(f.breaks[f.breaks < cut * (1 - 1e-14)], cut))
    b = np.concatenate([[0.0], part.breaks + shift])
    b[-1] = T
    return PiecewiseLinear(b, np.append(0.0, part.start), np.append(0.0, part.end))


def apply_K(v: TraceFunction, L: float) -> TraceFunction:
    """Exact action of the double layer operator."""
    left = delay(v.right, L).scaled(-0.5)
    right = delay(v.left, L).scaled(-0.5)
    return TraceFunction(left, right, v.degree)


def apply_second_kind(v: TraceFunction, sign: float, L: float) -> TraceFunction:
    """(sign*Id + K) v on the merged breakpoint set."""
    sign = _check_sign(sign)
    return v.scaled(sign) + apply_K(v, L)


# ---------------------------------------------------------------------------
# exact assembly
# ---------------------------------------------------------------------------
def _local_shapes(xi: np.ndarray, degree: int) -> np.ndarray:
    """Local shape values, shape (n_loc, *xi.shape)."""
    if degree == 0:
        return np.ones((1,) + xi.shape)
    return np.stack([1.0 - xi, xi])


def _pairing_block(
    test_breaks: np.ndarray,
    test_dofs: np.ndarray,
    trial_breaks: np.ndarray,
    trial_dofs: np.ndarray,
    shift: float,
    degree: int,
    out: np.ndarray,
) -> None:
    """Accumulate int_0^T phi_i(t) phi_j(t - shift) dt into ``out``."""
    T = test_breaks[-1]
    if shift >= T:
        return
    sb = trial_breaks + shift
    pts = merge_breaks(test_breaks, sb[(sb > shift) & (sb < T)])
    pts = np.concatenate([[shift], pts[pts > shift * (1 + 1e-13)]])
    p, q = pts[:-1], pts[1:]
    h = q - p
    mid = 0.5 * (p + q)
    e = np.clip(np.searchsorted(test_breaks, mid, side="right") - 1, 0, test_breaks.size - 2)
    f = np.clip(np.searchsorted(trial_breaks, mid - shift, side="right") - 1, 0, trial_breaks.size - 2)
    t = p[:, None] + h[:, None] * _G2_X[None, :]
    xi_test = (t - test_breaks[e, None]) / np.diff(test_breaks)[e, None]
    xi_trial = (t - shift - trial_breaks[f, None]) / np.diff(trial_breaks)[f, None]
    N_test = _local_shapes(xi_test, degree)
    N_trial = _local_shapes(xi_trial, degree)
    # (loc_i, loc_j, segment)
    vals = np.einsum("asg,bsg,g,s->abs", N_test, N_trial, _G2_W, h)
    rows = test_dofs[e]
    cols = trial_dofs[f]
    nl = N_test.shape[0]
    for a in range(nl):
        for b in range(nl):
            r, c = rows[:, a], cols[:, b]
            ok = (r >= 0) & (c >= 0)
            np.add.at(out, (r[ok], c[ok]), vals[a, b, ok])


def shift_pairing_matrix(space: DiscreteSpace, shift: float, swap: bool) -> np.ndarray:
    """Exact Galerkin matrix P[i, j] = <phi_j(. - shift), phi_i>_{L2(Sigma)}.

    With ``swap`` the trial function is taken from the opposite strand.
    """
    A = np.zeros((space.dof_count, space.dof_count))
    m = space.mesh
    for s in (0, 1):
        src = 1 - s if swap else s
        _pairing_block(
            m.breaks(s), space.element_dofs(s), m.breaks(src), space.element_dofs(src),
            float(shift), space.kind.degree, A,
        )
    return A


def mass_matrix(space: DiscreteSpace) -> np.ndarray:
    """Exact L2(Sigma) Gram matrix of the basis."""
    return shift_pairing_matrix(space, 0.0, swap=False)


def double_layer_matrix(space: DiscreteSpace) -> np.ndarray:
    """K[i, j] = <K phi_j, phi_i>_{L2(Sigma)}."""
    return -0.5 * shift_pairing_matrix(space, space.mesh.L, swap=True)


def assemble_matrix(space: DiscreteSpace, sign: float) -> np.ndarray:
    """A[i, j] = <(sign*Id + K) phi_j, phi_i>_{L2(Sigma)}, exactly."""
    sign = _check_sign(sign)
    return sign * mass_matrix(space) + double_layer_matrix(space)


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class QuadratureSpec:
    """Fixed-order Gauss rule applied after splitting at known kinks.

    ``kinks`` holds one array of kink times per strand.
    """

    order: int = 8
    kinks: tuple = field(default=((), ()))

    def kinks_on(self, strand: int) -> np.ndarray:
        return np.asarray(self.kinks[strand], dtype=float)


def split_points(breaks: np.ndarray, kinks) -> np.ndarray:
    k = np.asarray(kinks, dtype=float)
    k = k[(k > breaks[0]) & (k < breaks[-1])]
    return merge_breaks(breaks, k)


def gauss_nodes(breaks: np.ndarray, kinks, order: int):
    """Gauss nodes/weights on every sub-segment of ``breaks`` split at kinks.

    Returns (t, w, p, q) with t, w of shape (n_seg, order) and the segment
    ends p, q.
    """
    pts = split_points(breaks, kinks)
    x, w = np.polynomial.legendre.leggauss(order)
    p, q = pts[:-1], pts[1:]
    h = q - p
    t = p[:, None] + 0.5 * h[:, None] * (x[None, :] + 1.0)
    return t, 0.5 * h[:, None] * w[None, :], p, q


def assemble_rhs(g: StrandPair, space: DiscreteSpace, quad: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """rhs[i] = int_Sigma g phi_i with kink-aware Gauss quadrature."""
    rhs = np.zeros(space.dof_count)
    for s in (0, 1):
        b = space.mesh.breaks(s)
        t, w, p, q = gauss_nodes(b, quad.kinks_on(s), quad.order)
        e = np.clip(np.searchsorted(b, 0.5 * (p + q), side="right") - 1, 0, b.size - 2)
        xi = (t - b[e, None]) / np.diff(b)[e, None]
        gw = np.asarray(g[s](t), dtype=float) * w
        N = _local_shapes(xi, space.kind.degree)
        dofs = space.element_dofs(s)
        for a in range(N.shape[0]):
            r = dofs[e, a]
            ok = r >= 0
            np.add.at(rhs, r[ok], np.sum(N[a] * gw, axis=1)[ok])
    return rhs


# ---------------------------------------------------------------------------
# systems and export
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GalerkinSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    space: DiscreteSpace
    sign: float


def build_system(space: DiscreteSpace, sign: float, g: StrandPair, quad: QuadratureSpec = QuadratureSpec()) -> GalerkinSystem:
    return GalerkinSystem(assemble_matrix(space, sign), assemble_rhs(g, space, quad), space, _check_sign(sign))


def write_matrix_csv(path, A: np.ndarray) -> None:
    A = np.atleast_2d(A)
    with open(path, "w") as fh:
        for row in A:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_matrix_binary(path, A: np.ndarray, space: DiscreteSpace | None = None, sign: float | None = None) -> None:
    """One JSON header line, then row-major little-endian float64 data."""
    A = np.ascontiguousarray(np.atleast_2d(A), dtype="<f8")
    header = {
        "schema": 1,
        "dims": list(A.shape),
        "dtype": "<f8",
        "space": space.kind.value if space is not None else None,
        "sign": sign,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode() + b"\n")
        fh.write(A.tobytes())


def read_matrix_binary(path):
    """Inverse of :func:`write_matrix_binary`; returns (array, header)."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        data = np.frombuffer(fh.read(), dtype=header["dtype"])
    return data.reshape(header["dims"]).copy(), header
