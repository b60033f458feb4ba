"""Boundary element spaces and piecewise-polynomial trace functions.

Two spaces live on a :class:`~wavebem1d.mesh.LateralMesh`:

* ``p0`` -- piecewise constants, one DoF per element;
* ``p1`` -- continuous piecewise linears per strand that vanish at t=0,
  one DoF per non-initial node.

DoFs are numbered left strand first (ascending time), then right strand.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import OutOfDomainError, PreconditionError
from .mesh import LateralMesh, strand_index

# a per-strand function: (f(0, t), f(L, t)), each vectorised in t
StrandPair = Sequence[Callable[[np.ndarray], np.ndarray]]


class SpaceKind(str, enum.Enum):
    PW_CONSTANT = "p0"
    PW_LINEAR_ZERO_INIT = "p1"

    @property
    def degree(self) -> int:
        return 0 if self is SpaceKind.PW_CONSTANT else 1


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise linear function on one strand, possibly discontinuous.

    Element ``e`` spans ``breaks[e]..breaks[e+1]`` and takes the values
    ``start[e]`` and ``end[e]`` at its ends.  Evaluation is zero for t<0 and
    uses the right limit at interior breakpoints.
    """

    breaks: np.ndarray
    start: np.ndarray
    end: np.ndarray

    def __post_init__(self):
        for name in ("breaks", "start", "end"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.start.shape != (self.breaks.size - 1,) or self.end.shape != self.start.shape:
            raise ValueError("start/end must have one value per element")

    @classmethod
    def zero(cls, breaks) -> "PiecewiseLinear":
        n = len(breaks) - 1
        return cls(breaks, np.zeros(n), np.zeros(n))

    @classmethod
    def from_nodal(cls, breaks, values) -> "PiecewiseLinear":
        v = np.asarray(values, dtype=float)
        return cls(breaks, v[:-1], v[1:])

    @property
    def T(self) -> float:
        return float(self.breaks[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breaks)

    @property
    def slopes(self) -> np.ndarray:
        return (self.end - self.start) / self.widths

    def element_of(self, t: np.ndarray) -> np.ndarray:
        e = np.searchsorted(self.breaks, t, side="right") - 1
        return np.clip(e, 0, self.breaks.size - 2)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t > self.T * (1 + 1e-14)):
            raise OutOfDomainError(f"evaluation at t > T={self.T}")
        e = self.element_of(t)
        xi = (t - self.breaks[e]) / self.widths[e]
        val = self.start[e] + (self.end[e] - self.start[e]) * xi
        return np.where(t < 0, 0.0, val)

    def on_breaks(self, new_breaks: np.ndarray) -> "PiecewiseLinear":
        """Same function on a refinement of its breakpoints."""
        nb = np.asarray(new_breaks, dtype=float)
        mid = 0.5 * (nb[:-1] + nb[1:])
        e = self.element_of(mid)
        w = self.widths[e]
        s = self.start[e] + (self.end[e] - self.start[e]) * (nb[:-1] - self.breaks[e]) / w
        t = self.start[e] + (self.end[e] - self.start[e]) * (nb[1:] - self.breaks[e]) / w
        return PiecewiseLinear(nb, s, t)

    def scaled(self, c: float) -> "PiecewiseLinear":
        return PiecewiseLinear(self.breaks, c * self.start, c * self.end)

    def is_continuous(self, atol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.end[:-1] - self.start[1:]) <= atol))


def merge_breaks(*arrays: np.ndarray) -> np.ndarray:
    """Sorted union of breakpoint arrays, collapsing near-duplicates."""
    b = np.unique(np.concatenate(arrays))
    if b.size > 1:
        scale = max(abs(b[0]), abs(b[-1]), 1.0)
        keep = np.concatenate([[True], np.diff(b) > 1e-13 * scale])
        # keep the exact right end
        last = b[-1]
        b = b[keep]
        b[-1] = last
    return b


def add(f: PiecewiseLinear, g: PiecewiseLinear) -> PiecewiseLinear:
    b = merge_breaks(f.breaks, g.breaks)
    fr, gr = f.on_breaks(b), g.on_breaks(b)
    return PiecewiseLinear(b, fr.start + gr.start, fr.end + gr.end)


def inner(f: PiecewiseLinear, g: PiecewiseLinear) -> float:
    """Exact L2(0,T) inner product of two piecewise linears."""
    b = merge_breaks(f.breaks, g.breaks)
    fr, gr = f.on_breaks(b), g.on_breaks(b)
    h = np.diff(b)
    return float(np.sum(h / 6 * (2 * fr.start * gr.start + fr.start * gr.end + fr.end * gr.start + 2 * fr.end * gr.end)))


@dataclass(frozen=True)
class TraceFunction:
    """A function on the lateral boundary: one piecewise polynomial per strand."""

    left: PiecewiseLinear
    right: PiecewiseLinear
    degree: int = 1

    def strand(self, strand) -> PiecewiseLinear:
        return (self.left, self.right)[strand_index(strand)]

    @property
    def strands(self) -> tuple[PiecewiseLinear, PiecewiseLinear]:
        return (self.left, self.right)

    def __call__(self, strand, t):
        return self.strand(strand)(t)

    def __add__(self, other: "TraceFunction") -> "TraceFunction":
        return TraceFunction(add(self.left, other.left), add(self.right, other.right), max(self.degree, other.degree))

    def __sub__(self, other: "TraceFunction") -> "TraceFunction":
        return self + other.scaled(-1.0)

    def scaled(self, c: float) -> "TraceFunction":
        return TraceFunction(self.left.scaled(c), self.right.scaled(c), self.degree)


def eval_trace(f: TraceFunction, strand, t):
    """Value of ``f`` on ``strand`` at time(s) ``t``; zero for t<0."""
    return f(strand, t)


def l2_inner(f: TraceFunction, g: TraceFunction) -> float:
    """Exact L2(Sigma) inner product."""
    return inner(f.left, g.left) + inner(f.right, g.right)


@dataclass(frozen=True)
class DiscreteSpace:
    """S^0(Sigma_h) or S^1_{0,}(Sigma_h) on a lateral mesh."""

    kind: SpaceKind
    mesh: LateralMesh

    def __post_init__(self):
        object.__setattr__(self, "kind", SpaceKind(self.kind))

    def strand_dof_count(self, strand) -> int:
        # p0: one per element; p1: one per node except t=0 -- same number
        return self.mesh.n_elements(strand)

    @property
    def dof_count(self) -> int:
        return self.strand_dof_count(0) + self.strand_dof_count(1)

    def strand_offset(self, strand) -> int:
        return 0 if strand_index(strand) == 0 else self.strand_dof_count(0)

    def strand_slice(self, strand) -> slice:
        off = self.strand_offset(strand)
        return slice(off, off + self.strand_dof_count(strand))

    def element_dofs(self, strand) -> np.ndarray:
        """Global DoF index of each local shape function, shape (n_el, n_loc).

        Entries of -1 mark the excluded t=0 hat of the p1 space.
        """
        n = self.mesh.n_elements(strand)
        off = self.strand_offset(strand)
        e = np.arange(n)
        if self.kind is SpaceKind.PW_CONSTANT:
            return (off + e)[:, None]
        d = np.stack([off + e - 1, off + e], axis=1)
        d[0, 0] = -1
        return d

    def dof_times(self, strand) -> np.ndarray:
        """Time attached to each DoF: element midpoint (p0) or node (p1)."""
        b = self.mesh.breaks(strand)
        if self.kind is SpaceKind.PW_CONSTANT:
            return 0.5 * (b[:-1] + b[1:])
        return b[1:]


def to_trace(space: DiscreteSpace, coeffs) -> TraceFunction:
    """Trace function with the given coefficient vector."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (space.dof_count,):
        raise ValueError(f"expected {space.dof_count} coefficients, got shape {c.shape}")
    parts = []
    for s in (0, 1):
        b = space.mesh.breaks(s)
        cs = c[space.strand_slice(s)]
        if space.kind is SpaceKind.PW_CONSTANT:
            parts.append(PiecewiseLinear(b, cs, cs))
        else:
            parts.append(PiecewiseLinear.from_nodal(b, np.concatenate([[0.0], cs])))
    return TraceFunction(parts[0], parts[1], space.kind.degree)


def basis_function(space: DiscreteSpace, i: int) -> TraceFunction:
    e = np.zeros(space.dof_count)
    e[i] = 1.0
    return to_trace(space, e)


def nodal_interpolate(g: StrandPair, space: DiscreteSpace, atol: float = 1e-12) -> np.ndarray:
    """Coefficients of the nodal interpolant I_h g in the p1 space."""
    if space.kind is not SpaceKind.PW_LINEAR_ZERO_INIT:
        raise ValueError("nodal interpolation needs the p1 space")
    out = np.empty(space.dof_count)
    for s in (0, 1):
        g0 = float(np.asarray(g[s](np.array([0.0])))[0])
        if abs(g0) > atol:
            raise PreconditionError(f"g({'0L'[s]}, 0) = {g0:g} is not zero")
        out[space.strand_slice(s)] = g[s](space.mesh.breaks(s)[1:])
    return out


def trace_samples_csv(f: TraceFunction, n: int = 200) -> str:
    """Sampled values of ``f`` on both strands as CSV (t,left,right)."""
    t = np.linspace(0.0, f.left.T, n)
    rows = ["t,left,right"]
    rows += [f"{a!r},{b!r},{c!r}" for a, b, c in zip(t.tolist(), f.left(t).tolist(), f.right(t).tolist())]
    return "\n".join(rows) + "\n"
