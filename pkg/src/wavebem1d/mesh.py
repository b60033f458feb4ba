"""Lateral space-time boundary meshes.

The lateral boundary of (0, L) x (0, T) consists of two time strands, one at
x = 0 ("left") and one at x = L ("right").  Each strand carries its own
partition of [0, T]; nothing couples the two partitions except the optional
slice-shift property checked by :func:`satisfies_slice_shift`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

STRANDS = ("left", "right")


def strand_index(strand: str | int) -> int:
    """Map ``"left"``/``"right"`` (or 0/1) to 0/1."""
    if strand in (0, "left"):
        return 0
    if strand in (1, "right"):
        return 1
    raise ValueError(f"unknown strand {strand!r}; expected 'left' or 'right'")


def _as_breaks(values, T: float, name: str) -> np.ndarray:
    b = np.array(values, dtype=float)
    if b.ndim != 1 or b.size < 2:
        raise ValueError(f"{name}: need at least two breakpoints")
    if b[0] != 0.0 or b[-1] != T:
        raise ValueError(f"{name}: must start at 0 and end at T={T!r}")
    if not np.all(np.diff(b) > 0):
        raise ValueError(f"{name}: breakpoints must be strictly increasing")
    b.setflags(write=False)
    return b


@dataclass(frozen=True, eq=False)
class LateralMesh:
    """Two independent partitions of (0, T), one per boundary point.

    Attributes
    ----------
    L : float
        Length of the spatial interval.
    T : float
        Terminal time.
    left_breaks, right_breaks : np.ndarray
        Sorted breakpoints of the strands x=0 and x=L, each running from
        exactly 0 to exactly T.
    family : str
        Provenance label ("uniform", "shifted_pair", ...).  All generated
        families are globally quasi-uniform.
    """

    L: float
    T: float
    left_breaks: np.ndarray
    right_breaks: np.ndarray
    family: str = field(default="custom", compare=False)

    def __post_init__(self):
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"L must be positive and finite, got {self.L!r}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive and finite, got {self.T!r}")
        object.__setattr__(self, "left_breaks", _as_breaks(self.left_breaks, self.T, "left_breaks"))
        object.__setattr__(self, "right_breaks", _as_breaks(self.right_breaks, self.T, "right_breaks"))

    def __eq__(self, other):
        if not isinstance(other, LateralMesh):
            return NotImplemented
        return (
            (self.L, self.T) == (other.L, other.T)
            and np.array_equal(self.left_breaks, other.left_breaks)
            and np.array_equal(self.right_breaks, other.right_breaks)
        )

    def __hash__(self):
        return hash((self.L, self.T, self.left_breaks.tobytes(), self.right_breaks.tobytes()))

    def breaks(self, strand) -> np.ndarray:
        return (self.left_breaks, self.right_breaks)[strand_index(strand)]

    def n_elements(self, strand) -> int:
        return self.breaks(strand).size - 1

    @property
    def total_elements(self) -> int:
        """N = N_0 + N_L, the row label used in convergence tables."""
        return self.n_elements(0) + self.n_elements(1)

    @property
    def h(self) -> float:
        """Maximal element width over both strands."""
        return float(max(np.diff(self.left_breaks).max(), np.diff(self.right_breaks).max()))

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "T": self.T,
            "left_breaks": self.left_breaks.tolist(),
            "right_breaks": self.right_breaks.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "LateralMesh":
        d = json.loads(text)
        return cls(float(d["L"]), float(d["T"]), d["left_breaks"], d["right_breaks"])


@dataclass(frozen=True)
class TimeSlices:
    """Time slices ((j-1)L, jL), the last one truncated at T."""

    n: int
    slices: tuple[tuple[float, float], ...]

    @property
    def edges(self) -> np.ndarray:
        return np.array([s[0] for s in self.slices] + [self.slices[-1][1]])


def _slice_edges(L: float, n: int) -> list[float]:
    # Repeated addition (not j*L) so that shift-propagated meshes hit the
    # slice boundaries bit-exactly.
    edges = [0.0]
    for _ in range(n):
        edges.append(edges[-1] + L)
    return edges


def slice_count(L: float, T: float) -> TimeSlices:
    """Number of time slices n = min{m : T <= mL} and the slice intervals."""
    if not (L > 0 and T > 0):
        raise ValueError("L and T must be positive")
    n = max(1, math.ceil(T / L))
    # guard against T/L rounding just above an integer
    while n > 1 and T <= (n - 1) * L:
        n -= 1
    while T > n * L:
        n += 1
    edges = _slice_edges(L, n)
    slices = [(edges[j], edges[j + 1]) for j in range(n)]
    slices[-1] = (slices[-1][0], min(slices[-1][1], T))
    return TimeSlices(n=n, slices=tuple(slices))


def uniform_mesh(L: float, T: float, N: int) -> LateralMesh:
    """Both strands split into ``N`` equal elements (N per strand)."""
    if not (L > 0 and T > 0):
        raise ValueError("L and T must be positive")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    b = np.linspace(0.0, T, int(N) + 1)
    b[-1] = T
    return LateralMesh(L, T, b, b.copy(), family="uniform")


def _strand_in_slice(b: np.ndarray, lo: float, hi: float, window: float) -> np.ndarray:
    return b[(b >= lo - window) & (b <= hi + window)]


def satisfies_slice_shift(mesh: LateralMesh, tol: float = 1e-12) -> bool:
    """Check that each strand's mesh on slice j reappears, shifted by L,
    on the opposite strand in slice j+1.

    ``tol`` is relative to T.  Also requires T = nL within the same tolerance.
    """
    atol = tol * mesh.T
    ts = slice_count(mesh.L, mesh.T)
    edges = _slice_edges(mesh.L, ts.n)
    if abs(edges[-1] - mesh.T) > atol:
        return False
    # a selection window is needed even at tol=0: float breakpoints on a
    # slice boundary must not be dropped by a rounding of the boundary itself
    window = max(atol, 1e-14 * mesh.T)
    for j in range(ts.n - 1):
        for src, dst in ((mesh.left_breaks, mesh.right_breaks), (mesh.right_breaks, mesh.left_breaks)):
            a = _strand_in_slice(src, edges[j], edges[j + 1], window) + mesh.L
            b = _strand_in_slice(dst, edges[j + 1], edges[j + 2], window)
            if a.size != b.size or np.any(np.abs(a - b) > atol):
                return False
    return True


def _seed_partition(seed: Sequence[float], L: float, name: str) -> np.ndarray:
    s = np.array(seed, dtype=float)
    if s.ndim != 1:
        raise ValueError(f"{name}: expected a 1d sequence")
    if s.size == 0 or s[0] != 0.0:
        s = np.concatenate([[0.0], s])
    if s[-1] != L:
        s = np.concatenate([s, [L]])
    if not np.all(np.diff(s) > 0) or s[0] != 0.0 or s[-1] != L:
        raise ValueError(f"{name}: not a valid partition of (0, {L})")
    return s


def shifted_pair_mesh(L: float, n: int, seed_left: Sequence[float], seed_right: Sequence[float]) -> LateralMesh:
    """Mesh on T = nL satisfying the slice-shift property by construction.

    Slice 1 of the left/right strand is ``seed_left``/``seed_right``; slice
    j+1 of each strand is slice j of the opposite strand shifted by +L.  The
    seeds may be given with or without their endpoints 0 and L.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    cur_l = _seed_partition(seed_left, L, "seed_left")
    cur_r = _seed_partition(seed_right, L, "seed_right")
    left, right = [cur_l], [cur_r]
    for _ in range(int(n) - 1):
        cur_l, cur_r = cur_r + L, cur_l + L
        left.append(cur_l[1:])
        right.append(cur_r[1:])
    lb, rb = np.concatenate(left), np.concatenate(right)
    T = lb[-1]
    return LateralMesh(L, T, lb, rb, family="shifted_pair")


def paper_nonuniform_initial(L: float = 3.0, T: float = 2 * math.pi, n_left: int = 40, n_right: int = 24) -> LateralMesh:
    """Initial mesh of the slice-shift-violating family: T=2*pi, L=3,
    40 uniform elements at x=0 and 24 at x=L."""
    lb = np.linspace(0.0, T, n_left + 1)
    rb = np.linspace(0.0, T, n_right + 1)
    lb[-1] = rb[-1] = T
    return LateralMesh(L, T, lb, rb, family="paper_nonuniform")


def refine(mesh: LateralMesh) -> LateralMesh:
    """Bisect every element on both strands."""

    def bisect(b):
        out = np.empty(2 * b.size - 1)
        out[0::2] = b
        out[1::2] = 0.5 * (b[:-1] + b[1:])
        return out

    return LateralMesh(mesh.L, mesh.T, bisect(mesh.left_breaks), bisect(mesh.right_breaks), family=mesh.family)
