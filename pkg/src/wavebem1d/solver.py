"""Dense direct solves, spectral condition numbers and inf-sup constants."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import SingularMatrixError

RESIDUAL_TOL = 1e-10


def solve_dense(A: np.ndarray, b: np.ndarray, tol: float = RESIDUAL_TOL) -> np.ndarray:
    """LU solve with partial pivoting and one step of iterative refinement.

    Raises :class:`SingularMatrixError` if a pivot vanishes to working
    precision or the relative residual stays above ``tol``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    with warnings.catch_warnings():
        # singularity is reported below as SingularMatrixError
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=True)
    d = np.abs(np.diag(lu))
    if d.min() <= np.finfo(float).eps * A.shape[0] * max(d.max(), np.finfo(float).tiny):
        raise SingularMatrixError("matrix is singular to working precision")
    x = sla.lu_solve((lu, piv), b)
    nb = np.linalg.norm(b)
    r = b - A @ x
    if np.linalg.norm(r) > tol * nb:
        x = x + sla.lu_solve((lu, piv), r)
        r = b - A @ x
    if np.linalg.norm(r) > tol * nb:
        raise SingularMatrixError(f"relative residual {np.linalg.norm(r) / nb:.2e} exceeds {tol:g}")
    return x


def condition_number_2(A: np.ndarray) -> float:
    """sigma_max / sigma_min; ``inf`` when A is singular."""
    s = np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False)
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


@dataclass(frozen=True)
class InfSupProblem:
    """Operator matrix B (rows: test, cols: trial) with trial Gram M_x and
    test Gram M_y."""

    B: np.ndarray
    M_x: np.ndarray
    M_y: np.ndarray

    def __post_init__(self):
        n = self.B.shape[0]
        for name in ("B", "M_x", "M_y"):
            if getattr(self, name).shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")


def infsup_constant(p: InfSupProblem) -> float:
    """Smallest sqrt(lambda) of B^T M_y^{-1} B w = lambda M_x w."""
    try:
        cy = sla.cho_factor(p.M_y)
    except np.linalg.LinAlgError as exc:
        raise ValueError("M_y is not positive definite") from exc
    S = p.B.T @ sla.cho_solve(cy, p.B)
    S = 0.5 * (S + S.T)
    try:
        lam = sla.eigh(S, p.M_x, eigvals_only=True, subset_by_index=[0, 0])
    except np.linalg.LinAlgError as exc:
        raise ValueError("M_x is not positive definite") from exc
    return float(np.sqrt(max(lam[0], 0.0)))


def min_rayleigh_quotient(A: np.ndarray, M: np.ndarray) -> float:
    """min |w^T A w| / (w^T M w) over w != 0.

    Uses the generalised eigenvalues of (sym(A), M); if the symmetric part
    is indefinite the minimum is 0.
    """
    S = 0.5 * (A + A.T)
    ev = sla.eigh(S, M, eigvals_only=True)
    if ev[0] < 0 < ev[-1]:
        return 0.0
    return float(np.min(np.abs(ev)))
