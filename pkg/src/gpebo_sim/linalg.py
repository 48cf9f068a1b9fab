"""Small dense linear algebra and fixed-step integration.

Everything operates on float64 numpy arrays.  Square matrices are capped at
16x16: the largest lifted state in the catalog is 7-dimensional and the
largest regressor space 14-dimensional, so dense direct methods are both
exact enough and cheap.  All functions are pure and deterministic, which is
what keeps the observer identity z = xi - Phi*theta reproducible bit for bit.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

MAX_DIM = 16

__all__ = ["DivergenceError", "MAX_DIM", "adjugate", "determinant", "rk4_step"]


class DivergenceError(RuntimeError):
    """A derivative evaluation or trajectory stopped being finite."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t:.6g}")
        self.t = float(t)


def rk4_step(field: Callable[[float, np.ndarray], np.ndarray],
             t: float, state: np.ndarray, dt: float) -> np.ndarray:
    """Advance ``state`` by one classical 4th-order Runge-Kutta step.

    ``field(t, state)`` must return the time derivative.  Raises
    :class:`DivergenceError` if any stage derivative is non-finite.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    state = np.asarray(state, dtype=float)
    k1 = np.asarray(field(t, state), dtype=float)
    k2 = np.asarray(field(t + 0.5 * dt, state + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(field(t + 0.5 * dt, state + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(field(t + dt, state + dt * k3), dtype=float)
    for k in (k1, k2, k3, k4):
        if not np.all(np.isfinite(k)):
            raise DivergenceError("non-finite derivative evaluation", t)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"matrix size {a.shape[0]} exceeds cap {MAX_DIM}")
    return a


def determinant(a: np.ndarray) -> float:
    """Determinant via LU with partial pivoting (LAPACK getrf)."""
    a = _check_square(a)
    return float(np.linalg.det(a))


# Cached index machinery for the cofactor construction of the adjugate:
# for each size n, row/column selectors that carve out all (n-1)x(n-1)
# minors in one fancy-indexing step, plus the checkerboard signs.
_MINOR_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _minor_indices(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cached = _MINOR_CACHE.get(n)
    if cached is not None:
        return cached
    keep = np.array([[r for r in range(n) if r != i] for i in range(n)])
    rows = keep[:, None, :, None]            # (n, 1, n-1, 1)
    cols = keep[None, :, None, :]            # (1, n, 1, n-1)
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    signs = np.where((i + j) % 2 == 0, 1.0, -1.0)
    _MINOR_CACHE[n] = (rows, cols, signs)
    return rows, cols, signs


def adjugate(a: np.ndarray) -> np.ndarray:
    """Adjugate matrix, adj(A) A = det(A) I.

    Computed as the transposed cofactor matrix with every (n-1)x(n-1) minor
    evaluated by LU in one batched determinant call.  Unlike det(A)*inv(A)
    this stays exact for singular inputs; adj(0) = 0 for n >= 2, which the
    DREM mixing needs at t = 0 where I - zeta*f0*F vanishes identically.
    """
    a = _check_square(a)
    n = a.shape[0]
    if n == 1:
        return np.ones((1, 1))
    rows, cols, signs = _minor_indices(n)
    minors = a[rows, cols]                   # (n, n, n-1, n-1)
    cof = signs * np.linalg.det(minors)
    return cof.T.copy()
