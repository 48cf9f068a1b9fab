"""Algebraic immersion of a nonlinear plant into state-affine form.

An immersion packages the extension map phi, its analytic Jacobian, and the
block mappings W(y, u), L(y, u) such that along plant trajectories the lifted
state z = (x, phi(x)) obeys dz/dt = W(y, u) z + L(y, u).  The module verifies
immersions numerically (the matching residual); it does not synthesize them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .system import NonlinearSystem

__all__ = [
    "Immersion",
    "affine_field",
    "lift",
    "matching_residual",
    "residual_scan",
    "selector",
]


@dataclass(frozen=True)
class Immersion:
    """Extension map and affine coefficients for one plant.

    ``phi`` maps x (length n) to the extension coordinates (length ell);
    ``grad_phi`` is its analytic transposed-gradient, shape (ell, n);
    ``W(y, u)`` returns the full (n+ell) x (n+ell) coefficient matrix and
    ``L(y, u)`` the (n+ell) drift vector.  ell = 0 is allowed (z = x).
    """

    n: int
    ell: int
    phi: Callable[[np.ndarray], np.ndarray]
    grad_phi: Callable[[np.ndarray], np.ndarray]
    W: Callable[[np.ndarray, np.ndarray], np.ndarray]
    L: Callable[[np.ndarray, np.ndarray], np.ndarray]

    @property
    def nz(self) -> int:
        return self.n + self.ell


def selector(n: int, nz: int) -> np.ndarray:
    """The selector D = [I_n | 0] with D z = x for z = (x, phi(x))."""
    if not 0 < n <= nz:
        raise ValueError(f"need 0 < n <= nz, got n={n}, nz={nz}")
    return np.hstack([np.eye(n), np.zeros((n, nz - n))])


def lift(imm: Immersion, x: np.ndarray) -> np.ndarray:
    """z = (x, phi(x))."""
    x = np.asarray(x, dtype=float)
    if imm.ell == 0:
        return x.copy()
    return np.concatenate([x, np.atleast_1d(np.asarray(imm.phi(x), dtype=float))])


def affine_field(imm: Immersion, y: np.ndarray, u: np.ndarray,
                 z: np.ndarray) -> np.ndarray:
    """Right-hand side W(y, u) z + L(y, u) of the lifted dynamics."""
    return imm.W(y, u) @ np.asarray(z, dtype=float) + imm.L(y, u)


def matching_residual(sys: NonlinearSystem, imm: Immersion, x: np.ndarray,
                      u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Defect of the two matching equations at one point.

    r1 = f(x,u) - W11 x - W12 phi - L1 and
    r2 = grad_phi(x) f(x,u) - W21 x - W22 phi - L2.
    Both vanish identically for a valid immersion; a nonzero residual is
    data (it localizes a transcription error), not an exception.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    n = imm.n
    y = np.atleast_1d(np.asarray(sys.h(x, u), dtype=float))
    fx = np.asarray(sys.f(x, u), dtype=float)
    z = lift(imm, x)
    rhs = imm.W(y, u) @ z + imm.L(y, u)
    r1 = fx - rhs[:n]
    if imm.ell == 0:
        return r1, np.zeros(0)
    gphi = np.asarray(imm.grad_phi(x), dtype=float).reshape(imm.ell, n)
    r2 = gphi @ fx - rhs[n:]
    return r1, r2


@dataclass(frozen=True)
class ResidualReport:
    """Worst-case matching residuals over a sampled operating box."""

    samples: int
    max_r1: float
    max_r2: float
    worst_x: np.ndarray = field(repr=False, default=None)
    worst_u: np.ndarray = field(repr=False, default=None)

    @property
    def max_total(self) -> float:
        return self.max_r1 + self.max_r2


def residual_scan(sys: NonlinearSystem, imm: Immersion, box_x: np.ndarray,
                  box_u: np.ndarray, samples: int = 1000,
                  seed: int = 0) -> ResidualReport:
    """Sample (x, u) uniformly in the benchmark's operating box and report
    the worst inf-norm matching residuals.  Deterministic for a given seed.
    """
    rng = np.random.default_rng(seed)
    box_x = np.asarray(box_x, dtype=float).reshape(sys.n, 2)
    box_u = np.asarray(box_u, dtype=float).reshape(sys.m, 2) if sys.m else np.zeros((0, 2))
    worst = (-1.0, -1.0, None, None)
    max_r1 = max_r2 = 0.0
    for _ in range(samples):
        x = rng.uniform(box_x[:, 0], box_x[:, 1])
        u = rng.uniform(box_u[:, 0], box_u[:, 1]) if sys.m else np.zeros(0)
        r1, r2 = matching_residual(sys, imm, x, u)
        a1 = float(np.max(np.abs(r1))) if r1.size else 0.0
        a2 = float(np.max(np.abs(r2))) if r2.size else 0.0
        max_r1 = max(max_r1, a1)
        max_r2 = max(max_r2, a2)
        if a1 + a2 > worst[0] + worst[1]:
            worst = (a1, a2, x, u)
    return ResidualReport(samples=samples, max_r1=max_r1, max_r2=max_r2,
                          worst_x=worst[2], worst_u=worst[3])
