"""Nonlinear plant representation and trajectory primitives.

A plant is dx/dt = f(x, u) with readout y = h(x, u).  Control inputs are
applied zero-order-hold at the integration rate; the integrator itself is
the shared RK4 step so that plant, observer and estimator all advance under
one deterministic scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import rk4_step

__all__ = ["InputPolicy", "NonlinearSystem", "plant_step", "readout"]


@dataclass(frozen=True)
class NonlinearSystem:
    """Immutable plant: dimensions plus the maps f and h."""

    name: str
    n: int
    m: int
    p: int
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    h: Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class InputPolicy:
    """Input generator: an open-loop signal or an output/estimate feedback.

    kind "open-loop": fn(t) -> u.
    kind "feedback":  fn(t, y, x_hat) -> u (certainty-equivalence control).
    """

    kind: str
    fn: Callable

    def __post_init__(self):
        if self.kind not in ("open-loop", "feedback"):
            raise ValueError(f"unknown input policy kind {self.kind!r}")

    def __call__(self, t: float, y: np.ndarray, x_hat: np.ndarray) -> np.ndarray:
        if self.kind == "open-loop":
            u = self.fn(t)
        else:
            u = self.fn(t, y, x_hat)
        return np.atleast_1d(np.asarray(u, dtype=float))


def plant_step(sys: NonlinearSystem, x: np.ndarray, u: np.ndarray,
               dt: float, t: float = 0.0) -> np.ndarray:
    """One RK4 step of dx/dt = f(x, u) with u held constant over the step."""
    u = np.asarray(u, dtype=float)
    return rk4_step(lambda s, xs: np.asarray(sys.f(xs, u), dtype=float), t, x, dt)


def readout(sys: NonlinearSystem, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate y = h(x, u)."""
    y = np.atleast_1d(np.asarray(sys.h(np.asarray(x, dtype=float),
                                       np.asarray(u, dtype=float)), dtype=float))
    if y.shape != (sys.p,):
        raise ValueError(f"readout of {sys.name} returned shape {y.shape}, expected ({sys.p},)")
    return y
