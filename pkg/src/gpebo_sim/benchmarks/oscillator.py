"""Cubic-velocity oscillator, lifted with z = (x1, x2, x2^2, x2^3).

    dx1/dt = x2^3,   dx2/dt = -x1,   y = x1.

Energy H = x1^2/2 + x2^4/4 is conserved, so trajectories stay on bounded
ovals; the lifted dynamics dz/dt = W(y) z is a worked case where a
Kalman-Bucy design would need uniform complete observability but interval
excitation suffices here.

Row 4 of W: d(x2^3)/dt = 3 x2^2 (-x1) = -3 y z3, i.e. (0, 0, -3y, 0).
(The printed source carries the row as (0, -3y, 0, 1), which fails the
matching equations; the transcription is pinned by the residual tests.)
"""

from __future__ import annotations

import numpy as np

from ..immersion import Immersion
from ..system import InputPolicy, NonlinearSystem
from .base import Benchmark, LinearRegressionSpec, ScenarioDefaults

PARAMS: dict = {}
PARAM_INFO: dict = {}

_C = np.array([[1.0, 0.0, 0.0, 0.0]])


def build(params: dict) -> Benchmark:
    def f(x, u):
        return np.array([x[1] ** 3, -x[0]])

    def h(x, u):
        return np.array([x[0]])

    system = NonlinearSystem(name="remark4-oscillator", n=2, m=1, p=1, f=f, h=h)

    def W(y, u):
        return np.array([
            [0.0, 0.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, -2.0 * y[0], 0.0, 0.0],
            [0.0, 0.0, -3.0 * y[0], 0.0],
        ])

    imm = Immersion(
        n=2, ell=2,
        phi=lambda x: np.array([x[1] ** 2, x[1] ** 3]),
        grad_phi=lambda x: np.array([[0.0, 2.0 * x[1]],
                                     [0.0, 3.0 * x[1] ** 2]]),
        W=W,
        L=lambda y, u: np.zeros(4),
    )

    controller = InputPolicy(kind="open-loop", fn=lambda t: np.zeros(1))

    x0 = np.array([1.0, 0.5])
    theta = np.array([0.1, 0.1, 0.1, 0.1])
    z0 = np.array([x0[0], x0[1], x0[1] ** 2, x0[1] ** 3])
    defaults = ScenarioDefaults(
        x0=x0, xi0=z0 + theta, dt=1e-3, horizon=10.0,
        estimator="full", gamma_H=5.0, gamma_i=50.0, f0=10.0, chi0=1.0,
        G0_value=0.0,
    )

    return Benchmark(
        bid="remark4-oscillator",
        title="Conservative oscillator with cubic velocity",
        system=system, immersion=imm, controller=controller,
        params=dict(params), param_info=PARAM_INFO,
        regression=LinearRegressionSpec(C=lambda u: _C, nz=4),
        defaults=defaults,
        box_x=np.array([[-2.0, 2.0], [-2.0, 2.0]]),
        box_u=np.array([[-1.0, 1.0]]),
        notes="No input; excitation comes from the orbit itself.",
    )
