"""Planar academic system that defeats exact observer-form transformations.

    dx1/dt = x2 + x2^2/2 + alpha(x1),   dx2/dt = x2,   y = x1.

The x2^2/2 term cannot be written as a function of the output, so the state
is extended with phi = x2^2/2, giving a constant W (non-Hurwitz: the plant
itself is unstable, with x2 growing like e^t and the lifted mode like e^2t).
alpha is a free output-injection shape; here alpha(x1) = alpha_gain * x1.

Default scenario sizing: over a 10 s horizon the fundamental matrix reaches
e^20 ~ 5e8, so the initial x2 and the parameter offsets are kept small
enough that roundoff amplified through that mode stays below the observer
identity and regression-exactness test floors in double precision.
"""

from __future__ import annotations

import numpy as np

from ..immersion import Immersion
from ..system import InputPolicy, NonlinearSystem
from .base import Benchmark, LinearRegressionSpec, ScenarioDefaults

PARAMS = {"alpha_gain": -1.0, "u_amp": 1.0, "u_phase": 0.0}
PARAM_INFO = {
    "alpha_gain": "slope of the output injection alpha(x1) = alpha_gain*x1 (1/s)",
    "u_amp": "amplitude of the open-loop probe u(t) = u_amp*sin(t+u_phase); u does not enter the dynamics",
    "u_phase": "phase of the probe input (rad)",
}


def build(params: dict) -> Benchmark:
    a = params["alpha_gain"]

    def f(x, u):
        return np.array([x[1] + 0.5 * x[1] ** 2 + a * x[0], x[1]])

    def h(x, u):
        return np.array([x[0]])

    system = NonlinearSystem(name="levine-marino", n=2, m=1, p=1, f=f, h=h)

    W0 = np.array([[0.0, 1.0, 1.0],
                   [0.0, 1.0, 0.0],
                   [0.0, 0.0, 2.0]])

    imm = Immersion(
        n=2, ell=1,
        phi=lambda x: np.array([0.5 * x[1] ** 2]),
        grad_phi=lambda x: np.array([[0.0, x[1]]]),
        W=lambda y, u: W0,
        L=lambda y, u: np.array([a * y[0], 0.0, 0.0]),
    )

    amp, ph = params["u_amp"], params["u_phase"]
    controller = InputPolicy(kind="open-loop", fn=lambda t: np.array([amp * np.sin(t + ph)]))

    C = np.array([[1.0, 0.0, 0.0]])
    regression = LinearRegressionSpec(C=lambda u: C, nz=3)

    x0 = np.array([0.5, 0.02])
    theta = np.array([0.01, 0.005, 1e-4])
    z0 = np.concatenate([x0, [0.5 * x0[1] ** 2]])
    defaults = ScenarioDefaults(
        x0=x0, xi0=z0 + theta, dt=1e-3, horizon=10.0,
        estimator="full", gamma_H=2.0, gamma_i=20.0, f0=10.0, chi0=0.5,
        G0_value=0.0, gradient_gamma=1.0,
    )

    return Benchmark(
        bid="levine-marino",
        title="Planar system with quadratic velocity term",
        system=system, immersion=imm, controller=controller,
        params=dict(params), param_info=PARAM_INFO,
        regression=regression, defaults=defaults,
        box_x=np.array([[-2.0, 2.0], [-2.0, 2.0]]),
        box_u=np.array([[-1.0, 1.0]]),
        notes="Unstable plant; W constant and non-Hurwitz. Defaults keep the "
              "e^{2t} lifted mode under the divergence guard for 10 s.",
    )
