"""Two cubic-integrator chains that defeat classical high-gain designs.

Variant 1:  dx = (x2, x3^3, drive + u),        y = x1.
Variant 2:  dx = (x2, x3^3 * x1, drive + u),   y = x1.

The cubic needs two extension coordinates, phi = (x3^3/3, x3^2/2), because
the derivative of x3^3/3 is x3^2 (drive + u) and must itself be affine in
the lifted state.  ``drive`` is the constant forcing printed as "1" in the
chain; it is exposed as a parameter so excitation studies can switch it off.

Variant 2 grows like exp(t^{5/2}) whenever x3 drifts (any input with
nonzero mean of drive + u), which exits double precision well inside a 10 s
horizon.  Its default input therefore cancels the drive, u = -1 + 0.8 sin t,
keeping x3 oscillating and the run finite while the published dynamics stay
intact.
"""

from __future__ import annotations

import numpy as np

from ..immersion import Immersion
from ..system import InputPolicy, NonlinearSystem
from .base import Benchmark, LinearRegressionSpec, ScenarioDefaults

PARAMS_1 = {"drive": 1.0, "u_amp": 1.0, "u_offset": 0.0, "u_phase": 0.0}
PARAMS_2 = {"drive": 1.0, "u_amp": 0.8, "u_offset": -1.0, "u_phase": 0.0}
PARAM_INFO = {
    "drive": "constant forcing in dx3/dt = drive + u (published value 1)",
    "u_amp": "open-loop input amplitude, u = u_offset + u_amp*sin(t+u_phase)",
    "u_offset": "open-loop input offset (V-equivalent, dimensionless here)",
    "u_phase": "open-loop input phase (rad)",
}

_C = np.array([[1.0, 0.0, 0.0, 0.0, 0.0]])


def _immersion(drive: float, cubic_times_x1: bool) -> Immersion:
    def W(y, u):
        g = drive + u[0]
        w24 = 3.0 * y[0] if cubic_times_x1 else 3.0
        return np.array([
            [0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, w24, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 2.0 * g],
            [0.0, 0.0, g, 0.0, 0.0],
        ])

    def L(y, u):
        return np.array([0.0, 0.0, drive + u[0], 0.0, 0.0])

    return Immersion(
        n=3, ell=2,
        phi=lambda x: np.array([x[2] ** 3 / 3.0, 0.5 * x[2] ** 2]),
        grad_phi=lambda x: np.array([[0.0, 0.0, x[2] ** 2],
                                     [0.0, 0.0, x[2]]]),
        W=W, L=L,
    )


def _build(bid: str, params: dict, cubic_times_x1: bool, x0: np.ndarray,
           theta: np.ndarray, notes: str) -> Benchmark:
    drive = params["drive"]

    if cubic_times_x1:
        def f(x, u):
            return np.array([x[1], x[2] ** 3 * x[0], drive + u[0]])
    else:
        def f(x, u):
            return np.array([x[1], x[2] ** 3, drive + u[0]])

    def h(x, u):
        return np.array([x[0]])

    system = NonlinearSystem(name=bid, n=3, m=1, p=1, f=f, h=h)
    imm = _immersion(drive, cubic_times_x1)

    amp, off, ph = params["u_amp"], params["u_offset"], params["u_phase"]
    controller = InputPolicy(kind="open-loop",
                             fn=lambda t: np.array([off + amp * np.sin(t + ph)]))

    z0 = np.concatenate([x0, [x0[2] ** 3 / 3.0, 0.5 * x0[2] ** 2]])
    defaults = ScenarioDefaults(
        x0=x0, xi0=z0 + theta, dt=1e-3, horizon=10.0,
        estimator="full", gamma_H=1.0, gamma_i=20.0, f0=10.0, chi0=0.5,
        G0_value=0.0,
    )

    return Benchmark(
        bid=bid,
        title="Cubic integrator chain" + (" with output coupling" if cubic_times_x1 else ""),
        system=system, immersion=imm, controller=controller,
        params=dict(params), param_info=PARAM_INFO,
        regression=LinearRegressionSpec(C=lambda u: _C, nz=5),
        defaults=defaults,
        box_x=np.array([[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]]),
        box_u=np.array([[-1.5, 1.5]]),
        notes=notes,
    )


def build_1(params: dict) -> Benchmark:
    return _build("bernard-1", params, cubic_times_x1=False,
                  x0=np.array([0.1, 0.0, 0.0]),
                  theta=np.array([0.2, 0.2, 0.2, 0.2, 0.2]),
                  notes="Does not admit a classical high-gain observer; the "
                        "lifted chain is nilpotent so trajectories grow only "
                        "polynomially.")


def build_2(params: dict) -> Benchmark:
    return _build("bernard-2", params, cubic_times_x1=True,
                  x0=np.array([0.3, 0.0, -0.8]),
                  theta=np.array([0.2, 0.2, 0.2, 0.2, 0.2]),
                  notes="Default input cancels the constant drive "
                        "(u = -1 + 0.8 sin t) so x3 oscillates; a drifting x3 "
                        "makes the state grow like exp(t^{5/2}).")
