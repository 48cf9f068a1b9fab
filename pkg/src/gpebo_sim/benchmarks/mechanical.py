"""Two mechanical systems with position readouts and momentum extensions.

Prismatic robot (2 DoF, x = (q1, q2, p1, p2), y = (q1, q2)):

    dx1/dt = x3 / (a x2^2 + b),   dx2/dt = x4 / a,
    dx3/dt = u1,                  dx4/dt = -2 a x2 x3^2 / (a x2^2 + b)^2 + u2.

The squared momentum drives phi = x3^2/2; its derivative x3 u1 is input-
affine, so n_z = 5.  Note the W entry -4 a y2 / (a y2^2 + b)^2 against
phi = x3^2/2 reproduces the -2 a x2 x3^2 coefficient of the dynamics.
Closed loop: a certainty-equivalence PD law on measured positions and
estimated momenta.

Robotic leg (3 DoF, x = (q1, q2, q3, p1, p2, p3), y = q1 the leg length):

    dx1/dt = x4/m1,  dx2/dt = x5/(m1 x1^2),  dx3/dt = x6/m2,
    dx4/dt = x5^2/(m1 x1^3) + u1,  dx5/dt = u2,  dx6/dt = -u2,

with phi = x5^2 and n_z = 7.  W carries 1/y^2 and 1/y^3, so the operating
box keeps the leg length away from zero.
"""

from __future__ import annotations

import numpy as np

from ..immersion import Immersion
from ..system import InputPolicy, NonlinearSystem
from .base import Benchmark, LinearRegressionSpec, ScenarioDefaults

PRISMATIC_PARAMS = {
    "a": 1.0,
    "b": 3.0,
    "Kp1": 70.0,
    "Kp2": 30.0,
    "Kd": 10.0,
    "q1_star": 0.1,
    "q2_star": np.pi / 8.0,
}
PRISMATIC_INFO = {
    "a": "inertia parameter (kg)",
    "b": "inertia parameter (kg m^2)",
    "Kp1": "proportional gain, joint 1",
    "Kp2": "proportional gain, joint 2",
    "Kd": "derivative gain (both joints)",
    "q1_star": "position setpoint, joint 1 (m)",
    "q2_star": "position setpoint, joint 2 (rad)",
}

LEG_PARAMS = {"m1": 1.0, "m2": 1.0, "u_amp1": 1.0, "u_amp2": 1.0, "u_phase": 0.0}
LEG_INFO = {
    "m1": "leg mass (kg)",
    "m2": "body mass (kg)",
    "u_amp1": "amplitude of u1 = u_amp1*sin(t+u_phase)",
    "u_amp2": "amplitude of u2 = u_amp2*cos(t+u_phase)",
    "u_phase": "probe input phase (rad)",
}

_C_PRIS = np.hstack([np.eye(2), np.zeros((2, 3))])
_C_LEG = np.array([[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]])


def pd_controller(x12: np.ndarray, x34_hat: np.ndarray, params: dict) -> np.ndarray:
    """u = -K_p (x12 - x*) - K_d x34_hat on measured positions."""
    Kp = np.array([params["Kp1"], params["Kp2"]])
    target = np.array([params["q1_star"], params["q2_star"]])
    return -Kp * (np.asarray(x12, dtype=float) - target) - params["Kd"] * np.asarray(x34_hat, dtype=float)


def build_prismatic(params: dict) -> Benchmark:
    a, b = params["a"], params["b"]

    def f(x, u):
        M1 = a * x[1] ** 2 + b
        return np.array([
            x[2] / M1,
            x[3] / a,
            u[0],
            -2.0 * a * x[1] * x[2] ** 2 / M1 ** 2 + u[1],
        ])

    def h(x, u):
        return x[:2].copy()

    system = NonlinearSystem(name="prismatic-robot", n=4, m=2, p=2, f=f, h=h)

    def W(y, u):
        M1 = a * y[1] ** 2 + b
        return np.array([
            [0.0, 0.0, 1.0 / M1, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0 / a, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -4.0 * a * y[1] / M1 ** 2],
            [0.0, 0.0, u[0], 0.0, 0.0],
        ])

    def L(y, u):
        return np.array([0.0, 0.0, u[0], u[1], 0.0])

    imm = Immersion(
        n=4, ell=1,
        phi=lambda x: np.array([0.5 * x[2] ** 2]),
        grad_phi=lambda x: np.array([[0.0, 0.0, x[2], 0.0]]),
        W=W, L=L,
    )

    p = dict(params)
    controller = InputPolicy(
        kind="feedback",
        fn=lambda t, y, x_hat: pd_controller(y, x_hat[2:4], p),
    )

    # The scalar mixing stage only activates once the weakest regressor
    # direction has accumulated excitation comparable to f0/gamma_H; with
    # these gains that takes ~15 s, and the estimates lock in around 25 s.
    defaults = ScenarioDefaults(
        x0=np.zeros(4), xi0=np.array([1.0, 2.0, 3.0, 4.0, 5.0]),
        dt=1e-3, horizon=30.0,
        estimator="full", gamma_H=1.8, gamma_i=1100.0, f0=20.0, chi0=5.0,
        G0_value=1.0,
    )

    return Benchmark(
        bid="prismatic-robot",
        title="Two-DoF prismatic robot under certainty-equivalence PD control",
        system=system, immersion=imm, controller=controller,
        params=p, param_info=PRISMATIC_INFO,
        regression=LinearRegressionSpec(C=lambda u: _C_PRIS, nz=5),
        defaults=defaults,
        box_x=np.array([[-1.0, 1.0]] * 4),
        box_u=np.array([[-5.0, 5.0]] * 2),
        notes="Two measured outputs; the regressor contributes two rows per sample.",
    )


def build_leg(params: dict) -> Benchmark:
    m1, m2 = params["m1"], params["m2"]

    def f(x, u):
        return np.array([
            x[3] / m1,
            x[4] / (m1 * x[0] ** 2),
            x[5] / m2,
            x[4] ** 2 / (m1 * x[0] ** 3) + u[0],
            u[1],
            -u[1],
        ])

    def h(x, u):
        return np.array([x[0]])

    system = NonlinearSystem(name="robotic-leg", n=6, m=2, p=1, f=f, h=h)

    def W(y, u):
        q = y[0]
        Wm = np.zeros((7, 7))
        Wm[0, 3] = 1.0 / m1
        Wm[1, 4] = 1.0 / (m1 * q ** 2)
        Wm[2, 5] = 1.0 / m2
        Wm[3, 6] = 1.0 / (m1 * q ** 3)
        Wm[6, 4] = 2.0 * u[1]
        return Wm

    def L(y, u):
        return np.array([0.0, 0.0, 0.0, u[0], u[1], -u[1], 0.0])

    imm = Immersion(
        n=6, ell=1,
        phi=lambda x: np.array([x[4] ** 2]),
        grad_phi=lambda x: np.array([[0.0, 0.0, 0.0, 0.0, 2.0 * x[4], 0.0]]),
        W=W, L=L,
    )

    a1, a2, ph = params["u_amp1"], params["u_amp2"], params["u_phase"]
    controller = InputPolicy(
        kind="open-loop",
        fn=lambda t: np.array([a1 * np.sin(t + ph), a2 * np.cos(t + ph)]),
    )

    x0 = np.array([1.0, 0.0, 0.0, 0.3, 0.4, 0.1])
    theta = np.full(7, 0.1)
    z0 = np.concatenate([x0, [x0[4] ** 2]])
    defaults = ScenarioDefaults(
        x0=x0, xi0=z0 + theta, dt=1e-3, horizon=10.0,
        estimator="full", gamma_H=2.0, gamma_i=50.0, f0=10.0, chi0=1.0,
        G0_value=0.0,
    )

    return Benchmark(
        bid="robotic-leg",
        title="Three-DoF robotic leg with measured leg length",
        system=system, immersion=imm, controller=controller,
        params=dict(params), param_info=LEG_INFO,
        regression=LinearRegressionSpec(C=lambda u: _C_LEG, nz=7),
        defaults=defaults,
        box_x=np.array([[0.6, 2.0], [-1.0, 1.0], [-1.0, 1.0],
                        [-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]),
        box_u=np.array([[-2.0, 2.0], [-2.0, 2.0]]),
        notes="Leg length must stay positive; the default drive keeps it growing.",
    )
