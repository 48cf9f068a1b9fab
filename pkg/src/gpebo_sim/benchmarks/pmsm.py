"""Surface-mount PMSM in the two-phase frame, sensorless configuration.

States: flux pair (x1, x2), rotor angle x3, angular velocity x4.  Only the
current pair is measured,

    y_j = (x_j + lambda_m c_j(x3)) / L,   c = (cos(n_p x3), sin(n_p x3)),

so L y - x = lambda_m c and the flux circle (L y1 - x1)^2 + (L y2 - x2)^2
= lambda_m^2 holds along every trajectory.  Dynamics:

    dx_j/dt = -R y_j + u_j   (j = 1, 2; Faraday)
    dx3/dt  = x4
    dx4/dt  = -(f/J) x4 + (n_p/J)(y2 x1 - y1 x2) - tau_L / J

No extension is needed (z = x, n_z = 4).  Rows 1-2 of W vanish, so the
first two rows of Phi stay e1, e2 forever and x_j = xi_j - theta_j: the
observer reduces to the open-loop flux integrator dxi_j/dt = -R y_j + u_j.
The readout is trigonometric in x3, so instead of a non-separable
regression the flux-circle identity yields the 3-term separable one (see
regression.pmsm_nlpre), estimating (theta1, theta2) only.  The angle is
then reconstructed from the estimated flux; theta3, theta4 are not
identifiable from this regression, and the x4 estimate in traces keeps its
initial parameter guess (diagnostic only).

Plant parameter values are scenario configuration, not ground truth; every
acceptance check on this benchmark is invariant-based.
"""

from __future__ import annotations

import numpy as np

from ..immersion import Immersion
from ..regression import pmsm_angle, pmsm_gmap, pmsm_nlpre
from ..system import InputPolicy, NonlinearSystem
from .base import Benchmark, NlpreSpec, ScenarioDefaults

PARAMS = {
    "R": 1.5,
    "L": 0.009,
    "lambda_m": 0.15,
    "n_p": 3.0,
    "J": 0.008,
    "f": 0.001,
    "tau_L": 0.05,
    "u_amp": 4.0,
    "u_freq": 10.0,
}
PARAM_INFO = {
    "R": "stator resistance (Ohm)",
    "L": "stator inductance (H)",
    "lambda_m": "permanent-magnet flux magnitude (Wb)",
    "n_p": "pole pairs",
    "J": "rotor inertia (kg m^2)",
    "f": "viscous friction (N m s)",
    "tau_L": "constant load torque (N m), treated as known",
    "u_amp": "open-loop voltage amplitude (V)",
    "u_freq": "open-loop voltage angular frequency (rad/s)",
}


def build(params: dict) -> Benchmark:
    R, L, lam = params["R"], params["L"], params["lambda_m"]
    n_p, J, fric, tau_L = params["n_p"], params["J"], params["f"], params["tau_L"]

    def h(x, u):
        a = n_p * x[2]
        return np.array([(x[0] + lam * np.cos(a)) / L,
                         (x[1] + lam * np.sin(a)) / L])

    def f(x, u):
        y = h(x, u)
        return np.array([
            -R * y[0] + u[0],
            -R * y[1] + u[1],
            x[3],
            -(fric / J) * x[3] + (n_p / J) * (y[1] * x[0] - y[0] * x[1]) - tau_L / J,
        ])

    system = NonlinearSystem(name="pmsm", n=4, m=2, p=2, f=f, h=h)

    def W(y, u):
        return np.array([
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [n_p * y[1] / J, -n_p * y[0] / J, 0.0, -fric / J],
        ])

    def Lmap(y, u):
        return np.array([-R * y[0] + u[0], -R * y[1] + u[1], 0.0, -tau_L / J])

    imm = Immersion(
        n=4, ell=0,
        phi=lambda x: np.zeros(0),
        grad_phi=lambda x: np.zeros((0, 4)),
        W=W, L=Lmap,
    )

    amp, freq = params["u_amp"], params["u_freq"]
    controller = InputPolicy(
        kind="open-loop",
        fn=lambda t: np.array([amp * np.cos(freq * t), amp * np.sin(freq * t)]),
    )

    regression = NlpreSpec(
        builder=lambda t, y, u, xi, Phi: pmsm_nlpre(y, xi, L, lam, t=t),
        _gmap=pmsm_gmap(),
    )

    x0 = np.array([-lam, 0.0, 0.0, 0.0])        # zero current, rotor at rest
    theta = np.array([0.05, -0.04, 0.3, 0.2])
    defaults = ScenarioDefaults(
        x0=x0, xi0=x0 + theta, dt=1e-3, horizon=10.0,
        estimator="full", gamma_H=50.0, gamma_i=200.0, f0=2.0, chi0=5.0,
        G0_value=0.0,
    )

    theta_tail = theta[2:]

    def estimate_x(y, xi, Phi, theta_hat):
        """Flux from xi - theta, angle from the flux residual; x4 keeps the
        initial theta guesses (not identifiable from this regression)."""
        flux = xi[:2] - theta_hat[:2]
        ang = pmsm_angle(y, flux, L, int(n_p))
        theta_pad = np.concatenate([theta_hat[:2], theta_tail])
        x4 = xi[3] - Phi[3] @ theta_pad
        return np.array([flux[0], flux[1], ang, x4])

    span = 2.0 * np.pi / n_p

    def summary_error(x, x_hat):
        """Error over the recoverable components: flux pair and wrapped angle."""
        d_ang = (x_hat[2] - x[2] + span / 2.0) % span - span / 2.0
        return np.array([x_hat[0] - x[0], x_hat[1] - x[1], d_ang])

    return Benchmark(
        bid="pmsm",
        title="Sensorless PMSM flux observer",
        system=system, immersion=imm, controller=controller,
        params=dict(params), param_info=PARAM_INFO,
        regression=regression, defaults=defaults,
        box_x=np.array([[-0.3, 0.3], [-0.3, 0.3], [0.0, 2.0 * np.pi], [-50.0, 50.0]]),
        box_u=np.array([[-10.0, 10.0], [-10.0, 10.0]]),
        notes="ell = 0: no dynamic extension. Angle reported modulo 2*pi/n_p.",
        estimate_x=estimate_x,
        summary_error=summary_error,
    )
