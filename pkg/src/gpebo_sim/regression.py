"""Nonlinearly parameterized regressions for benchmarks with nonlinear readouts.

Both physical cases reduce to the separable form Y = psi * G(theta) with
measurable (Y, psi) and a fixed list of theta-monomials G.  Every sign and
ordering here is pinned by a brute-force identity test: draw random
(xi, Phi, theta), reconstruct the output through the plant's readout map,
and require Y - psi G(theta) = 0 to near machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "GMap",
    "SeparableNlpre",
    "linear_gmap",
    "maglev_gmap",
    "maglev_nlpre",
    "pmsm_angle",
    "pmsm_gmap",
    "pmsm_nlpre",
    "quad_expand",
]

# Ordered index pairs of the quadratic cross terms for theta in R^4.
_CROSS_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class GMap:
    """Descriptor of G: R^nz -> R^npsi as an ordered list of named entries.

    Each entry is a sum of monomials, stored as ((coeff, exponents), ...)
    with ``exponents`` a tuple of per-component powers of theta.  Evaluation
    order and names are frozen so that logged regressor columns stay
    comparable across runs.
    """

    names: tuple
    terms: tuple
    n_theta: int

    @property
    def n_psi(self) -> int:
        return len(self.terms)

    def __call__(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_theta,):
            raise ValueError(f"theta must have shape ({self.n_theta},), got {theta.shape}")
        out = np.empty(len(self.terms))
        for i, entry in enumerate(self.terms):
            acc = 0.0
            for coeff, exps in entry:
                acc += coeff * float(np.prod(theta ** np.asarray(exps)))
            out[i] = acc
        return out


def _unit_exp(n: int, i: int, power: int = 1) -> tuple:
    e = [0] * n
    e[i] = power
    return tuple(e)


def linear_gmap(nz: int) -> GMap:
    """G(theta) = theta, the trivial map used by linear-readout benchmarks."""
    names = tuple(f"th{i + 1}" for i in range(nz))
    terms = tuple(((1.0, _unit_exp(nz, i)),) for i in range(nz))
    return GMap(names=names, terms=terms, n_theta=nz)


def maglev_gmap() -> GMap:
    """The 14-entry map (theta, G0(theta)) of the levitation regression."""
    names = [f"th{i + 1}" for i in range(4)]
    terms = [((1.0, _unit_exp(4, i)),) for i in range(4)]
    names += [f"th{i + 1}*th{i + 1}" for i in range(4)]
    terms += [((1.0, _unit_exp(4, i, 2)),) for i in range(4)]
    for i, j in _CROSS_PAIRS:
        names.append(f"th{i + 1}*th{j + 1}")
        e = [0] * 4
        e[i] = e[j] = 1
        terms.append(((1.0, tuple(e)),))
    return GMap(names=tuple(names), terms=tuple(terms), n_theta=4)


def pmsm_gmap() -> GMap:
    """The 3-entry map (theta1, theta2, theta1^2 + theta2^2)."""
    return GMap(
        names=("th1", "th2", "th1*th1+th2*th2"),
        terms=(
            ((1.0, (1, 0)),),
            ((1.0, (0, 1)),),
            ((1.0, (2, 0)), (1.0, (0, 2))),
        ),
        n_theta=2,
    )


@dataclass(frozen=True)
class SeparableNlpre:
    """One separable regression sample: Y = psi * G(theta)."""

    t: float
    Y: np.ndarray          # shape (p,)
    psi: np.ndarray        # shape (p, n_psi)
    gmap: GMap


def quad_expand(Phi1: np.ndarray, Phi2: np.ndarray) -> np.ndarray:
    """The 10-entry vector psi0 with psi0^T G0(theta) = Phi1^T theta theta^T Phi2.

    Ordering: the four 'diagonal' products Phi1_i Phi2_i (against theta_i^2),
    then the six symmetrized cross products Phi1_i Phi2_j + Phi1_j Phi2_i
    against theta_i theta_j for (i, j) = (1,2), (1,3), (1,4), (2,3), (2,4),
    (3,4).
    """
    Phi1 = np.asarray(Phi1, dtype=float)
    Phi2 = np.asarray(Phi2, dtype=float)
    if Phi1.shape != (4,) or Phi2.shape != (4,):
        raise ValueError("quad_expand expects two length-4 vectors")
    out = np.empty(10)
    out[:4] = Phi1 * Phi2
    for k, (i, j) in enumerate(_CROSS_PAIRS):
        out[4 + k] = Phi1[i] * Phi2[j] + Phi1[j] * Phi2[i]
    return out


def maglev_nlpre(y: float, xi: np.ndarray, Phi: np.ndarray, k: float,
                 t: float = 0.0) -> SeparableNlpre:
    """14-term separable regression of the magnetic levitation readout.

    From x1 = xi1 - Phi1^T theta, x2 = xi2 - Phi2^T theta and
    k y = (1 - x2) x1:

        k y - xi1 + xi1 xi2 = [(xi2 - 1) Phi1 + xi1 Phi2]^T theta
                              - Phi1^T theta theta^T Phi2,

    with the bilinear term expanded through quad_expand.  Phi1, Phi2 are the
    first two rows of Phi.
    """
    if k <= 0.0:
        raise ValueError(f"flux constant k must be positive, got {k}")
    xi = np.asarray(xi, dtype=float)
    Phi = np.asarray(Phi, dtype=float)
    Phi1, Phi2 = Phi[0], Phi[1]
    Y = np.array([k * float(y) - xi[0] + xi[0] * xi[1]])
    psi = np.empty((1, 14))
    psi[0, :4] = (xi[1] - 1.0) * Phi1 + xi[0] * Phi2
    psi[0, 4:] = -quad_expand(Phi1, Phi2)
    return SeparableNlpre(t=float(t), Y=Y, psi=psi, gmap=maglev_gmap())


def pmsm_nlpre(y: np.ndarray, xi: np.ndarray, L: float, lambda_m: float,
               t: float = 0.0) -> SeparableNlpre:
    """3-term separable regression from the motor's flux-circle identity.

    With x_j = xi_j - theta_j and (L y1 - x1)^2 + (L y2 - x2)^2 = lambda_m^2,
    expanding (L y_j - xi_j + theta_j)^2 gives

        (L y1 - xi1)^2 + (L y2 - xi2)^2 - lambda_m^2
            = 2 (xi1 - L y1) theta1 + 2 (xi2 - L y2) theta2
              - (theta1^2 + theta2^2),

    i.e. psi = [2(xi1 - L y1), 2(xi2 - L y2), -1] against
    G = (theta1, theta2, theta1^2 + theta2^2).  Only the first two observer
    states enter; the fundamental matrix is not needed.
    """
    if L <= 0.0 or lambda_m <= 0.0:
        raise ValueError("inductance and flux magnitude must be positive")
    y = np.asarray(y, dtype=float)
    xi = np.asarray(xi, dtype=float)
    e1 = L * y[0] - xi[0]
    e2 = L * y[1] - xi[1]
    Y = np.array([e1 * e1 + e2 * e2 - lambda_m * lambda_m])
    psi = np.array([[-2.0 * e1, -2.0 * e2, -1.0]])
    return SeparableNlpre(t=float(t), Y=Y, psi=psi, gmap=pmsm_gmap())


def pmsm_angle(y: np.ndarray, flux_hat: np.ndarray, L: float,
               n_p: int) -> float:
    """Rotor angle from the estimated flux, in [0, 2*pi/n_p).

    x3 = (1/n_p) atan2(L y2 - x2_hat, L y1 - x1_hat); the residual vector
    L y - flux_hat has magnitude lambda_m on the flux circle, so a vanishing
    residual means the angle is undefined.
    """
    y = np.asarray(y, dtype=float)
    flux_hat = np.asarray(flux_hat, dtype=float)
    c = L * y[0] - flux_hat[0]
    s = L * y[1] - flux_hat[1]
    if c == 0.0 and s == 0.0:
        raise ValueError("undefined angle: L*y - flux_hat is the zero vector")
    ang = np.arctan2(s, c) / n_p
    span = 2.0 * np.pi / n_p
    return float(ang % span)
