"""GPEBO dynamic extension, state parameterization and excitation diagnostics.

The observer runs a copy system xi and a fundamental matrix Phi,

    dxi/dt  = W(t) xi + L(t),
    dPhi/dt = W(t) Phi,      Phi(0) = I,

so that z(t) = xi(t) - Phi(t) theta with the constant theta = xi(0) - z(0).
State observation is thereby reduced to estimating theta.  With a linear
readout y = C(u) x the samples (Y, psi) = (C xi - y, C Phi) satisfy the
linear regression Y = psi theta exactly on noise-free data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .immersion import Immersion
from .linalg import DivergenceError

__all__ = [
    "GpeboState",
    "LreSample",
    "build_lre",
    "excitation_grammian",
    "gpebo_step",
    "parameterize_state",
    "rank_identifiable",
]

# Any state entry beyond this magnitude aborts a run: with an unstable W the
# observer trajectories grow unbounded and there is no finite-time fix here.
DIVERGENCE_BOUND = 1e9


@dataclass(frozen=True)
class GpeboState:
    """Observer snapshot: copy state xi, fundamental matrix Phi, time t."""

    xi: np.ndarray
    Phi: np.ndarray
    t: float

    @staticmethod
    def initial(xi0: np.ndarray, t: float = 0.0) -> "GpeboState":
        xi0 = np.asarray(xi0, dtype=float)
        return GpeboState(xi=xi0.copy(), Phi=np.eye(xi0.size), t=float(t))


@dataclass(frozen=True)
class LreSample:
    """One time-stamped linear-regression pair, Y = psi theta."""

    t: float
    Y: np.ndarray          # shape (p,)
    psi: np.ndarray        # shape (p, nz)


def gpebo_step(imm: Immersion, st: GpeboState, y: np.ndarray, u: np.ndarray,
               dt: float) -> GpeboState:
    """Advance (xi, Phi) by one RK4 step with W, L frozen at (y, u).

    xi and Phi share the stage arithmetic (one matrix RK4 on [xi | Phi]),
    which keeps the parameterization z = xi - Phi theta exact under the
    discrete map as well: both evolve by the same affine step.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    W = imm.W(y, u)
    L = imm.L(y, u)
    nz = st.xi.size
    # Columns: [xi | Phi]; drift only acts on the xi column.
    M = np.empty((nz, nz + 1))
    M[:, 0] = st.xi
    M[:, 1:] = st.Phi
    drift = np.zeros((nz, nz + 1))
    drift[:, 0] = L
    k1 = W @ M + drift
    k2 = W @ (M + 0.5 * dt * k1) + drift
    k3 = W @ (M + 0.5 * dt * k2) + drift
    k4 = W @ (M + dt * k3) + drift
    M = M + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(M)) or np.max(np.abs(M)) > DIVERGENCE_BOUND:
        raise DivergenceError("observer divergence", st.t + dt)
    return GpeboState(xi=M[:, 0].copy(), Phi=M[:, 1:].copy(), t=st.t + dt)


def parameterize_state(xi: np.ndarray, Phi: np.ndarray, theta: np.ndarray,
                       D: np.ndarray) -> np.ndarray:
    """Recover x from the observer via x = D (xi - Phi theta)."""
    return D @ (np.asarray(xi, dtype=float) - np.asarray(Phi, dtype=float)
                @ np.asarray(theta, dtype=float))


def build_lre(C: Callable[[np.ndarray], np.ndarray], y: np.ndarray,
              u: np.ndarray, st: GpeboState) -> LreSample:
    """Form the sample (Y, psi) = (C(u) xi - y, C(u) Phi).

    Orientation: z = xi - Phi theta and y = C z give C xi - y = C Phi theta,
    so Y = psi theta holds with Y := C xi - y.
    """
    Cm = np.atleast_2d(np.asarray(C(u), dtype=float))
    Y = Cm @ st.xi - np.atleast_1d(np.asarray(y, dtype=float))
    return LreSample(t=st.t, Y=Y, psi=Cm @ st.Phi)


def excitation_grammian(samples: Sequence[LreSample]) -> np.ndarray:
    """Trapezoidal approximation of the excitation integral int psi^T psi dt.

    For a linear readout this equals the observability Grammian of the
    time-varying pair (W(t), C(t)); a minimum eigenvalue above threshold is
    the interval-excitation certificate for parameter convergence.
    """
    if len(samples) < 2:
        raise ValueError("need at least 2 samples for a quadrature")
    nz = samples[0].psi.shape[1]
    G = np.zeros((nz, nz))
    prev = samples[0]
    prev_q = prev.psi.T @ prev.psi
    for s in samples[1:]:
        q = s.psi.T @ s.psi
        G += 0.5 * (s.t - prev.t) * (prev_q + q)
        prev, prev_q = s, q
    return 0.5 * (G + G.T)


def rank_identifiable(samples: Sequence[LreSample], nz: int,
                      tol: float = 1e-8) -> bool:
    """Numerical-rank identifiability of the stacked regressor rows.

    True iff the matrix of all psi rows has rank nz with singular values
    judged against tol * sigma_max.  Multi-output samples contribute one row
    per output component.
    """
    rows = np.vstack([s.psi for s in samples])
    if rows.shape[0] < nz:
        return False
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv[0] == 0.0:
        return False
    return int(np.sum(sv > tol * sv[0])) >= nz
