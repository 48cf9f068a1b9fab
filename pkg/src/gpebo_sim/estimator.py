"""Least-squares + DREM parameter estimator with forgetting factor.

Published form (state G_hat, F, zeta, theta_hat):

    dG_hat/dt   = gamma_G F psi^T (Y - psi G_hat),      G_hat(0) = G0
    dF/dt       = -gamma_H F psi^T psi F + chi F,       F(0) = (1/f0) I
    dtheta_i/dt = gamma_i Delta (Yv_i - Delta theta_i)
    dzeta/dt    = -chi zeta,                            zeta(0) = 1
    chi         = chi0 (1 - ||F||_F / k)

with the mixed signals Delta = det(I - zeta f0 F) and
Yv = adj(I - zeta f0 F)(G_hat - zeta f0 F G0).  On noise-free data the
scheme satisfies Yv = Delta * G(theta) identically, which is what turns the
vector regression into n_psi independent scalar ones.

Internally the step integrates the information form

    P = F^-1,  w = P G_hat - zeta f0 G0,

whose dynamics (for gamma_G = gamma_H) are dP/dt = gamma psi^T psi - chi P
and dw/dt = gamma psi^T Y - chi w.  The mixing identity is then a *linear*
invariant of the integrated state, so one RK4 step preserves it to roundoff
for any gains and step size; integrating the published F-form directly lets
it drift at the 1e-4 level for stiff gains, which would void the identity
as a diagnostic.  Snapshots still expose (G_hat, F, zeta, theta_hat).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .linalg import adjugate, determinant

__all__ = [
    "DremSignals",
    "EstimatorError",
    "LsDremGains",
    "LsDremState",
    "drem_mix",
    "gradient_baseline_step",
    "lsdrem_init",
    "lsdrem_step",
]

_PD_CHECK_EVERY = 100   # Cholesky positive-definiteness guard cadence, steps


class EstimatorError(RuntimeError):
    """Numerical failure of the estimator (gain matrix lost definiteness)."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t={t:.6g}")
        self.t = float(t)


@dataclass(frozen=True)
class LsDremGains:
    """Tuning gains.  gamma_G defaults to gamma_H: the mixing construction

    Yv = Delta * G(theta) rests on the gain-matrix and update equations
    sharing one rate (it makes F^-1 (G_hat - G) decay exactly with zeta),
    so an independent gamma_G is available but off by default.
    k_bound defaults to max(1/f0, ||F(0)||_F), resolved once the regressor
    dimension is known.
    """

    gamma_H: float
    gamma_i: float | np.ndarray
    f0: float
    chi0: float
    gamma_G: Optional[float] = None
    k_bound: Optional[float] = None

    def __post_init__(self):
        for name in ("gamma_H", "f0", "chi0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if np.any(np.asarray(self.gamma_i, dtype=float) <= 0.0):
            raise ValueError("gamma_i must be positive")
        if self.gamma_G is not None and self.gamma_G <= 0.0:
            raise ValueError("gamma_G must be positive")
        if self.k_bound is not None and self.k_bound < 1.0 / self.f0 - 1e-12:
            raise ValueError(f"k_bound must be >= 1/f0 = {1.0 / self.f0}")

    def resolved_k(self, n_psi: int) -> float:
        if self.k_bound is not None:
            return float(self.k_bound)
        return max(1.0 / self.f0, np.sqrt(n_psi) / self.f0)

    def resolved_gamma_G(self) -> float:
        return float(self.gamma_H if self.gamma_G is None else self.gamma_G)

    def gamma_i_vector(self, nz: int) -> np.ndarray:
        g = np.asarray(self.gamma_i, dtype=float)
        return np.full(nz, float(g)) if g.ndim == 0 else g.reshape(nz)


@dataclass(frozen=True)
class LsDremState:
    """Immutable estimator snapshot.

    G_hat, F, zeta, theta_hat are the published coordinates; w_info and
    P_info carry the integrated information form between steps.
    """

    t: float
    G_hat: np.ndarray
    F: np.ndarray
    zeta: float
    theta_hat: np.ndarray
    w_info: np.ndarray
    P_info: np.ndarray
    G0: np.ndarray
    ls_only: bool = False
    steps: int = 0

    @property
    def n_psi(self) -> int:
        return self.G_hat.size


@dataclass(frozen=True)
class DremSignals:
    """The mixed scalar-regression signals (Delta, Yv)."""

    Delta: float
    Yvec: np.ndarray


def lsdrem_init(G0: np.ndarray, theta0: np.ndarray, gains: LsDremGains,
                ls_only: bool = False) -> LsDremState:
    """Initial state: G_hat = G0, F = (1/f0) I, zeta = 1, theta_hat = theta0.

    With ``ls_only`` the per-parameter scalar updates are bypassed and
    theta_hat reads back the first nz entries of G_hat; zeta stays
    integrated so the mixed signals remain defined as diagnostics.
    """
    G0 = np.asarray(G0, dtype=float).copy()
    theta0 = np.asarray(theta0, dtype=float).copy()
    n_psi = G0.size
    f0 = gains.f0
    F = np.eye(n_psi) / f0
    P = np.eye(n_psi) * f0
    w = np.zeros(n_psi)              # P G0 - 1 * f0 G0 = 0
    theta_hat = G0[: theta0.size].copy() if ls_only else theta0
    return LsDremState(t=0.0, G_hat=G0.copy(), F=F, zeta=1.0,
                       theta_hat=theta_hat, w_info=w, P_info=P, G0=G0,
                       ls_only=ls_only)


def _stage_rates(w, P, zeta, theta, *, A, bw, cross, G0, f0, chi0, k,
                 gamma_vec, ls_only):
    """Time derivatives of the information-form state at one RK4 stage."""
    Finv = np.linalg.inv(P)
    Finv = 0.5 * (Finv + Finv.T)
    chi = chi0 * (1.0 - np.linalg.norm(Finv) / k)
    dP = A - chi * P
    dw = bw - chi * w
    G_hat = None
    if cross is not None:
        G_hat = Finv @ (w + zeta * f0 * G0)
        dw = dw + cross @ G_hat
    dzeta = -chi * zeta
    if ls_only:
        return dw, dP, dzeta, np.zeros_like(theta), chi
    if G_hat is None:
        G_hat = Finv @ (w + zeta * f0 * G0)
    M = np.eye(P.shape[0]) - zeta * f0 * Finv
    Delta = np.linalg.det(M)
    Yv = adjugate(M) @ (G_hat - zeta * f0 * (Finv @ G0))
    nz = theta.size
    dtheta = gamma_vec * Delta * (Yv[:nz] - Delta * theta)
    return dw, dP, dzeta, dtheta, chi


def lsdrem_step(st: LsDremState, sample, gains: LsDremGains,
                dt: float) -> LsDremState:
    """Advance the estimator by one RK4 step with (Y, psi) held constant.

    ``sample`` is anything with fields Y (p,) and psi (p, n_psi); both the
    linear-regression and the separable nonlinear samples qualify.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    Y = np.atleast_1d(np.asarray(sample.Y, dtype=float))
    psi = np.atleast_2d(np.asarray(sample.psi, dtype=float))
    n_psi = st.n_psi
    if psi.shape[1] != n_psi:
        raise ValueError(f"regressor has {psi.shape[1]} columns, state expects {n_psi}")

    gamma_H = gains.gamma_H
    gamma_G = gains.resolved_gamma_G()
    f0 = gains.f0
    k = gains.resolved_k(n_psi)
    gamma_vec = gains.gamma_i_vector(st.theta_hat.size)
    A = gamma_H * (psi.T @ psi)
    bw = gamma_G * (psi.T @ Y)
    cross = None if gamma_G == gamma_H else (gamma_H - gamma_G) * (psi.T @ psi)
    kw = dict(A=A, bw=bw, cross=cross, G0=st.G0, f0=f0, chi0=gains.chi0,
              k=k, gamma_vec=gamma_vec, ls_only=st.ls_only)

    w, P, zeta, theta = st.w_info, st.P_info, st.zeta, st.theta_hat
    try:
        k1 = _stage_rates(w, P, zeta, theta, **kw)
        h = 0.5 * dt
        k2 = _stage_rates(w + h * k1[0], P + h * k1[1], zeta + h * k1[2],
                          theta + h * k1[3], **kw)
        k3 = _stage_rates(w + h * k2[0], P + h * k2[1], zeta + h * k2[2],
                          theta + h * k2[3], **kw)
        k4 = _stage_rates(w + dt * k3[0], P + dt * k3[1], zeta + dt * k3[2],
                          theta + dt * k3[3], **kw)
    except np.linalg.LinAlgError as exc:
        raise EstimatorError(f"gain update failed ({exc})", st.t) from exc

    c = dt / 6.0
    w_n = w + c * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    P_n = P + c * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    P_n = 0.5 * (P_n + P_n.T)
    zeta_n = zeta + c * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    theta_n = theta + c * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    t_n = st.t + dt
    steps = st.steps + 1

    if not (np.all(np.isfinite(P_n)) and np.all(np.isfinite(w_n))
            and np.isfinite(zeta_n) and np.all(np.isfinite(theta_n))):
        raise EstimatorError("estimator state became non-finite", t_n)
    if steps % _PD_CHECK_EVERY == 0:
        try:
            np.linalg.cholesky(P_n)
        except np.linalg.LinAlgError as exc:
            raise EstimatorError("gain matrix lost positive definiteness", t_n) from exc

    try:
        F_n = np.linalg.inv(P_n)
    except np.linalg.LinAlgError as exc:
        raise EstimatorError("gain matrix became singular", t_n) from exc
    F_n = 0.5 * (F_n + F_n.T)
    G_n = F_n @ (w_n + zeta_n * f0 * st.G0)
    if st.ls_only:
        theta_n = G_n[: st.theta_hat.size].copy()
    return replace(st, t=t_n, G_hat=G_n, F=F_n, zeta=float(zeta_n),
                   theta_hat=theta_n, w_info=w_n, P_info=P_n, steps=steps)


def drem_mix(st: LsDremState, G0: np.ndarray, f0: float) -> DremSignals:
    """Mixed signals from the current state:

    Delta = det(I - zeta f0 F),
    Yv    = adj(I - zeta f0 F) (G_hat - zeta f0 F G0).

    At t = 0 the argument matrix vanishes identically, so Delta = 0 and
    (for n_psi >= 2) Yv = 0: the scalar updates start out frozen.
    """
    G0 = np.asarray(G0, dtype=float)
    M = np.eye(st.n_psi) - st.zeta * f0 * st.F
    Delta = determinant(M)
    Yv = adjugate(M) @ (st.G_hat - st.zeta * f0 * (st.F @ G0))
    return DremSignals(Delta=Delta, Yvec=Yv)


def chi_value(st: LsDremState, gains: LsDremGains) -> float:
    """Current forgetting coefficient chi = chi0 (1 - ||F||_F / k)."""
    k = gains.resolved_k(st.n_psi)
    return gains.chi0 * (1.0 - np.linalg.norm(st.F) / k)


def gradient_baseline_step(theta_hat: np.ndarray, sample, gamma: float,
                           dt: float) -> np.ndarray:
    """Plain gradient estimator baseline: one explicit-Euler step of
    dtheta/dt = gamma psi^T (Y - psi theta)."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    theta_hat = np.asarray(theta_hat, dtype=float)
    Y = np.atleast_1d(np.asarray(sample.Y, dtype=float))
    psi = np.atleast_2d(np.asarray(sample.psi, dtype=float))
    return theta_hat + dt * gamma * (psi.T @ (Y - psi @ theta_hat))
