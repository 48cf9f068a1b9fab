"""Closed-loop scenario runner: plant, observer, estimator, controller.

One scenario step at time t_k:

  1. read y_k, form the state estimate x_hat = D(xi - Phi theta_hat),
  2. evaluate the input policy (zero-order hold over the step),
  3. record the output row,
  4. build the regression sample (Y_k, psi_k) and advance the estimator
     with the sample held constant (sample-and-hold coupling),
  5. advance (x, xi, Phi) jointly by one RK4 step: the observer stages see
     y evaluated from the plant's stage values, which keeps the identity
     z = xi - Phi theta at integrator accuracy instead of O(dt).

Everything is fixed-step and seed-free on the default path, so re-running a
scenario reproduces its traces bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .benchmarks import Benchmark, make_benchmark
from .estimator import (
    EstimatorError,
    LsDremGains,
    LsDremState,
    chi_value,
    drem_mix,
    gradient_baseline_step,
    lsdrem_init,
    lsdrem_step,
)
from .gpebo import DIVERGENCE_BOUND, LreSample, excitation_grammian, rank_identifiable
from .immersion import lift, residual_scan, selector
from .linalg import DivergenceError

__all__ = [
    "RunResult",
    "Scenario",
    "ScenarioError",
    "identity_errors",
    "mixing_residuals",
    "regression_residuals",
    "run_scenario",
    "scenario_from_dict",
    "verify_immersion",
    "write_traces",
]

ESTIMATOR_MODES = ("full", "ls-only", "gradient")

# Exit-code contract shared by the CLI and the service.
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DIVERGED = 3
EXIT_ESTIMATOR = 4

_STATUS_EXIT = {"ok": EXIT_OK, "diverged": EXIT_DIVERGED, "estimator-failure": EXIT_ESTIMATOR}


class ScenarioError(ValueError):
    """The scenario failed validation before any simulation ran."""


@dataclass
class Scenario:
    """Run request.  Fields left as None fall back to benchmark defaults."""

    benchmark: str
    overrides: dict = field(default_factory=dict)
    x0: Optional[list] = None
    xi0: Optional[list] = None
    dt: Optional[float] = None
    horizon: Optional[float] = None
    estimator: Optional[str] = None          # full | ls-only | gradient
    gamma_H: Optional[float] = None
    gamma_i: Optional[float] = None
    f0: Optional[float] = None
    chi0: Optional[float] = None
    gamma_G: Optional[float] = None
    k_bound: Optional[float] = None
    G0: Optional[list] = None                # scalar broadcast or full vector
    theta0: Optional[list] = None
    gradient_gamma: Optional[float] = None
    out_every: int = 1
    seed: int = 0                            # reserved for randomized inputs
    theta_tol: float = 1e-2
    state_tol: float = 1e-2


def scenario_from_dict(data: dict) -> Scenario:
    known = set(Scenario.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"unknown scenario fields: {sorted(unknown)}")
    if "benchmark" not in data:
        raise ScenarioError("scenario must name a benchmark")
    return Scenario(**data)


def scenario_from_file(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must contain a JSON object")
    return scenario_from_dict(data)


@dataclass
class ResolvedScenario:
    """Scenario with every field made concrete against the benchmark."""

    bench: Benchmark
    x0: np.ndarray
    xi0: np.ndarray
    dt: float
    horizon: float
    n_steps: int
    estimator: str
    gains: LsDremGains
    G0: np.ndarray
    theta0: np.ndarray
    gradient_gamma: float
    out_every: int
    seed: int
    theta_tol: float
    state_tol: float
    theta_true: np.ndarray


def resolve_scenario(sc: Scenario) -> ResolvedScenario:
    try:
        bench = make_benchmark(sc.benchmark, sc.overrides)
    except KeyError as exc:
        raise ScenarioError(str(exc)) from exc
    d = bench.defaults

    x0 = np.asarray(sc.x0 if sc.x0 is not None else d.x0, dtype=float)
    xi0 = np.asarray(sc.xi0 if sc.xi0 is not None else d.xi0, dtype=float)
    if x0.shape != (bench.n,):
        raise ScenarioError(f"x0 must have length {bench.n}, got {x0.shape}")
    if xi0.shape != (bench.nz,):
        raise ScenarioError(f"xi0 must have length {bench.nz}, got {xi0.shape}")

    dt = float(sc.dt if sc.dt is not None else d.dt)
    horizon = float(sc.horizon if sc.horizon is not None else d.horizon)
    if dt <= 0.0:
        raise ScenarioError(f"dt must be positive, got {dt}")
    if horizon < dt:
        raise ScenarioError(f"horizon must be at least dt, got {horizon} < {dt}")
    n_steps = int(round(horizon / dt))
    horizon = n_steps * dt

    mode = sc.estimator if sc.estimator is not None else d.estimator
    if mode not in ESTIMATOR_MODES:
        raise ScenarioError(f"unknown estimator mode {mode!r}; expected one of {ESTIMATOR_MODES}")

    n_psi = bench.regression.n_psi
    n_est = bench.n_est
    if sc.G0 is None:
        G0 = np.full(n_psi, d.G0_value)
    else:
        G0 = np.asarray(sc.G0, dtype=float)
        if G0.ndim == 0:
            G0 = np.full(n_psi, float(G0))
        elif G0.shape != (n_psi,):
            raise ScenarioError(f"G0 must be a scalar or length-{n_psi} vector")
    if sc.theta0 is None:
        theta0 = G0[:n_est].copy()
    else:
        theta0 = np.asarray(sc.theta0, dtype=float)
        if theta0.shape != (n_est,):
            raise ScenarioError(f"theta0 must have length {n_est}")

    try:
        gains = LsDremGains(
            gamma_H=float(sc.gamma_H if sc.gamma_H is not None else d.gamma_H),
            gamma_i=float(sc.gamma_i if sc.gamma_i is not None else d.gamma_i),
            f0=float(sc.f0 if sc.f0 is not None else d.f0),
            chi0=float(sc.chi0 if sc.chi0 is not None else d.chi0),
            gamma_G=None if sc.gamma_G is None else float(sc.gamma_G),
            k_bound=None if sc.k_bound is None else float(sc.k_bound),
        )
    except ValueError as exc:
        raise ScenarioError(f"invalid gains: {exc}") from exc

    if sc.out_every < 1:
        raise ScenarioError("out_every must be a positive integer")

    theta_true = xi0 - lift(bench.immersion, x0)
    return ResolvedScenario(
        bench=bench, x0=x0, xi0=xi0, dt=dt, horizon=horizon, n_steps=n_steps,
        estimator=mode, gains=gains, G0=G0, theta0=theta0,
        gradient_gamma=float(sc.gradient_gamma if sc.gradient_gamma is not None
                             else d.gradient_gamma),
        out_every=int(sc.out_every), seed=int(sc.seed),
        theta_tol=float(sc.theta_tol), state_tol=float(sc.state_tol),
        theta_true=theta_true,
    )


@dataclass
class RunResult:
    """Recorded trajectories plus the derived summary."""

    resolved: ResolvedScenario
    frames: dict
    status: str               # ok | diverged | estimator-failure
    t_fail: Optional[float]
    summary: dict

    @property
    def exit_code(self) -> int:
        return _STATUS_EXIT[self.status]


def _joint_rk4(bench: Benchmark, x, xi, Phi, u, dt):
    """One RK4 step of the coupled (x, xi, Phi) system with u held.

    The observer coefficients are evaluated at the plant's stage values of
    y, so both sides discretize the same time-varying lifted dynamics.
    """
    f, h = bench.system.f, bench.system.h
    W, L = bench.immersion.W, bench.immersion.L

    def stage(xs, xis, Phis):
        y = h(xs, u)
        Wm = W(y, u)
        return f(xs, u), Wm @ xis + L(y, u), Wm @ Phis

    k1 = stage(x, xi, Phi)
    k2 = stage(x + 0.5 * dt * k1[0], xi + 0.5 * dt * k1[1], Phi + 0.5 * dt * k1[2])
    k3 = stage(x + 0.5 * dt * k2[0], xi + 0.5 * dt * k2[1], Phi + 0.5 * dt * k2[2])
    k4 = stage(x + dt * k3[0], xi + dt * k3[1], Phi + dt * k3[2])
    c = dt / 6.0
    return (x + c * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            xi + c * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            Phi + c * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]))


def run_scenario(sc: Scenario) -> RunResult:
    """Co-simulate a scenario.  Divergence and estimator failures do not
    raise; they mark the result status and truncate the traces at the
    failing timestamp."""
    rs = resolve_scenario(sc)
    bench = rs.bench
    n, nz, p = bench.n, bench.nz, bench.system.p
    n_psi, n_est = bench.regression.n_psi, bench.n_est
    D = selector(n, nz)
    if bench.estimate_x is None and n_est != nz:
        raise ScenarioError(f"benchmark {bench.bid} estimates {n_est} of {nz} "
                            "parameters but provides no state reconstruction hook")

    mode = rs.estimator
    est_state: Optional[LsDremState] = None
    theta_g: Optional[np.ndarray] = None
    if mode in ("full", "ls-only"):
        est_state = lsdrem_init(rs.G0, rs.theta0, rs.gains, ls_only=(mode == "ls-only"))
    else:
        theta_g = rs.G0.copy()

    x, xi, Phi = rs.x0.copy(), rs.xi0.copy(), np.eye(nz)
    u = np.zeros(bench.system.m)
    dt, n_steps, out_every = rs.dt, rs.n_steps, rs.out_every

    n_rows = n_steps // out_every + 1
    rows = {
        "t": np.zeros(n_rows),
        "x": np.zeros((n_rows, n)),
        "x_hat": np.zeros((n_rows, n)),
        "u": np.zeros((n_rows, bench.system.m)),
        "xi": np.zeros((n_rows, nz)),
        "Phi": np.zeros((n_rows, nz, nz)),
        "theta_hat": np.zeros((n_rows, n_est)),
        "G_hat": np.zeros((n_rows, n_psi)),
        "F": np.zeros((n_rows, n_psi, n_psi)),
        "zeta": np.zeros(n_rows),
        "chi": np.zeros(n_rows),
        "Delta": np.zeros(n_rows),
        "F_norm": np.zeros(n_rows),
        "Y": np.zeros((n_rows, p)),
        "psi": np.zeros((n_rows, p, n_psi)),
    }

    def current_theta():
        return est_state.theta_hat if est_state is not None else theta_g[:n_est]

    def estimate(y):
        th = current_theta()
        if bench.estimate_x is not None:
            return np.asarray(bench.estimate_x(y, xi, Phi, th), dtype=float)
        return D @ (xi - Phi @ th)

    status, t_fail = "ok", None
    row = 0
    k = 0
    while True:
        t = k * dt
        y = np.atleast_1d(np.asarray(bench.system.h(x, u), dtype=float))
        x_hat = estimate(y)
        u = bench.controller(t, y, x_hat)
        sample = bench.regression.sample(t, y, u, xi, Phi)

        if k % out_every == 0:
            i = row
            rows["t"][i] = t
            rows["x"][i] = x
            rows["x_hat"][i] = x_hat
            rows["u"][i] = u
            rows["xi"][i] = xi
            rows["Phi"][i] = Phi
            rows["theta_hat"][i] = current_theta()
            rows["Y"][i] = sample.Y
            rows["psi"][i] = sample.psi
            if est_state is not None:
                rows["G_hat"][i] = est_state.G_hat
                rows["F"][i] = est_state.F
                rows["zeta"][i] = est_state.zeta
                rows["chi"][i] = chi_value(est_state, rs.gains)
                rows["F_norm"][i] = np.linalg.norm(est_state.F)
                mix = drem_mix(est_state, rs.G0, rs.gains.f0)
                rows["Delta"][i] = mix.Delta
            else:
                rows["zeta"][i] = 1.0
            row += 1

        if k >= n_steps:
            break
        try:
            if est_state is not None:
                est_state = lsdrem_step(est_state, sample, rs.gains, dt)
            else:
                theta_g = gradient_baseline_step(theta_g, sample, rs.gradient_gamma, dt)
            x, xi, Phi = _joint_rk4(bench, x, xi, Phi, u, dt)
            if (not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))
                     and np.all(np.isfinite(Phi)))
                    or max(np.max(np.abs(x)), np.max(np.abs(xi)),
                           np.max(np.abs(Phi))) > DIVERGENCE_BOUND):
                raise DivergenceError("trajectory divergence", (k + 1) * dt)
        except DivergenceError as exc:
            status, t_fail = "diverged", exc.t
            break
        except EstimatorError as exc:
            status, t_fail = "estimator-failure", exc.t
            break
        k += 1

    frames = {key: val[:row] for key, val in rows.items()}
    summary = _summarize(rs, frames, status, t_fail)
    return RunResult(resolved=rs, frames=frames, status=status, t_fail=t_fail,
                     summary=summary)


def _time_to_threshold(t: np.ndarray, err: np.ndarray, tol: float):
    """Earliest recorded time from which the error stays at or below tol."""
    below = err <= tol
    if not below.any() or not below[-1]:
        return None
    idx = len(below) - 1
    while idx > 0 and below[idx - 1]:
        idx -= 1
    return float(t[idx])


def _summarize(rs: ResolvedScenario, frames: dict, status: str,
               t_fail) -> dict:
    bench = rs.bench
    t = frames["t"]
    theta_true = rs.theta_true[: bench.n_est]
    theta_err = np.linalg.norm(frames["theta_hat"] - theta_true, axis=1)
    if bench.summary_error is not None:
        state_err = np.array([
            np.linalg.norm(bench.summary_error(xr, xh))
            for xr, xh in zip(frames["x"], frames["x_hat"])
        ])
    else:
        state_err = np.linalg.norm(frames["x_hat"] - frames["x"], axis=1)

    samples = [LreSample(t=float(ti), Y=Yi, psi=Pi)
               for ti, Yi, Pi in zip(t, frames["Y"], frames["psi"])]
    if len(samples) >= 2:
        gram = excitation_grammian(samples)
        min_eig = float(np.min(np.linalg.eigvalsh(gram)))
        rank_ok = rank_identifiable(samples, bench.regression.n_psi)
    else:
        min_eig, rank_ok = 0.0, False

    summary = {
        "benchmark": bench.bid,
        "estimator": rs.estimator,
        "dt": rs.dt,
        "horizon": rs.horizon,
        "n_steps": rs.n_steps,
        "out_every": rs.out_every,
        "seed": rs.seed,
        "status": status,
        "diverged": status == "diverged",
        "estimator_failed": status == "estimator-failure",
        "t_fail": t_fail,
        "theta_true": [float(v) for v in rs.theta_true],
        "final_theta_err": float(theta_err[-1]) if len(t) else None,
        "final_state_err": float(state_err[-1]) if len(t) else None,
        "theta_tol": rs.theta_tol,
        "state_tol": rs.state_tol,
        "t_theta_threshold": _time_to_threshold(t, theta_err, rs.theta_tol),
        "t_state_threshold": _time_to_threshold(t, state_err, rs.state_tol),
        "grammian_min_eig": min_eig,
        "rank_identifiable": bool(rank_ok),
    }
    return summary


# --------------------------------------------------------------------------
# Diagnostics on a completed run (used by the acceptance suite and service).

def identity_errors(result: RunResult) -> np.ndarray:
    """Per-row inf-norm of lift(x) - (xi - Phi theta) with the true theta."""
    rs = result.resolved
    imm = rs.bench.immersion
    th = rs.theta_true
    out = np.empty(len(result.frames["t"]))
    for i, (xr, xir, Phir) in enumerate(zip(result.frames["x"],
                                            result.frames["xi"],
                                            result.frames["Phi"])):
        out[i] = np.max(np.abs(lift(imm, xr) - (xir - Phir @ th)))
    return out


def regression_residuals(result: RunResult) -> np.ndarray:
    """Per-row inf-norm of Y - psi G(theta_true): exactness of the regression."""
    rs = result.resolved
    gmap = rs.bench.regression.gmap
    G_true = gmap(rs.theta_true[: gmap.n_theta])
    res = result.frames["Y"] - result.frames["psi"] @ G_true
    return np.max(np.abs(res), axis=1)


def mixing_residuals(result: RunResult) -> np.ndarray:
    """Per-row max of |Yv_i - Delta G_i(theta)| / (1 + |G_i(theta)|).

    This is the DREM mixing identity; it certifies that the scalar
    regressions the theta updates consume are consistent with the vector
    one.  Only meaningful for runs with an LS estimator state.
    """
    rs = result.resolved
    gmap = rs.bench.regression.gmap
    G_true = gmap(rs.theta_true[: gmap.n_theta])
    scale = 1.0 + np.abs(G_true)
    f0 = rs.gains.f0
    n_psi = rs.bench.regression.n_psi
    eye = np.eye(n_psi)
    out = np.empty(len(result.frames["t"]))
    from .linalg import adjugate, determinant
    for i in range(len(out)):
        F = result.frames["F"][i]
        zeta = result.frames["zeta"][i]
        G_hat = result.frames["G_hat"][i]
        M = eye - zeta * f0 * F
        Delta = determinant(M)
        Yv = adjugate(M) @ (G_hat - zeta * f0 * (F @ rs.G0))
        out[i] = np.max(np.abs(Yv - Delta * G_true) / scale)
    return out


def verify_immersion(bid: str, samples: int = 1000, seed: int = 0,
                     overrides: dict | None = None, tol: float = 1e-9) -> dict:
    """Sample the benchmark's operating box and report worst residuals."""
    try:
        bench = make_benchmark(bid, overrides)
    except KeyError as exc:
        raise ScenarioError(str(exc)) from exc
    rep = residual_scan(bench.system, bench.immersion, bench.box_x, bench.box_u,
                        samples=samples, seed=seed)
    return {
        "benchmark": bench.bid,
        "samples": rep.samples,
        "max_r1": rep.max_r1,
        "max_r2": rep.max_r2,
        "max_total": rep.max_total,
        "tol": tol,
        "passed": rep.max_total < tol,
        "worst_x": [float(v) for v in rep.worst_x] if rep.worst_x is not None else None,
        "worst_u": [float(v) for v in rep.worst_u] if rep.worst_u is not None else None,
    }


# --------------------------------------------------------------------------
# Trace serialization.  Formatting uses repr's shortest round-trip form so a
# re-run reproduces files byte for byte.

def _fmt(v) -> str:
    if v is None:
        return "nan"
    return repr(float(v))


def _csv(header: list, rows_iter) -> str:
    lines = [",".join(header)]
    for row in rows_iter:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def states_csv(result: RunResult) -> str:
    n = result.resolved.bench.n
    header = (["t"] + [f"x{i+1}" for i in range(n)]
              + [f"xh{i+1}" for i in range(n)] + [f"xe{i+1}" for i in range(n)])
    f = result.frames

    def rows():
        for i in range(len(f["t"])):
            err = f["x_hat"][i] - f["x"][i]
            yield [f["t"][i], *f["x"][i], *f["x_hat"][i], *err]

    return _csv(header, rows())


def estimator_csv(result: RunResult) -> str:
    rs = result.resolved
    n_est = rs.bench.n_est
    theta_true = rs.theta_true[:n_est]
    header = (["t"] + [f"th{i+1}" for i in range(n_est)]
              + [f"the{i+1}" for i in range(n_est)]
              + ["Delta", "F_norm", "zeta", "chi"])
    f = result.frames

    def rows():
        for i in range(len(f["t"])):
            err = f["theta_hat"][i] - theta_true
            yield [f["t"][i], *f["theta_hat"][i], *err,
                   f["Delta"][i], f["F_norm"][i], f["zeta"][i], f["chi"][i]]

    return _csv(header, rows())


def regressor_csv(result: RunResult) -> str:
    rs = result.resolved
    names = list(rs.bench.regression.gmap.names)
    header = ["t", "comp", "Y"] + names
    f = result.frames
    p = rs.bench.system.p

    def rows():
        for i in range(len(f["t"])):
            for c in range(p):
                yield [f["t"][i], float(c), f["Y"][i][c], *f["psi"][i][c]]

    return _csv(header, rows())


def summary_text(result: RunResult) -> str:
    order = [
        "benchmark", "estimator", "dt", "horizon", "n_steps", "out_every",
        "seed", "status", "diverged", "estimator_failed", "t_fail",
        "theta_true", "final_theta_err", "final_state_err", "theta_tol",
        "state_tol", "t_theta_threshold", "t_state_threshold",
        "grammian_min_eig", "rank_identifiable",
    ]
    lines = []
    for key in order:
        val = result.summary[key]
        if isinstance(val, list):
            val = "[" + ", ".join(repr(float(v)) for v in val) + "]"
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


PLOT_SCRIPT = """# gnuplot script: state and estimation-error traces
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 1200,800
set output 'states.png'
set multiplot layout 2,1
set title 'plant state and estimate'
plot for [i=2:{nx1}] 'states.csv' using 1:i with lines
set title 'state estimation error'
plot for [i={nerr0}:{nerr1}] 'states.csv' using 1:i with lines
unset multiplot
set output 'estimator.png'
set multiplot layout 2,1
set title 'parameter estimates'
plot for [i=2:{nth1}] 'estimator.csv' using 1:i with lines
set title 'parameter estimation error'
plot for [i={nthe0}:{nthe1}] 'estimator.csv' using 1:i with lines
unset multiplot
"""


def plot_script(result: RunResult) -> str:
    n = result.resolved.bench.n
    n_est = result.resolved.bench.n_est
    return PLOT_SCRIPT.format(nx1=1 + n, nerr0=2 + 2 * n, nerr1=1 + 3 * n,
                              nth1=1 + n_est, nthe0=2 + n_est, nthe1=1 + 2 * n_est)


def traces(result: RunResult) -> dict:
    """All emitted artifacts as filename -> content."""
    return {
        "states.csv": states_csv(result),
        "estimator.csv": estimator_csv(result),
        "regressor.csv": regressor_csv(result),
        "summary.txt": summary_text(result),
        "plot.gp": plot_script(result),
    }


def write_traces(result: RunResult, outdir) -> list:
    """Write all trace files into ``outdir``; returns the paths written."""
    import os

    os.makedirs(outdir, exist_ok=True)
    paths = []
    for name, content in traces(result).items():
        path = os.path.join(outdir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        paths.append(path)
    return paths
