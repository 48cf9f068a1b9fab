"""Shared plumbing for the benchmark catalog."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..gpebo import LreSample
from ..immersion import Immersion
from ..regression import GMap, SeparableNlpre, linear_gmap
from ..system import InputPolicy, NonlinearSystem

__all__ = ["Benchmark", "LinearRegressionSpec", "NlpreSpec", "ScenarioDefaults"]


@dataclass(frozen=True)
class LinearRegressionSpec:
    """Linear-readout regression: samples (C xi - y, C Phi) with Y = psi theta."""

    C: Callable[[np.ndarray], np.ndarray]
    nz: int
    kind: str = "lre"

    @property
    def gmap(self) -> GMap:
        return linear_gmap(self.nz)

    @property
    def n_psi(self) -> int:
        return self.nz

    def sample(self, t, y, u, xi, Phi) -> LreSample:
        Cm = np.atleast_2d(np.asarray(self.C(u), dtype=float))
        return LreSample(t=float(t), Y=Cm @ xi - y, psi=Cm @ Phi)


@dataclass(frozen=True)
class NlpreSpec:
    """Separable nonlinear regression built by a benchmark-specific closure."""

    builder: Callable[..., SeparableNlpre]
    _gmap: GMap
    kind: str = "nlpre"

    @property
    def gmap(self) -> GMap:
        return self._gmap

    @property
    def n_psi(self) -> int:
        return self._gmap.n_psi

    def sample(self, t, y, u, xi, Phi) -> SeparableNlpre:
        return self.builder(t=t, y=y, u=u, xi=xi, Phi=Phi)


@dataclass(frozen=True)
class ScenarioDefaults:
    """Per-benchmark default scenario (initial conditions, rates, gains)."""

    x0: np.ndarray
    xi0: np.ndarray
    dt: float
    horizon: float
    estimator: str                      # "full" | "ls-only" | "gradient"
    gamma_H: float
    gamma_i: float
    f0: float
    chi0: float
    G0_value: float = 1.0               # G_hat(0) entries
    gradient_gamma: float = 1.0
    out_every: int = 1


@dataclass(frozen=True)
class Benchmark:
    """One catalog entry: plant, immersion, controller, regression, defaults."""

    bid: str
    title: str
    system: NonlinearSystem
    immersion: Immersion
    controller: InputPolicy
    params: dict
    param_info: dict
    regression: object
    defaults: ScenarioDefaults
    box_x: np.ndarray
    box_u: np.ndarray
    notes: str = ""
    # Optional reconstruction hooks.  estimate_x maps (y, xi, Phi, theta_hat)
    # to the state estimate used by the controller and traces; summary_error
    # maps (x, x_hat) to the error vector whose norm the run summary reports.
    estimate_x: Optional[Callable] = None
    summary_error: Optional[Callable] = None

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def nz(self) -> int:
        return self.immersion.nz

    @property
    def n_est(self) -> int:
        """Number of theta components the estimator handles."""
        return self.regression.gmap.n_theta
