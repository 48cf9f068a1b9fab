"""Catalog of benchmark systems with verified immersions and scenario defaults."""

from __future__ import annotations

from . import bernard, levine_marino, maglev, mechanical, oscillator, pmsm
from .base import Benchmark, LinearRegressionSpec, NlpreSpec, ScenarioDefaults
from .maglev import maglev_controller
from .mechanical import pd_controller

__all__ = [
    "Benchmark",
    "LinearRegressionSpec",
    "NlpreSpec",
    "ScenarioDefaults",
    "list_benchmarks",
    "maglev_controller",
    "make_benchmark",
    "pd_controller",
]

_REGISTRY = {
    "levine-marino": (levine_marino.build, levine_marino.PARAMS),
    "bernard-1": (bernard.build_1, bernard.PARAMS_1),
    "bernard-2": (bernard.build_2, bernard.PARAMS_2),
    "remark4-oscillator": (oscillator.build, oscillator.PARAMS),
    "maglev": (maglev.build, maglev.PARAMS),
    "pmsm": (pmsm.build, pmsm.PARAMS),
    "prismatic-robot": (mechanical.build_prismatic, mechanical.PRISMATIC_PARAMS),
    "robotic-leg": (mechanical.build_leg, mechanical.LEG_PARAMS),
}


def list_benchmarks() -> list[str]:
    """Catalog ids, in a stable order."""
    return list(_REGISTRY)


def make_benchmark(bid: str, overrides: dict | None = None) -> Benchmark:
    """Construct a catalog entry, optionally overriding named parameters."""
    try:
        build, defaults = _REGISTRY[bid]
    except KeyError:
        known = ", ".join(_REGISTRY)
        raise KeyError(f"unknown benchmark {bid!r}; known ids: {known}") from None
    params = dict(defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise KeyError(f"unknown parameter {key!r} for benchmark {bid!r}; "
                           f"known: {', '.join(params) or '(none)'}")
        params[key] = float(value)
    return build(params)
