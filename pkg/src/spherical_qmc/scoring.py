"""Uniform entry point for evaluating one metric on one configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import (
    cap_discrepancy_l2,
    cap_discrepancy_linf,
    g_of_t,
    generalized_sum,
    log_energy,
    wce_distance_s32,
    wce_heat_kernel,
    wce_legendre,
)
from .sphere import Configuration

METRICS = ("wce", "wce-heat", "wce-dist", "gt", "capL2", "capLinf", "gensum", "energy")
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class MetricSpec:
    """One metric request.

    ``param`` is the metric's numeric parameter: the smoothness ``s`` for
    the wce routes and ``gensum``, the time ``t`` for ``gt``; unused otherwise.
    """

    metric: str
    param: float | None = None
    tol: float = DEFAULT_TOL
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}; choose from {METRICS}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        p = self.param
        if self.metric in ("wce", "wce-heat"):
            if p is None:
                object.__setattr__(self, "param", 2.0)
            elif not p > 1:
                raise ValueError(f"{self.metric} needs s > 1, got {p}")
        elif self.metric == "wce-dist":
            object.__setattr__(self, "param", 1.5)
        elif self.metric == "gensum":
            if p is None or not 1 < p < 2:
                raise ValueError(f"gensum needs 1 < s < 2, got {p}")
        elif self.metric == "gt":
            if p is None or not p > 0:
                raise ValueError(f"gt needs t > 0, got {p}")
        elif p is not None:
            raise ValueError(f"metric {self.metric} takes no numeric parameter")
        if self.metric == "capLinf" and self.options.get("mode", "exact-smallN") not in ("exact-smallN", "randomized"):
            raise ValueError(f"unknown capLinf mode {self.options['mode']!r}")
        if self.metric == "capL2" and int(self.options.get("mc_caps", 1)) < 1:
            raise ValueError("mc_caps must be >= 1")
        if self.metric == "wce" and self.options.get("tail", "uniform") not in ("uniform", "bernstein"):
            raise ValueError(f"unknown tail mode {self.options['tail']!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "MetricSpec":
        d = dict(d)
        allowed = {"metric", "s", "t", "tol", "mode", "mc_caps", "tail"}
        extra = set(d) - allowed
        if extra:
            raise ValueError(f"unknown metric fields {sorted(extra)}")
        if "metric" not in d:
            raise ValueError("metric spec needs a 'metric' field")
        if "s" in d and "t" in d:
            raise ValueError("give either s or t, not both")
        param = d.pop("s", d.pop("t", None))
        metric = d.pop("metric")
        tol = float(d.pop("tol", DEFAULT_TOL))
        return cls(metric, None if param is None else float(param), tol, d)

    def to_dict(self) -> dict:
        d = {"metric": self.metric}
        if self.param is not None and self.metric != "wce-dist":
            d["t" if self.metric == "gt" else "s"] = self.param
        if self.metric in ("wce", "gt"):
            d["tol"] = self.tol
        d.update(self.options)
        return d


@dataclass(frozen=True)
class Score:
    metric: str
    value: float
    tail_bound: float
    params: dict

    def to_dict(self) -> dict:
        return {"metric": self.metric, "value": self.value, "tail_bound": self.tail_bound,
                "params": self.params}


def score(c: Configuration, spec: MetricSpec, gen: np.random.Generator | None = None) -> Score:
    """Evaluate ``spec`` on ``c``; ``gen`` feeds the Monte Carlo / randomized metrics."""
    m, p = spec.metric, spec.param
    params = spec.to_dict()
    params.pop("metric")
    if m == "wce":
        r = wce_legendre(c, p, spec.tol, tail=spec.options.get("tail", "uniform"))
        params.update(truncation_l=r.truncation_l, route=r.route)
        return Score(m, r.value, r.tail_bound, params)
    if m == "wce-heat":
        r = wce_heat_kernel(c, p)
        params.update(truncation_l=r.truncation_l, route=r.route)
        return Score(m, r.value, r.tail_bound, params)
    if m == "wce-dist":
        r = wce_distance_s32(c)
        params.update(r.params)
        return Score(m, r.value, r.tail_bound, params)
    if m == "gt":
        r = g_of_t(c, p, spec.tol)
        params.update(truncation_l=r.truncation_l)
        return Score(m, r.value, r.tail_bound, params)
    if m == "capL2":
        r = cap_discrepancy_l2(c, int(spec.options.get("mc_caps", 10_000)), gen)
        params.update(se=r.se, mc_caps=r.mc_caps)
        return Score(m, r.value, 0.0, params)
    if m == "capLinf":
        mode = spec.options.get("mode", "exact-smallN")
        params["mode"] = mode
        params["semantics"] = "exact" if mode == "exact-smallN" else "lower bound"
        return Score(m, cap_discrepancy_linf(c, mode, gen), 0.0, params)
    if m == "gensum":
        return Score(m, generalized_sum(c, p), 0.0, params)
    e = log_energy(c)
    if math.isinf(e):
        params["infinite"] = "coincident points"
    return Score(m, e, 0.0, params)
