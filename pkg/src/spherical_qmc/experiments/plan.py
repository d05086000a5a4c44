"""Experiment plans and their JSON schema.

Version 1 schema::

    {
      "version": 1,
      "sampler": {"kind": "spherical-eig"},
      "n_values": [50, 100, 200],
      "replicas": 100,
      "seed": 0,
      "metrics": [{"metric": "wce", "s": 2, "tol": 1e-8},
                  {"metric": "capLinf", "mode": "randomized"}],
      "output_dir": "runs/scaling"
    }

``sampler.kind`` is one of :data:`~spherical_qmc.samplers.KINDS`. Metric
entries accept ``metric`` plus, depending on the metric, ``s`` (wce, wce-heat,
gensum), ``t`` (gt), ``tol`` (wce, gt), ``mode`` (capLinf), ``mc_caps``
(capL2) and ``tail`` (wce: ``uniform`` or ``bernstein``). Unknown keys are
rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..samplers import KINDS
from ..scoring import MetricSpec

PLAN_VERSION = 1
_PLAN_KEYS = {"version", "sampler", "n_values", "replicas", "seed", "metrics", "output_dir"}


@dataclass(frozen=True)
class ExperimentPlan:
    kind: str
    n_values: tuple
    replicas: int
    metrics: tuple
    seed: int = 0
    output_dir: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}; choose from {KINDS}")
        ns = tuple(int(n) for n in self.n_values)
        if not ns or any(n < 1 for n in ns):
            raise ValueError("n_values must be a non-empty list of positive integers")
        if len(set(ns)) != len(ns):
            raise ValueError("n_values must not repeat")
        if int(self.replicas) < 1:
            raise ValueError("replicas must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        ms = tuple(m if isinstance(m, MetricSpec) else MetricSpec.from_dict(m) for m in self.metrics)
        if not ms:
            raise ValueError("at least one metric is required")
        object.__setattr__(self, "n_values", ns)
        object.__setattr__(self, "metrics", ms)
        object.__setattr__(self, "replicas", int(self.replicas))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentPlan":
        extra = set(d) - _PLAN_KEYS
        if extra:
            raise ValueError(f"unknown plan fields {sorted(extra)}")
        version = d.get("version")
        if version != PLAN_VERSION:
            raise ValueError(f"unsupported plan version {version!r} (expected {PLAN_VERSION})")
        for key in ("sampler", "n_values", "replicas", "metrics"):
            if key not in d:
                raise ValueError(f"plan is missing {key!r}")
        sampler = d["sampler"]
        if not isinstance(sampler, dict) or set(sampler) != {"kind"}:
            raise ValueError("sampler must be an object with exactly one field, 'kind'")
        return cls(sampler["kind"], tuple(d["n_values"]), d["replicas"], tuple(d["metrics"]),
                   d.get("seed", 0), d.get("output_dir"))

    @classmethod
    def load(cls, path) -> "ExperimentPlan":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"version": PLAN_VERSION, "sampler": {"kind": self.kind},
                "n_values": list(self.n_values), "replicas": self.replicas, "seed": self.seed,
                "metrics": [m.to_dict() for m in self.metrics], "output_dir": self.output_dir}

    def cells(self):
        """``(n, stream_id)`` for every replica, in output order."""
        for n in self.n_values:
            for r in range(self.replicas):
                yield n, stream_id(n, r)


def stream_id(n: int, replica: int) -> int:
    """Stream id of replica ``replica`` at size ``n``; stable when the N list changes."""
    if not 0 <= replica < 2**32:
        raise ValueError("replica index out of range")
    return (int(n) << 32) | int(replica)


@dataclass
class MetricValue:
    value: float
    tail_bound: float
    seconds: float


@dataclass
class ReplicaRecord:
    kind: str
    n: int
    stream_id: int
    values: dict = field(default_factory=dict)  # (metric, param) -> MetricValue
    seconds: float = 0.0
    error: str | None = None
