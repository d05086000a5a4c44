"""Batch runs, persistence and statistical checks."""

from .persist import COLUMNS, CellSummary, Row, load, persist, quantile, summarize
from .plan import PLAN_VERSION, ExperimentPlan, ReplicaRecord, stream_id
from .report import bound_curve, text_table, tsv
from .runner import run_batch, run_replica
from .stats import (
    StatReport,
    clt_oracle_variance,
    clt_variance_test,
    concentration_test,
    headline_check,
    mgf_test,
    moment_bound_test,
    projection_identity,
    scaling_study,
)

__all__ = [
    "COLUMNS", "CellSummary", "Row", "load", "persist", "quantile", "summarize", "PLAN_VERSION",
    "ExperimentPlan", "ReplicaRecord", "stream_id", "bound_curve", "text_table", "tsv", "run_batch",
    "run_replica", "StatReport", "clt_oracle_variance", "clt_variance_test", "concentration_test",
    "headline_check", "mgf_test", "moment_bound_test", "projection_identity", "scaling_study",
]
