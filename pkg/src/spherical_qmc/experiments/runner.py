"""Replica orchestration.

Every replica is a pure function of ``(kind, n, seed, stream_id, metrics)``,
so results do not depend on the worker count. Records are written to the CSV
in plan order as soon as all earlier replicas are done, and flushed after each
one, so an interrupted run leaves a valid prefix.
"""

from __future__ import annotations

import logging
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..samplers import SamplerSpec, sample
from ..scoring import score
from ..sphere import RngStream
from .persist import format_rows, header_line, rows_from_record
from .plan import ExperimentPlan, MetricValue, ReplicaRecord

log = logging.getLogger(__name__)


def metric_generator(seed: int, stream_id: int, k: int) -> np.random.Generator:
    """Generator for the ``k``-th metric of a replica, disjoint from the sampler stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream_id), k + 1))
    return np.random.Generator(np.random.Philox(ss))


def run_replica(kind: str, n: int, seed: int, stream_id: int, metrics) -> ReplicaRecord:
    rec = ReplicaRecord(kind, n, stream_id)
    t0 = time.perf_counter()
    try:
        c = sample(SamplerSpec(kind, n, RngStream(seed, stream_id)))
    except Exception as exc:  # a failed replica must not stop the batch
        rec.error = f"sampling: {type(exc).__name__}: {exc}"
        for m in metrics:
            rec.values[(m.metric, m.param)] = MetricValue(math.nan, math.nan, 0.0)
        rec.seconds = time.perf_counter() - t0
        return rec
    for k, m in enumerate(metrics):
        t1 = time.perf_counter()
        try:
            sc = score(c, m, metric_generator(seed, stream_id, k))
            rec.values[(m.metric, m.param)] = MetricValue(sc.value, sc.tail_bound, time.perf_counter() - t1)
        except Exception as exc:
            rec.error = f"{m.metric}: {type(exc).__name__}: {exc}"
            rec.values[(m.metric, m.param)] = MetricValue(math.nan, math.nan, time.perf_counter() - t1)
    rec.seconds = time.perf_counter() - t0
    return rec


def _init_worker():
    import numba

    numba.set_num_threads(1)


def run_batch(plan: ExperimentPlan, threads: int = 1, out=None, progress=None) -> list[ReplicaRecord]:
    """Run every replica of ``plan``; append rows to ``out`` (CSV path) if given.

    ``threads > 1`` distributes replicas over worker processes. Output order
    and values are identical for any worker count (timing columns aside).
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    tasks = [(plan.kind, n, plan.seed, sid, plan.metrics) for n, sid in plan.cells()]
    fh = None
    if out is not None:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = path.open("w")
        fh.write(header_line())
        fh.flush()

    records: list[ReplicaRecord] = []

    def emit(rec):
        records.append(rec)
        if rec.error:
            log.warning("replica n=%d stream=%d failed: %s", rec.n, rec.stream_id, rec.error)
        if fh is not None:
            fh.write(format_rows(rows_from_record(rec)))
            fh.flush()
        if progress is not None:
            progress(len(records), len(tasks))

    try:
        if threads == 1:
            for t in tasks:
                emit(run_replica(*t))
        else:
            # fork after the OpenMP runtime has started aborts the child, so spawn workers
            ctx = multiprocessing.get_context("spawn")
            with ProcessPoolExecutor(max_workers=threads, mp_context=ctx, initializer=_init_worker) as pool:
                futures = [pool.submit(run_replica, *t) for t in tasks]
                for f in futures:  # in plan order
                    emit(f.result())
    finally:
        if fh is not None:
            fh.close()
    return records
