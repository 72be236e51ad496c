"""Synthetic benchmark datasets with known dependency structure.

Three families mimic common HPC telemetry shapes: a power-chain cluster
(component draws add up to node power), a scheduler trace whose duration is
driven by idle time with a weak second factor and a completion state, and a
task-scaling workload where run time is a clean linear function of task and
node counts. Known ground truth makes them useful for checking what the
causal and counterfactual machinery recovers.
"""

from __future__ import annotations

import numpy as np

from .dataset import ColumnSchema, Dataset, DatasetError

MIN_ROWS = 10


def _pm100_like(n: int, rng: np.random.Generator) -> Dataset:
    num_nodes = rng.integers(1, 65, size=n).astype(np.float64)
    # wide utilization spread keeps component power from tracking the node
    # count so tightly that correlation pruning merges the columns
    cpu_util = rng.uniform(0.4, 1.0, n)
    mem_util = rng.uniform(0.4, 1.0, n)
    cpu_power = 30.0 * num_nodes * cpu_util + rng.normal(0, 5, n)
    mem_power = 10.0 * num_nodes * mem_util + rng.normal(0, 3, n)
    node_power = cpu_power + mem_power + rng.normal(0, 2, n)
    schema = [
        ColumnSchema("num_nodes", units="nodes"),
        ColumnSchema("cpu_power", units="W"),
        ColumnSchema("mem_power", units="W"),
        ColumnSchema("node_power", role="target", units="W"),
    ]
    return Dataset(schema, {
        "num_nodes": num_nodes,
        "cpu_power": cpu_power,
        "mem_power": mem_power,
        "node_power": node_power,
    })


def _fugaku_like(n: int, rng: np.random.Generator) -> Dataset:
    idle_time = rng.lognormal(mean=2.0, sigma=0.5, size=n)
    mszl = rng.uniform(1.0, 8.0, n)
    failed = rng.random(n) < 0.15
    state = np.where(failed, "failed", "completed").astype(object)
    base = 50.0 + 8.0 * idle_time + 2.0 * mszl
    duration = np.where(failed, 0.6 * base, base) + rng.normal(0, 4, n)
    schema = [
        ColumnSchema("idle_time", units="s"),
        ColumnSchema("mszl"),
        ColumnSchema("state", kind="categorical", levels=["completed", "failed"]),
        ColumnSchema("duration", role="target", units="s"),
    ]
    return Dataset(schema, {
        "idle_time": idle_time,
        "mszl": mszl,
        "state": state,
        "duration": duration,
    })


def _sc19_like(n: int, rng: np.random.Generator) -> Dataset:
    task_count = rng.integers(16, 513, size=n).astype(np.float64)
    node_count = rng.integers(1, 33, size=n).astype(np.float64)
    io_volume = rng.lognormal(mean=3.0, sigma=1.0, size=n)
    run_time = 2.0 * task_count + 3.0 * node_count + rng.normal(0, 10, n)
    schema = [
        ColumnSchema("task_count", units="tasks"),
        ColumnSchema("node_count", units="nodes"),
        ColumnSchema("io_volume", units="GB"),
        ColumnSchema("run_time", role="target", units="s"),
    ]
    return Dataset(schema, {
        "task_count": task_count,
        "node_count": node_count,
        "io_volume": io_volume,
        "run_time": run_time,
    })


GENERATORS = {
    "pm100-like": _pm100_like,
    "fugaku-like": _fugaku_like,
    "sc19-like": _sc19_like,
}


def synth_dataset(name: str, n: int, seed: int = 0) -> Dataset:
    """Draw a named synthetic dataset; same name, n, seed = same rows."""
    if name not in GENERATORS:
        raise DatasetError(
            f"unknown synthetic dataset {name!r}; choose from "
            f"{sorted(GENERATORS)}")
    if n < MIN_ROWS:
        raise DatasetError(f"need at least {MIN_ROWS} rows, got {n}")
    return GENERATORS[name](n, np.random.default_rng(seed))
