from __future__ import annotations
from pathlib import Path
from prometheus_client import REGISTRY, Counter, Gauge, Histogram, generate_latest

solver_steps = Counter("r2d_solver_steps_total", "Accepted time steps", ["solver"])
dt_halvings = Counter("r2d_dt_halvings_total", "Steps retried with a halved dt", ["solver"])
numeric_aborts = Counter("r2d_numeric_aborts_total", "Runs aborted on non-finite state", ["solver"])
runs = Counter("r2d_runs_total", "Finished runs", ["kind", "status"])
run_latency = Histogram("r2d_run_wall_seconds", "Run wall time seconds", buckets=(1, 5, 15, 60, 300, 900, 3600, float("inf")))
simulated_time = Gauge("r2d_simulated_time", "Last simulated time reached", ["solver"])


def dump_metrics(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(generate_latest(REGISTRY))
    return path
