from reconnect2d.harness.report import ReportResult, build_report
from reconnect2d.harness.runner import ScenarioRunner, run_scenario
from reconnect2d.harness.sweep import SweepResult, SweepRunner, parse_values, run_sweep

__all__ = [
    "ReportResult",
    "ScenarioRunner",
    "SweepResult",
    "SweepRunner",
    "build_report",
    "parse_values",
    "run_scenario",
    "run_sweep",
]
