"""Test orchestration: suites, timing analysis, and report emission."""

from hilsim.harness.stats import TimingStats, compute_timing_stats
from hilsim.harness.report import CaseResult, TestReport, emit_report
from hilsim.harness.runner import (
    FAULT_CATEGORY,
    RunConfig,
    SuiteRunner,
    SUITE_NAMES,
    load_manifest,
    run_suite,
)

__all__ = [
    "TimingStats",
    "compute_timing_stats",
    "CaseResult",
    "TestReport",
    "emit_report",
    "FAULT_CATEGORY",
    "RunConfig",
    "SuiteRunner",
    "SUITE_NAMES",
    "load_manifest",
    "run_suite",
]
