"""Configuration, seeded experiment orchestration, result persistence."""

from qpzk.harness.config import (
    EXPERIMENT_KINDS,
    ExperimentConfig,
    config_from_dict,
    load_config,
)
from qpzk.harness.experiments import run_experiment
from qpzk.harness.records import (
    ExperimentRecord,
    MetricRow,
    load_record,
    save_record,
)
from qpzk.harness.report import report

__all__ = [
    "EXPERIMENT_KINDS",
    "ExperimentConfig",
    "ExperimentRecord",
    "MetricRow",
    "config_from_dict",
    "load_config",
    "load_record",
    "report",
    "run_experiment",
    "save_record",
]
