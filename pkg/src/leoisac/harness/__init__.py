"""Scenario configuration, frame orchestration, KPIs, sweeps and plots."""

from .config import (
    DEFAULTS,
    PRESETS,
    REALISATION_MODES,
    Scenario,
    build_scenario,
    config_digest,
    load_config,
    preset_path,
    set_option,
)
from .experiment import (
    KPI_HEADER,
    FrameEnvironment,
    RunResult,
    check_frame_budget,
    realised_rates,
    run_experiment,
    simulate_environment,
    write_outputs,
)
from .kpi import (
    KpiRecord,
    handover_count,
    handovers_per_second,
    jain_index,
    mean_throughput,
    nmse,
    per_user_mean,
    serving_satellite,
)
from .seeds import stream, stream_seed

__all__ = [
    "DEFAULTS",
    "KPI_HEADER",
    "PRESETS",
    "REALISATION_MODES",
    "FrameEnvironment",
    "KpiRecord",
    "RunResult",
    "Scenario",
    "build_scenario",
    "check_frame_budget",
    "config_digest",
    "handover_count",
    "handovers_per_second",
    "jain_index",
    "load_config",
    "mean_throughput",
    "nmse",
    "per_user_mean",
    "preset_path",
    "realised_rates",
    "run_experiment",
    "serving_satellite",
    "set_option",
    "simulate_environment",
    "stream",
    "stream_seed",
    "write_outputs",
]
