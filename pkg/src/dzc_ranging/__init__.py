"""Differential Zadoff-Chu sequence design and ultrasonic ranging toolkit."""

__version__ = "0.1.0"

from .sequences import (CodeKind, SequenceSpec, code_sequence, differential_decode,
                        dzc_period, dzc_sequence, zc_sequence)
from .channel import (ChannelSpec, MotionProfile, add_awgn, apply_channel_fixed,
                      apply_channel_moving, interp_circular, resample)
from .correlation import (CorrelationResult, circular_xcorr, diff_sliding_corr,
                          multi_code_scan)
from .estimators import (MlSearchConfig, PipelineConfig, RangeEstimate,
                         RefinementError, acquire_track, ambiguity_map,
                         compensate_doppler, estimate_doppler, initial_tof_window,
                         min_variance_search, ml_estimate, ml_metric, phase_refine,
                         reduced_complexity_pipeline)
from .harness import (ExperimentConfig, TrialRecord, run_experiment, summarize,
                      write_csv, write_summary_csv)
from .iqfile import read_iq, write_iq

__all__ = [
    "__version__",
    "CodeKind", "SequenceSpec", "code_sequence", "differential_decode",
    "dzc_period", "dzc_sequence", "zc_sequence",
    "ChannelSpec", "MotionProfile", "add_awgn", "apply_channel_fixed",
    "apply_channel_moving", "interp_circular", "resample",
    "CorrelationResult", "circular_xcorr", "diff_sliding_corr", "multi_code_scan",
    "MlSearchConfig", "PipelineConfig", "RangeEstimate", "RefinementError",
    "acquire_track", "ambiguity_map", "compensate_doppler", "estimate_doppler",
    "initial_tof_window", "min_variance_search", "ml_estimate", "ml_metric",
    "phase_refine", "reduced_complexity_pipeline",
    "ExperimentConfig", "TrialRecord", "run_experiment", "summarize",
    "write_csv", "write_summary_csv",
    "read_iq", "write_iq",
]
