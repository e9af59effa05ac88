"""Backscatter-tag assisted vehicle positioning: waveforms, channel, estimation."""

from .waveform import (
    C_LIGHT,
    SweepParity,
    WaveformKind,
    WaveformSpec,
    chirp_phase,
    max_allowable_distance,
    min_sweeps,
    optimal_rates,
    phase_offset,
    transmit_sample,
)
from .channel import (
    BeatFrame,
    Geometry,
    Scenario,
    geometry_from_first_antenna,
    model_phase_deviation,
    propagation_delay,
    synthesize_beat,
    write_frame_text,
)
from .estimator import (
    FrameEstimationError,
    LabelAmbiguityError,
    Peak,
    PeakSet,
    PositionEstimate,
    QualityFlags,
    RangeDopplerMap,
    SweepSubset,
    absolute_positions,
    angles_from_ranges,
    detect_and_match_peaks,
    doppler_refine,
    estimate,
    expected_labels,
    fuse_bc,
    fuse_mac,
    ranges_from_peaks,
    relative_positions,
    resolve_label_shift,
    two_dim_spectrum,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    TrialResult,
    positioning_error,
    run_experiment,
    run_trial,
    write_csv,
)

__version__ = "0.1.0"
