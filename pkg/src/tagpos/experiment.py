"""Monte-Carlo experiment orchestration and CSV emission.

Two sweep axes are supported: the antenna count (accuracy vs array size)
and the reader speed (waveform comparison under Doppler). Trials draw a
random tag geometry, synthesize beat frames, run the estimator and score
the root-mean-square position error over antennas. The same
deterministically derived seed feeds every waveform type at a given
(point, trial), so type comparisons are paired.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .channel import Scenario, geometry_from_first_antenna, synthesize_beat
from .estimator import LabelAmbiguityError, estimate
from .waveform import WaveformKind, WaveformSpec, min_sweeps, optimal_rates

__all__ = [
    "ExperimentConfig",
    "TrialResult",
    "SweepRow",
    "ExperimentResult",
    "positioning_error",
    "run_trial",
    "run_experiment",
    "write_csv",
]

CSV_HEADER = ("axis_value,waveform_type,trials,mean_error_m,stderr_m,"
              "mean_sq_error_m2,failure_rate")


@dataclass
class ExperimentConfig:
    """Flat experiment configuration; every field is a config-file key."""

    f0: float = 24e9
    bandwidth: float = 200e6
    sweep_time: float = 30e-6
    f_samp: float = 5e6
    n_sweeps: int = 80
    snr_db: float = 20.0
    attenuation: float = 0.1
    spacing: float = 0.5
    n_antennas: int = 2
    velocity: float = 0.0
    waveforms: tuple = ("type_i",)
    trials: int = 500
    r_min: float = 10.0
    r_max: float = 80.0
    theta_min_deg: float = 30.0
    theta_max_deg: float = 150.0
    pad_q: int = 2
    pad_l: int = 2
    tag_bits: str = "ones"
    axis: str = ""            # "antennas" or "velocity"
    axis_values: tuple = ()
    seed: int | None = None
    out: str = ""

    def __post_init__(self):
        if isinstance(self.waveforms, str):
            self.waveforms = tuple(w.strip() for w in self.waveforms.split(",") if w.strip())
        self.waveforms = tuple(self.waveforms)
        for w in self.waveforms:
            WaveformKind(w)  # raises on unknown names
        self.axis_values = tuple(self.axis_values)
        if self.tag_bits not in ("ones", "zeros"):
            raise ValueError("tag_bits must be 'ones' or 'zeros'")

    def validate_for_run(self):
        if self.axis not in ("antennas", "velocity"):
            raise ValueError("sweep axis must be 'antennas' or 'velocity'")
        if not self.axis_values:
            raise ValueError("empty sweep axis")
        if self.seed is None:
            raise ValueError("a master seed is required")
        if self.trials < 1:
            raise ValueError("need at least one trial per point")
        largest_n = (max(int(v) for v in self.axis_values)
                     if self.axis == "antennas" else self.n_antennas)
        for w in self.waveforms:
            need = min_sweeps(largest_n, WaveformKind(w))
            if self.n_sweeps < need:
                raise ValueError(
                    f"{w} with {largest_n} antennas needs at least {need} sweeps")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Parse a flat "key = value" config file ('#' starts a comment)."""
        values = {}
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, val = (part.strip() for part in line.split("=", 1))
                values[key] = val
        return cls().with_overrides(values)

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        """Apply string or typed overrides for any config key."""
        typed = {}
        by_name = {f.name: f for f in fields(self)}
        for key, val in overrides.items():
            if val is None:
                continue
            if key not in by_name:
                raise ValueError(f"unknown config key '{key}'")
            typed[key] = _coerce(key, val)
        return replace(self, **typed)


def _coerce(key: str, val):
    if not isinstance(val, str):
        return val
    if key in ("n_sweeps", "n_antennas", "trials", "pad_q", "pad_l", "seed"):
        return int(val)
    if key in ("waveforms", "tag_bits", "axis", "out"):
        return val
    if key == "axis_values":
        return tuple(float(x) for x in val.split(",") if x.strip())
    if val.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(val)


@dataclass
class TrialResult:
    """One Monte-Carlo trial: error, flags and the ground-truth snapshot."""

    axis_value: float
    waveform: str
    trial_index: int
    error_m: float          # NaN when the trial failed
    sq_error_m2: float
    failed: bool
    clamped: int
    unmatched: int
    failed_frames: int
    r1: float
    theta1_deg: float
    velocity: float
    n_antennas: int


@dataclass
class SweepRow:
    axis_value: float
    waveform: str
    trials: int
    mean_error_m: float
    stderr_m: float
    mean_sq_error_m2: float
    failure_rate: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    trials: list


def positioning_error(p_hat, p_true) -> float:
    """Root of the mean squared Euclidean distance over antennas, meters."""
    a = np.asarray(p_hat, dtype=float)
    b = np.asarray(p_true, dtype=float)
    if a.shape != b.shape:
        raise ValueError("estimate and truth must have equal shapes")
    return float(np.sqrt(np.mean(np.sum((a - b) ** 2, axis=-1))))


def _trial_seeds(master: int, point_index: int, trial_index: int):
    ss = np.random.SeedSequence([int(master), int(point_index), int(trial_index)])
    geom_ss, noise_ss = ss.spawn(2)
    return geom_ss, int(noise_ss.generate_state(1, np.uint64)[0])


def run_trial(config: ExperimentConfig, point_index: int, trial_index: int,
              kind: WaveformKind) -> TrialResult:
    """Run one seeded trial of one waveform type at one sweep point."""
    axis_value = config.axis_values[point_index]
    if config.axis == "antennas":
        n_ant, velocity = int(axis_value), config.velocity
    else:
        n_ant, velocity = config.n_antennas, float(axis_value)

    geom_ss, noise_seed = _trial_seeds(config.seed, point_index, trial_index)
    rng = np.random.default_rng(geom_ss)
    r1 = rng.uniform(config.r_min, config.r_max)
    theta1 = math.radians(rng.uniform(config.theta_min_deg, config.theta_max_deg))
    geometry = geometry_from_first_antenna(r1, theta1, config.spacing, n_ant)

    spec = WaveformSpec(kind, config.f0, config.bandwidth, config.sweep_time,
                        config.n_sweeps, n_ant, optimal_rates(n_ant, kind))
    bits = np.zeros(config.n_sweeps) if config.tag_bits == "zeros" else None
    scenario = Scenario(geometry=geometry, v=velocity, d=config.spacing,
                        attenuation=np.full((n_ant, n_ant), config.attenuation),
                        snr_db=config.snr_db, f_samp=config.f_samp,
                        seed=noise_seed, bits=bits)
    frames = synthesize_beat(scenario, spec)
    try:
        est = estimate(frames, spec, config.f_samp, scenario.p_tag,
                       config.spacing, config.pad_q, config.pad_l)
    except LabelAmbiguityError:
        est = None

    failed = est is None or not est.ok
    clamped = est.flags.clamped_geometry if est else 0
    unmatched = est.flags.unmatched_peaks if est else 0
    bad_frames = est.flags.failed_frames if est else 0
    if failed:
        error = sq = float("nan")
    else:
        truth = scenario.antenna_positions()
        error = positioning_error(est.p_hat, truth)
        sq = float(np.mean(np.sum((est.p_hat - truth) ** 2, axis=-1)))
    return TrialResult(axis_value=float(axis_value), waveform=kind.value,
                       trial_index=trial_index, error_m=error, sq_error_m2=sq,
                       failed=failed, clamped=clamped, unmatched=unmatched,
                       failed_frames=bad_frames, r1=r1,
                       theta1_deg=math.degrees(theta1), velocity=velocity,
                       n_antennas=n_ant)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every (point, waveform) cell and aggregate per-point statistics.

    Trials are seeded from (master seed, point index, trial index) only,
    so all waveform types see identical geometries and noise draws.
    Rows come out sorted by (axis value, waveform type).
    """
    config.validate_for_run()
    trials = []
    rows = []
    for point_index in range(len(config.axis_values)):
        for wname in config.waveforms:
            kind = WaveformKind(wname)
            cell = [run_trial(config, point_index, t, kind)
                    for t in range(config.trials)]
            trials.extend(cell)
            errors = np.array([t.error_m for t in cell if not t.failed])
            n_fail = sum(t.failed for t in cell)
            if errors.size:
                mean = float(np.mean(errors))
                stderr = (float(np.std(errors, ddof=1) / math.sqrt(errors.size))
                          if errors.size > 1 else 0.0)
                mean_sq = float(np.mean(errors ** 2))
            else:
                mean = stderr = mean_sq = float("nan")
            rows.append(SweepRow(axis_value=float(config.axis_values[point_index]),
                                 waveform=wname, trials=len(cell),
                                 mean_error_m=mean, stderr_m=stderr,
                                 mean_sq_error_m2=mean_sq,
                                 failure_rate=n_fail / len(cell)))
    rows.sort(key=lambda r: (r.axis_value, r.waveform))
    return ExperimentResult(config=config, rows=rows, trials=trials)


def write_csv(result: ExperimentResult, path_or_buf) -> str:
    """Emit the aggregate table with fixed formatting (reruns are byte-identical)."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in result.rows:
        buf.write(f"{r.axis_value:.6f},{r.waveform},{r.trials},"
                  f"{r.mean_error_m:.6f},{r.stderr_m:.6f},"
                  f"{r.mean_sq_error_m2:.6f},{r.failure_rate:.6f}\n")
    text = buf.getvalue()
    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "w", newline="") as fh:
            fh.write(text)
    else:
        path_or_buf.write(text)
    return text
