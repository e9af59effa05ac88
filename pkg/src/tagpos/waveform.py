"""Transmit-side definitions for phase-labeled FMCW sweep trains.

A measurement is a train of ``L`` sweeps of duration ``T``. Within a sweep
every antenna radiates the same chirp; antennas are told apart by a
per-sweep phase ramp (rate ``k_n``, cycles per sweep) that turns into a
distinct slow-time tone at the receiver and labels each propagation path.

Two train flavors exist:

* type I: identical up-chirps in every sweep, for slowly moving readers.
* type II: up- and down-chirps alternate (triangular frequency
  trajectory) and the phase-ramp rates flip sign on the down sweeps, so a
  Doppler shift common to both halves cancels when the receiver
  differences the per-half spectra. Each half only holds ``L/2`` sweeps,
  which is why type II needs twice the sweep budget for label separation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

C_LIGHT = 3.0e8  # propagation speed, m/s

__all__ = [
    "C_LIGHT",
    "WaveformKind",
    "SweepParity",
    "WaveformSpec",
    "chirp_phase",
    "phase_offset",
    "transmit_sample",
    "optimal_rates",
    "max_allowable_distance",
    "min_sweeps",
]


class WaveformKind(enum.Enum):
    """Waveform family: up-chirps only, or alternating up/down chirps."""

    TYPE_I = "type_i"
    TYPE_II = "type_ii"


class SweepParity(enum.Enum):
    ODD = 1
    EVEN = 2


def parity_of(ell: int) -> SweepParity:
    """Parity of a 1-based sweep index."""
    return SweepParity.ODD if ell % 2 == 1 else SweepParity.EVEN


@dataclass(frozen=True)
class WaveformSpec:
    """All transmit-side parameters of a sweep train.

    Attributes:
        kind: waveform family (type I or type II).
        f0: chirp start frequency, Hz.
        B: sweep bandwidth, Hz.
        T: sweep duration, s.
        L: number of sweeps in the train.
        N: number of reader antennas.
        rates: per-antenna phase-ramp rates ``k_n`` (cycles per sweep),
            reduced modulo 1 at construction so labels live on the circle.
        c: propagation speed, m/s.
    """

    kind: WaveformKind
    f0: float
    B: float
    T: float
    L: int
    N: int
    rates: tuple
    c: float = C_LIGHT

    def __post_init__(self):
        if self.f0 <= 0 or self.T <= 0 or self.B < 0:
            raise ValueError("need f0 > 0, T > 0, B >= 0")
        if self.N < 1:
            raise ValueError("need at least one antenna")
        if len(self.rates) != self.N:
            raise ValueError(f"expected {self.N} phase rates, got {len(self.rates)}")
        # Rates are only meaningful modulo one cycle per sweep.
        object.__setattr__(self, "rates", tuple(float(k) % 1.0 for k in self.rates))
        if self.kind is WaveformKind.TYPE_I:
            if self.L <= self.N:
                raise ValueError("type I needs more sweeps than antennas (L > N)")
        else:
            if self.L <= 2 * self.N:
                raise ValueError("type II needs L > 2N sweeps")
            if self.L % 2 != 0:
                raise ValueError("type II needs an even sweep count")

    @property
    def alpha(self) -> float:
        """Chirp slope B/T in Hz/s (always derived, never set)."""
        return self.B / self.T

    @classmethod
    def with_optimal_rates(cls, kind, n_antennas, n_sweeps, f0, B, T, c=C_LIGHT):
        """Build a spec using the maximum-separation phase rates."""
        return cls(kind, f0, B, T, n_sweeps, n_antennas,
                   optimal_rates(n_antennas, kind), c)


def chirp_phase(t, spec: WaveformSpec, parity: SweepParity = SweepParity.ODD):
    """Chirp phase F(t) in radians at time t within a sweep.

    Up sweeps (type I always, type II odd sweeps) run
    ``2 pi f0 t + pi alpha t^2``; type II even sweeps run the mirrored
    down-chirp ``2 pi (f0 + B) t - pi alpha t^2`` so the instantaneous
    frequency sweeps from f0+B back down to f0 and the triangular
    trajectory is continuous in range.

    Accepts scalars or numpy arrays; t must lie in [0, T].
    """
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0) or np.any(tt > spec.T):
        raise ValueError("time outside the sweep [0, T]")
    if spec.kind is WaveformKind.TYPE_I or parity is SweepParity.ODD:
        phase = 2.0 * np.pi * spec.f0 * tt + np.pi * spec.alpha * tt * tt
    else:
        phase = (2.0 * np.pi * (spec.f0 + spec.B) * tt
                 - np.pi * spec.alpha * tt * tt)
    if np.ndim(t) == 0:
        return float(phase)
    return phase


def phase_offset(n: int, ell: int, spec: WaveformSpec) -> float:
    """Per-sweep phase label P_n(ell) in radians.

    Type I: ``2 pi k_n ell``. Type II keeps the global sweep index but
    negates the ramp on even sweeps: ``+2 pi k_n ell`` (odd),
    ``-2 pi k_n ell`` (even).
    """
    if not 1 <= n <= spec.N:
        raise ValueError(f"antenna index {n} outside 1..{spec.N}")
    if not 1 <= ell <= spec.L:
        raise ValueError(f"sweep index {ell} outside 1..{spec.L}")
    base = 2.0 * np.pi * spec.rates[n - 1] * ell
    if spec.kind is WaveformKind.TYPE_II and ell % 2 == 0:
        return -base
    return base


def transmit_sample(n: int, t, ell: int, spec: WaveformSpec) -> complex:
    """Unit-modulus transmit sample exp(j(F(t) + P_n(ell)))."""
    phase = chirp_phase(t, spec, parity_of(ell)) + phase_offset(n, ell, spec)
    return complex(np.exp(1j * phase))


def optimal_rates(n_antennas: int, kind: WaveformKind) -> tuple:
    """Phase-ramp rates with maximum label separation.

    Type I: ``k_n = n / N`` puts the N slow-time labels uniformly on the
    circle. Type II halves the rates (``k_n = n / (2N)``) because the
    per-half slow-time index advances two sweeps at a time, doubling every
    effective label; halving keeps the doubled labels uniformly spaced and
    collision free.
    """
    if n_antennas < 2:
        raise ValueError("angle recovery needs at least two antennas")
    if kind is WaveformKind.TYPE_I:
        return tuple(n / n_antennas for n in range(1, n_antennas + 1))
    return tuple(n / (2 * n_antennas) for n in range(1, n_antennas + 1))


def max_allowable_distance(spec: WaveformSpec, f_samp: float) -> float:
    """Largest unambiguous tag distance in meters.

    The beat bandwidth cap gives ``f_samp * c / (2 alpha)``; requiring the
    echo to land inside its own sweep gives ``c * T / 2``; the binding
    constraint is the smaller of the two.
    """
    if f_samp <= 0:
        raise ValueError("sampling rate must be positive")
    sweep_limit = spec.c * spec.T / 2.0
    if spec.alpha == 0.0:
        return sweep_limit
    return min(f_samp * spec.c / (2.0 * spec.alpha), sweep_limit)


def min_sweeps(n_antennas: int, kind: WaveformKind) -> int:
    """Smallest admissible sweep count for N antennas."""
    if n_antennas < 2:
        raise ValueError("angle recovery needs at least two antennas")
    if kind is WaveformKind.TYPE_I:
        return n_antennas + 1
    # smallest even integer strictly above 2N
    return 2 * n_antennas + 2
