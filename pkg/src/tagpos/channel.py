"""Backscatter channel simulation: geometry, delays, and beat frames.

The tag sits at the origin of a local 2D frame; reader antennas lie on a
line parallel to the x axis at spacing ``d``. Antenna ``n`` is described
by its distance ``r_n`` to the tag and the angle ``theta_n`` in [0, pi]
between the array axis and the antenna-to-tag direction.

``synthesize_beat`` evaluates the *exact* mixed phase of every
transmit/receive path (no small-delay expansion), so the first-order
model the estimator relies on is genuinely put to the test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .waveform import WaveformKind, WaveformSpec

GEOMETRY_TOL = 1e-9

__all__ = [
    "Geometry",
    "Scenario",
    "BeatFrame",
    "geometry_from_first_antenna",
    "propagation_delay",
    "synthesize_beat",
    "model_phase_deviation",
    "write_frame_text",
]


@dataclass(frozen=True)
class Geometry:
    """Per-antenna tag distances r_n (m) and angles theta_n (rad)."""

    r: tuple
    theta: tuple

    def __post_init__(self):
        if len(self.r) != len(self.theta):
            raise ValueError("r and theta must have equal length")
        if any(ri <= 0 for ri in self.r):
            raise ValueError("distances must be positive")
        if any(not 0.0 <= th <= math.pi for th in self.theta):
            raise ValueError("angles must lie in [0, pi]")
        object.__setattr__(self, "r", tuple(float(x) for x in self.r))
        object.__setattr__(self, "theta", tuple(float(x) for x in self.theta))

    @property
    def n_antennas(self) -> int:
        return len(self.r)

    def positions(self) -> np.ndarray:
        """Antenna positions relative to the tag, shape (N, 2).

        Antenna n sits at z_n = -r_n (cos theta_n, sin theta_n).
        """
        r = np.asarray(self.r)
        th = np.asarray(self.theta)
        return -np.column_stack((r * np.cos(th), r * np.sin(th)))

    def validate_collinear(self, d: float, tol: float = GEOMETRY_TOL):
        """Check the implied positions form a collinear array of pitch d.

        Requires z_n = z_1 + (n-1) d (1, 0) and a common perpendicular
        offset r_n sin(theta_n), both within ``tol`` meters.
        """
        z = self.positions()
        n = self.n_antennas
        expected = z[0] + np.outer(np.arange(n), np.array([d, 0.0]))
        if not np.allclose(z, expected, atol=tol, rtol=0.0):
            raise ValueError("geometry is not a collinear array of pitch d")
        offsets = np.asarray(self.r) * np.sin(np.asarray(self.theta))
        if np.ptp(offsets) > tol:
            raise ValueError("antennas do not share a perpendicular offset")


def geometry_from_first_antenna(r1: float, theta1: float, d: float,
                                n_antennas: int) -> Geometry:
    """Place a collinear array from the first antenna's range and angle.

    Antenna 1 goes to z_1 = -r1 (cos theta1, sin theta1); the rest follow
    at pitch ``d`` along +x. Rejects tags collinear with the array
    (theta1 of 0 or pi) since those make angle recovery degenerate.
    """
    if r1 <= 0:
        raise ValueError("r1 must be positive")
    if not 0.0 < theta1 < math.pi:
        raise ValueError("tag collinear with the array (theta1 must be in (0, pi))")
    if n_antennas < 1:
        raise ValueError("need at least one antenna")
    if n_antennas > 1 and d <= 0:
        raise ValueError("antenna spacing must be positive")
    z1 = -r1 * np.array([math.cos(theta1), math.sin(theta1)])
    r, theta = [], []
    for n in range(n_antennas):
        zn = z1 + np.array([n * d, 0.0])
        to_tag = -zn
        r.append(float(np.hypot(*zn)))
        theta.append(float(math.atan2(to_tag[1], to_tag[0])))
    return Geometry(tuple(r), tuple(theta))


@dataclass
class Scenario:
    """Ground truth for one synthesized measurement.

    Attributes:
        geometry: antenna ranges/angles relative to the tag.
        v: reader speed along the array axis, m/s.
        d: inter-antenna spacing, m.
        attenuation: NxN path amplitude matrix A[m-1, n-1] (symmetric, > 0).
        snr_db: transmit SNR in dB; noise power is 10**(-snr_db/10) per
            complex sample (math.inf disables noise).
        bits: per-sweep tag bit b(ell) in {0, 1}; None means all ones.
        p_tag: tag absolute position (2-vector), m.
        f_samp: ADC rate, Hz.
        seed: RNG seed; per-antenna noise uses independent substreams.
    """

    geometry: Geometry
    v: float
    d: float
    attenuation: np.ndarray
    snr_db: float
    f_samp: float
    seed: int
    bits: np.ndarray | None = None
    p_tag: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        if self.v < 0:
            raise ValueError("speed must be nonnegative")
        if self.f_samp <= 0:
            raise ValueError("sampling rate must be positive")
        a = np.asarray(self.attenuation, dtype=float)
        n = self.geometry.n_antennas
        if a.shape != (n, n):
            raise ValueError(f"attenuation matrix must be {n}x{n}")
        if np.any(a <= 0):
            raise ValueError("attenuations must be positive")
        if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
            raise ValueError("attenuation matrix must be symmetric")
        self.attenuation = a
        self.geometry.validate_collinear(self.d if n > 1 else 0.0)
        self.p_tag = np.asarray(self.p_tag, dtype=float)
        if self.bits is not None:
            b = np.asarray(self.bits)
            if not np.all(np.isin(b, (0, 1))):
                raise ValueError("tag bits must be 0 or 1")
            self.bits = b.astype(float)

    def antenna_positions(self) -> np.ndarray:
        """Absolute antenna positions p_n = p_tag + z_n, shape (N, 2)."""
        return self.p_tag + self.geometry.positions()


@dataclass
class BeatFrame:
    """Digitized beat signal of one receive antenna: Q x L samples."""

    samples: np.ndarray
    f_samp: float
    antenna: int

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_sweeps(self) -> int:
        return self.samples.shape[1]


def propagation_delay(m: int, n: int, t: float, ell: int,
                      geometry: Geometry, v: float, sweep_time: float,
                      c: float = 3.0e8) -> float:
    """Round-trip delay antenna m -> tag -> antenna n at sweep time t.

    tau = (r_m + r_n)/c + v (cos theta_n + cos theta_m)(t + (ell-1) T)/c;
    the second term is the range walk due to the reader's motion.
    """
    if not 0.0 <= t < sweep_time:
        raise ValueError("t outside the sweep")
    rm, rn = geometry.r[m - 1], geometry.r[n - 1]
    km = math.cos(geometry.theta[m - 1]) + math.cos(geometry.theta[n - 1])
    return (rm + rn) / c + v * km * (t + (ell - 1) * sweep_time) / c


def _mixed_phase(spec: WaveformSpec, t, tau, ell, rx: int, tx: int):
    """Exact beat phase F(t) - F(t - tau) + P_rx(ell) - P_tx(ell).

    Expanded algebraically (identical to mixing the two unit-modulus
    signals) to avoid differencing multi-megaradian chirp phases:
    up sweeps give 2 pi f0 tau + pi alpha (2 t tau - tau^2), down sweeps
    2 pi (f0+B) tau - pi alpha (2 t tau - tau^2). The delayed chirp uses
    the same-sweep formula even for t < tau (idealized continuous chirp).
    """
    two_pi = 2.0 * np.pi
    alpha = spec.alpha
    quad = 2.0 * t * tau - tau * tau
    up = two_pi * spec.f0 * tau + np.pi * alpha * quad
    dk = spec.rates[rx - 1] - spec.rates[tx - 1]
    if spec.kind is WaveformKind.TYPE_I:
        return up + two_pi * dk * ell
    down = two_pi * (spec.f0 + spec.B) * tau - np.pi * alpha * quad
    odd = ell % 2 == 1
    label = np.where(odd, two_pi * dk * ell, -two_pi * dk * ell)
    return np.where(odd, up, down) + label


def synthesize_beat(scenario: Scenario, spec: WaveformSpec) -> list:
    """Produce the digitized beat frame of every receive antenna.

    For receive antenna n, sample q (t_q = q / f_samp) and sweep ell:

        s_n = sum_m A[m,n] b(ell) exp(j (F(t_q) - F(t_q - tau_mn) +
                                         P_n(ell) - P_m(ell))) + w

    with the exact delay tau_mn(t_q, ell) and circularly-symmetric
    Gaussian noise of variance 10**(-snr_db/10), independent across
    antennas, samples and sweeps, reproducible from the scenario seed.
    """
    geo = scenario.geometry
    n_ant = geo.n_antennas
    if spec.N != n_ant:
        raise ValueError("spec and scenario disagree on the antenna count")
    f_samp = scenario.f_samp
    n_samples = round(spec.T * f_samp)
    t = (np.arange(n_samples) / f_samp)[:, None]          # (Q, 1)
    ell = np.arange(1, spec.L + 1)[None, :]               # (1, L)
    bits = scenario.bits if scenario.bits is not None else np.ones(spec.L)
    if len(bits) != spec.L:
        raise ValueError("bit sequence length must equal the sweep count")
    sigma2 = 0.0 if math.isinf(scenario.snr_db) else 10.0 ** (-scenario.snr_db / 10.0)
    cos_th = np.cos(np.asarray(geo.theta))
    r = np.asarray(geo.r)

    streams = np.random.SeedSequence(scenario.seed).spawn(n_ant)
    frames = []
    for rx in range(1, n_ant + 1):
        acc = np.zeros((n_samples, spec.L), dtype=complex)
        for tx in range(1, n_ant + 1):
            walk = scenario.v * (cos_th[rx - 1] + cos_th[tx - 1]) / spec.c
            tau = (r[tx - 1] + r[rx - 1]) / spec.c + walk * (t + (ell - 1) * spec.T)
            if np.any(tau >= spec.T):
                raise ValueError(
                    "echo delay reaches the sweep duration (sweep overrun); "
                    "tag is beyond c*T/2")
            amp = scenario.attenuation[tx - 1, rx - 1]
            acc += amp * np.exp(1j * _mixed_phase(spec, t, tau, ell, rx, tx))
        acc *= bits[None, :]
        if sigma2 > 0.0:
            rng = np.random.default_rng(streams[rx - 1])
            noise = rng.normal(scale=math.sqrt(sigma2 / 2.0),
                               size=(n_samples, spec.L, 2))
            acc += noise[..., 0] + 1j * noise[..., 1]
        frames.append(BeatFrame(acc, f_samp, rx))
    return frames


def model_phase_deviation(scenario: Scenario, spec: WaveformSpec) -> float:
    """Worst-case gap between exact and first-order beat phase, radians.

    The first-order model is linear in the sample index q (rate
    2 pi alpha (r_m + r_n) / (c f_samp)), linear in the sweep index
    (rate 2 pi (k_n - k_m)), plus a per-path constant; the constant is
    anchored at the first sample of the first sweep, so the returned
    number measures everything the linear model cannot represent.
    Type I only; the per-parity split of type II needs its own model.
    """
    if spec.kind is not WaveformKind.TYPE_I:
        raise ValueError("deviation model is defined for type I trains")
    geo = scenario.geometry
    f_samp = scenario.f_samp
    n_samples = round(spec.T * f_samp)
    t = (np.arange(n_samples) / f_samp)[:, None]
    ell = np.arange(1, spec.L + 1)[None, :]
    q = np.arange(n_samples)[:, None]
    j = np.arange(spec.L)[None, :]
    cos_th = np.cos(np.asarray(geo.theta))
    r = np.asarray(geo.r)
    worst = 0.0
    for rx in range(1, geo.n_antennas + 1):
        for tx in range(1, geo.n_antennas + 1):
            walk = scenario.v * (cos_th[rx - 1] + cos_th[tx - 1]) / spec.c
            tau = (r[tx - 1] + r[rx - 1]) / spec.c + walk * (t + (ell - 1) * spec.T)
            exact = _mixed_phase(spec, t, tau, ell, rx, tx)
            rate_t = 2.0 * np.pi * spec.alpha * (r[tx - 1] + r[rx - 1]) / (spec.c * f_samp)
            rate_l = 2.0 * np.pi * (spec.rates[rx - 1] - spec.rates[tx - 1])
            model = exact[0, 0] + rate_t * q + rate_l * j
            worst = max(worst, float(np.max(np.abs(exact - model))))
    return worst


def write_frame_text(frame: BeatFrame, path):
    """Debug dump: Q rows x L columns of "re,im" pairs, tab separated."""
    with open(path, "w") as fh:
        fh.write(f"# antenna {frame.antenna}, f_samp {frame.f_samp:g}\n")
        for row in frame.samples:
            fh.write("\t".join(f"{z.real:.9e},{z.imag:.9e}" for z in row))
            fh.write("\n")
