"""Position recovery from beat frames.

Pipeline per receive antenna: 2D spectrum over (sample, sweep), peak
detection in slow-time label bands, sub-bin refinement, path-sum ranges,
law-of-sines angles from antenna pairs, then fusion. Type II trains get
separate odd/even spectra whose peak coordinates are differenced to
cancel Doppler before the same downstream chain runs.

Conventions: the fast-time coordinate ``phi_t`` (rad/sample) is kept
one-sided, [0, 2pi) for up-chirp spectra and (-2pi, 0] for down-chirp
spectra, because path sums may occupy the whole unambiguous circle. The
slow-time coordinate ``phi_l`` (rad/sweep) is wrapped to (-pi, pi].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .util import TWO_PI, circ_dist, circ_mean, wrap_pi
from .waveform import WaveformKind, WaveformSpec

__all__ = [
    "SweepSubset",
    "RangeDopplerMap",
    "Peak",
    "PeakSet",
    "QualityFlags",
    "PositionEstimate",
    "LabelAmbiguityError",
    "FrameEstimationError",
    "two_dim_spectrum",
    "expected_labels",
    "detect_and_match_peaks",
    "resolve_label_shift",
    "doppler_refine",
    "ranges_from_peaks",
    "angles_from_ranges",
    "fuse_mac",
    "relative_positions",
    "absolute_positions",
    "fuse_bc",
    "estimate",
]

DETECTION_FACTOR = 6.0  # peak accepted above this multiple of the median magnitude
CLAMP_TOL = 1e-9


class LabelAmbiguityError(ValueError):
    """Two expected labels fall on the same slow-time cell."""


class FrameEstimationError(RuntimeError):
    """A single receive frame cannot be turned into ranges."""


class SweepSubset(enum.Enum):
    ALL = "all"
    ODD = "odd"
    EVEN = "even"


@dataclass(eq=False)
class RangeDopplerMap:
    """Zero-padded 2D spectrum of one beat frame (or a sweep subset)."""

    spectrum: np.ndarray
    pad_q: int
    pad_l: int
    subset: SweepSubset
    n_samples: int  # fast-time size before padding
    n_sweeps: int   # slow-time size before padding (after subset selection)
    samples: np.ndarray | None = None  # time-domain subset, for sub-bin zoom

    @property
    def descending(self) -> bool:
        """True when the map belongs to down-chirp (even) sweeps."""
        return self.subset is SweepSubset.EVEN

    @cached_property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.spectrum)

    @cached_property
    def detection_threshold(self) -> float:
        return DETECTION_FACTOR * float(np.median(self.magnitude))

    def phi_t(self, row: float) -> float:
        """Fast-time coordinate of a (fractional) row index."""
        raw = TWO_PI * (row % self.spectrum.shape[0]) / self.spectrum.shape[0]
        return raw - TWO_PI if self.descending else raw

    def phi_l(self, col: float) -> float:
        """Slow-time coordinate of a (fractional) column index, (-pi, pi]."""
        return wrap_pi(TWO_PI * col / self.spectrum.shape[1])

    def col_phases(self) -> np.ndarray:
        cols = np.arange(self.spectrum.shape[1])
        return wrap_pi(TWO_PI * cols / self.spectrum.shape[1])


def two_dim_spectrum(frame, pad_q: int = 8, pad_l: int = 8,
                     subset: SweepSubset = SweepSubset.ALL) -> RangeDopplerMap:
    """Zero-padded 2D DFT of a beat frame over (sample, sweep).

    ``subset`` selects all sweeps, or only the odd / even ones (1-based
    sweep parity); subsets are reindexed consecutively before the
    transform, so their slow-time rates are per subset step.
    """
    if pad_q < 1 or pad_l < 1:
        raise ValueError("pad factors must be >= 1")
    s = frame.samples
    if subset is SweepSubset.ODD:
        s = s[:, 0::2]
    elif subset is SweepSubset.EVEN:
        s = s[:, 1::2]
    if s.shape[1] == 0:
        raise ValueError("empty sweep subset")
    n_samples, n_sweeps = s.shape
    spec2d = np.fft.fft2(s, s=(pad_q * n_samples, pad_l * n_sweeps))
    return RangeDopplerMap(spec2d, pad_q, pad_l, subset, n_samples, n_sweeps,
                           samples=s)


@dataclass
class Peak:
    """One detected spectral peak with sub-bin coordinates."""

    phi_t: float      # rad per fast-time sample (sign per chirp slope)
    phi_l: float      # rad per slow-time step, (-pi, pi]
    magnitude: float
    matched: bool


@dataclass
class PeakSet:
    """Peaks keyed by the transmit antenna their label identifies."""

    rx: int
    peaks: dict
    subset: SweepSubset = SweepSubset.ALL

    def matched(self) -> dict:
        return {m: p for m, p in self.peaks.items() if p.matched}

    def n_unmatched(self) -> int:
        return sum(1 for p in self.peaks.values() if not p.matched)


def expected_labels(spec: WaveformSpec, rx: int,
                    subset: SweepSubset = SweepSubset.ALL) -> dict:
    """Model slow-time labels for every transmit path into antenna rx.

    The full-train label of path m is 2 pi (k_rx - k_m). Odd/even
    subsets advance the global sweep index by two per step, which doubles
    the effective rate; even sweeps additionally carry negated ramps.
    """
    labels = {}
    for m in range(1, spec.N + 1):
        base = TWO_PI * (spec.rates[rx - 1] - spec.rates[m - 1])
        if subset is SweepSubset.ALL:
            labels[m] = wrap_pi(base)
        elif subset is SweepSubset.ODD:
            labels[m] = wrap_pi(2.0 * base)
        else:
            labels[m] = wrap_pi(-2.0 * base)
    return labels


def _min_label_spacing(labels) -> float:
    vals = list(labels.values()) if isinstance(labels, dict) else list(labels)
    if len(vals) < 2:
        return TWO_PI
    spacing = min(circ_dist(a, b)
                  for i, a in enumerate(vals) for b in vals[i + 1:])
    return float(spacing)


def _parabolic_offset(m_minus: float, m0: float, m_plus: float) -> float:
    """Vertex offset in bins of a log-magnitude parabola through 3 points."""
    tiny = 1e-300
    a = math.log(max(m_minus, tiny))
    b = math.log(max(m0, tiny))
    c = math.log(max(m_plus, tiny))
    denom = a - 2.0 * b + c
    if denom >= -1e-30:  # flat or non-concave neighborhood
        return 0.0
    delta = 0.5 * (a - c) / denom
    return float(np.clip(delta, -0.5, 0.5))


ZOOM_PAD = 8  # sub-bin grid pitch: 1 / ZOOM_PAD of a natural bin


def _zoom_peak(rd_map: RangeDopplerMap, row: int, col: int):
    """Refine a coarse peak cell on a 1/8-bin local grid of the exact DTFT.

    Evaluating the transform directly at the three neighbouring offsets is
    identical to reading a zero-padded FFT of factor ``ZOOM_PAD`` around
    the peak, just computed lazily; the usual three-point quadratic
    interpolation of the log magnitude then runs on those samples. Walks
    uphill first in case the coarse grid put the centre one fine cell off.

    Returns (phi_t raw in [0, 2pi), phi_l raw, peak magnitude).
    """
    s = rd_map.samples
    nq, nl = s.shape
    n_rows, n_cols = rd_map.spectrum.shape
    ht = TWO_PI / (ZOOM_PAD * nq) if rd_map.pad_q < ZOOM_PAD else TWO_PI / n_rows
    hl = TWO_PI / (ZOOM_PAD * nl) if rd_map.pad_l < ZOOM_PAD else TWO_PI / n_cols
    wt = TWO_PI * row / n_rows
    wl = TWO_PI * col / n_cols
    q = np.arange(nq)
    j = np.arange(nl)
    offsets = np.array([-1.0, 0.0, 1.0])
    for _ in range(2 * ZOOM_PAD):
        et = np.exp(-1j * np.outer(wt + offsets * ht, q))
        el = np.exp(-1j * np.outer(wl + offsets * hl, j))
        grid = np.abs(et @ s @ el.T)
        i, k = np.unravel_index(int(np.argmax(grid)), grid.shape)
        if (i, k) == (1, 1):
            break
        wt += (i - 1) * ht
        wl += (k - 1) * hl
    dt = _parabolic_offset(grid[0, 1], grid[1, 1], grid[2, 1])
    dl = _parabolic_offset(grid[1, 0], grid[1, 1], grid[1, 2])
    return wt + dt * ht, wl + dl * hl, float(grid[1, 1])


def detect_and_match_peaks(rd_map: RangeDopplerMap, spec: WaveformSpec,
                           labels: dict, band_shift: float = 0.0) -> PeakSet:
    """Match one peak to each expected slow-time label.

    For each label, the maximum-magnitude cell inside the slow-time band
    label +- half the minimum label spacing is taken and both coordinates
    are refined by three-point quadratic interpolation of the
    log magnitude. Peaks below the detection threshold (a fixed multiple
    of the map's median magnitude) are flagged unmatched.
    """
    spacing = _min_label_spacing(labels)
    if spacing < 1e-9:
        raise LabelAmbiguityError("expected labels are not pairwise distinct")
    half = spacing / 2.0
    mag = rd_map.magnitude
    n_rows, n_cols = mag.shape
    col_phase = rd_map.col_phases()
    threshold = rd_map.detection_threshold
    claimed = {}
    peaks = {}
    for m, label in labels.items():
        center = wrap_pi(label + band_shift)
        sel = np.flatnonzero(circ_dist(col_phase, center) <= half + 1e-12)
        band = mag[:, sel]
        flat = int(np.argmax(band))
        row, k = np.unravel_index(flat, band.shape)
        col = int(sel[k])
        cell = (int(row), col)
        if cell in claimed:
            raise LabelAmbiguityError(
                f"labels for antennas {claimed[cell]} and {m} claim one cell")
        claimed[cell] = m
        peak_mag = float(mag[row, col])
        if rd_map.samples is not None:
            wt, wl, peak_mag = _zoom_peak(rd_map, int(row), col)
            phi_t = wt % TWO_PI - (TWO_PI if rd_map.descending else 0.0)
            phi_l = wrap_pi(wl)
        else:
            dr = _parabolic_offset(mag[(row - 1) % n_rows, col], peak_mag,
                                   mag[(row + 1) % n_rows, col])
            dc = _parabolic_offset(mag[row, (col - 1) % n_cols], peak_mag,
                                   mag[row, (col + 1) % n_cols])
            phi_t = rd_map.phi_t(row + dr)
            phi_l = rd_map.phi_l(col + dc)
        peaks[m] = Peak(phi_t=phi_t, phi_l=phi_l, magnitude=peak_mag,
                        matched=peak_mag > threshold)
    return PeakSet(rx=0, peaks=peaks, subset=rd_map.subset)


def resolve_label_shift(odd_map: RangeDopplerMap, even_map: RangeDopplerMap,
                        spec: WaveformSpec, rx: int, f_samp: float):
    """Estimate the common Doppler displacement of the slow-time labels.

    Reader motion shifts every label of a parity map by the same amount,
    and past half the label spacing a plain band search would swap paths.
    The shift is only observable modulo the label comb, so each candidate
    (strongest peak explained by each label in turn) is scored against an
    unambiguous prediction derived from the fast-time Doppler of the
    paired odd/even peaks; between near-ties the smaller displacement
    wins. Returns (shift, odd_peaks, even_peaks) for the best candidate.
    """
    labels_odd = expected_labels(spec, rx, SweepSubset.ODD)
    labels_even = expected_labels(spec, rx, SweepSubset.EVEN)
    mag = odd_map.magnitude
    row, col = np.unravel_index(int(np.argmax(mag)), mag.shape)
    strongest = odd_map.phi_l(int(col))

    candidates = []
    for lab in labels_odd.values():
        delta = wrap_pi(strongest - lab)
        if all(abs(wrap_pi(delta - c)) > 1e-6 for c in candidates):
            candidates.append(delta)

    best = None
    for delta in candidates:
        try:
            po = detect_and_match_peaks(odd_map, spec, labels_odd, band_shift=delta)
            pe = detect_and_match_peaks(even_map, spec, labels_even, band_shift=delta)
        except LabelAmbiguityError:
            raise
        dops = [(po.peaks[m].phi_t + pe.peaks[m].phi_t) / 2.0
                for m in labels_odd
                if po.peaks[m].matched and pe.peaks[m].matched]
        if not dops:
            continue
        dop = float(np.median(dops))
        # phi_t Doppler ~ 2 pi (f0 + B/2) dv / f_samp while the per-step
        # slow-time shift is 4 pi f0 dv T; eliminate dv to predict it.
        predicted = 2.0 * f_samp * spec.T * dop * spec.f0 / (spec.f0 + spec.B / 2.0)
        score = abs(wrap_pi(predicted - delta))
        key = (score, abs(delta))
        if best is None or key < best[0]:
            best = (key, delta, po, pe)
    if best is None:
        po = detect_and_match_peaks(odd_map, spec, labels_odd)
        pe = detect_and_match_peaks(even_map, spec, labels_even)
        return 0.0, po, pe
    return best[1], best[2], best[3]


def doppler_refine(odd_peaks: PeakSet, even_peaks: PeakSet,
                   spec: WaveformSpec, f_samp: float):
    """Cancel Doppler by differencing odd/even peak coordinates.

    Per label matched in both parities: refined fast-time rate
    (phi_t_odd - phi_t_even)/2 carries the range alone, the half-sum is
    the Doppler term (converted to a radial speed via fd = phi f_samp /
    (2 pi), v = fd c / (2 f0)), and the refined slow-time rate is the
    half-difference with the doubled odd-index step divided out. Labels
    matched in only one parity are dropped (counted by the caller).

    Returns (refined PeakSet, {antenna: radial speed}, n_dropped).
    """
    labels_odd = expected_labels(spec, odd_peaks.rx, SweepSubset.ODD)
    labels_even = expected_labels(spec, even_peaks.rx, SweepSubset.EVEN)
    refined = {}
    v_radial = {}
    dropped = 0
    for m in labels_odd:
        po = odd_peaks.peaks.get(m)
        pe = even_peaks.peaks.get(m)
        if po is None or pe is None or not (po.matched and pe.matched):
            if (po and po.matched) or (pe and pe.matched):
                dropped += 1
            continue
        phi_t = (po.phi_t - pe.phi_t) / 2.0
        dop = (po.phi_t + pe.phi_t) / 2.0
        resid_o = wrap_pi(po.phi_l - labels_odd[m])
        resid_e = wrap_pi(pe.phi_l - labels_even[m])
        base = wrap_pi(TWO_PI * (spec.rates[odd_peaks.rx - 1] - spec.rates[m - 1]))
        phi_l = wrap_pi(base + (resid_o - resid_e) / 4.0)
        fd = dop * f_samp / TWO_PI
        v_radial[m] = fd * spec.c / (2.0 * spec.f0)
        refined[m] = Peak(phi_t=phi_t, phi_l=phi_l,
                          magnitude=min(po.magnitude, pe.magnitude),
                          matched=True)
    out = PeakSet(rx=odd_peaks.rx, peaks=refined, subset=SweepSubset.ALL)
    return out, v_radial, dropped


def ranges_from_peaks(peaks: PeakSet, spec: WaveformSpec, f_samp: float,
                      rx: int):
    """Path ranges anchored on the receive antenna's monostatic peak.

    r_rx = c phi_t(rx) f_samp / (4 pi alpha); every bistatic path m gives
    r_m = c phi_t(m) f_samp / (2 pi alpha) - r_rx. A missing monostatic
    peak makes the whole frame unusable. Returns (ranges dict, flagged
    count of nonphysical ranges); unmatched paths are simply absent.
    """
    mono = peaks.peaks.get(rx)
    if mono is None or not mono.matched:
        raise FrameEstimationError(
            f"monostatic peak of antenna {rx} not detected")
    scale = spec.c * f_samp / (2.0 * TWO_PI * spec.alpha)  # c f_samp / (4 pi alpha)
    r_rx = mono.phi_t * scale
    ranges = {rx: r_rx}
    flagged = 0
    if r_rx <= 0:
        flagged += 1
    for m, peak in peaks.peaks.items():
        if m == rx or not peak.matched:
            continue
        ranges[m] = peak.phi_t * 2.0 * scale - r_rx
        if ranges[m] <= 0:
            flagged += 1
    return ranges, flagged


def angles_from_ranges(r1: float, rn: float, s: float):
    """Angles of a two-antenna/tag triangle from its side lengths.

    The left antenna (1) and the right antenna (n) sit ``s`` apart on the
    array axis; both look at the tag from ranges r1, rn. Law of cosines:
    cos t1 = (r1^2 + s^2 - rn^2) / (2 s r1), then cos tn =
    (r1 cos t1 - s) / rn and sin tn = r1 sin t1 / rn. Cosines are clamped
    onto [-1, 1]; returns (theta1, thetan, clamped) where ``clamped``
    reports a violation beyond tolerance (noisy ranges breaking the
    triangle inequality).
    """
    if r1 <= 0 or rn <= 0 or s <= 0:
        raise ValueError("triangle sides must be positive")
    if r1 + rn <= s * (1.0 + CLAMP_TOL):
        raise ValueError("degenerate triangle: r1 + rn <= baseline")
    cos1 = (r1 * r1 + s * s - rn * rn) / (2.0 * s * r1)
    clamped = abs(cos1) > 1.0 + CLAMP_TOL
    cos1 = min(1.0, max(-1.0, cos1))
    sin1 = math.sqrt(max(0.0, 1.0 - cos1 * cos1))
    cosn = (r1 * cos1 - s) / rn
    sinn = r1 * sin1 / rn
    clamped = clamped or abs(cosn) > 1.0 + CLAMP_TOL or sinn > 1.0 + CLAMP_TOL
    theta1 = math.atan2(sin1, cos1)
    thetan = math.atan2(max(0.0, sinn), cosn)
    return theta1, thetan, clamped


def fuse_mac(theta_estimates: dict) -> dict:
    """Circular-mean fusion of per-pair angle estimates, per antenna."""
    fused = {}
    for antenna, samples in theta_estimates.items():
        if not samples:
            raise ValueError(f"no angle estimates for antenna {antenna}")
        fused[antenna] = circ_mean(samples)
    return fused


def relative_positions(r_hat, theta_hat) -> np.ndarray:
    """z_n = -r_n (cos theta_n, sin theta_n), shape (N, 2)."""
    r = np.asarray(r_hat, dtype=float)
    th = np.asarray(theta_hat, dtype=float)
    if r.shape != th.shape:
        raise ValueError("range and angle lists must have equal length")
    return -np.column_stack((r * np.cos(th), r * np.sin(th)))


def absolute_positions(z_hat, p_tag) -> np.ndarray:
    """p_n = p_tag + z_n."""
    return np.asarray(p_tag, dtype=float) + np.asarray(z_hat, dtype=float)


def fuse_bc(position_sets) -> np.ndarray:
    """Component-wise mean over per-receive-antenna position sets.

    ``position_sets`` is a sequence of (N, 2) arrays that may contain NaN
    rows for antennas a frame could not place; those rows are ignored.
    Raises if any antenna is covered by no set at all.
    """
    sets = [np.asarray(p, dtype=float) for p in position_sets]
    if not sets:
        raise ValueError("no position sets to fuse")
    stack = np.stack(sets)
    valid = ~np.isnan(stack[:, :, 0])
    if not np.all(valid.any(axis=0)):
        raise ValueError("an antenna is missing from every position set")
    with np.errstate(invalid="ignore"):
        fused = np.nanmean(stack, axis=0)
    return fused


@dataclass
class QualityFlags:
    """Per-estimate diagnostic counters."""

    unmatched_peaks: int = 0
    clamped_geometry: int = 0
    failed_frames: int = 0
    dropped_parity: int = 0
    nonphysical_ranges: int = 0

    @property
    def any_failure(self) -> bool:
        return (self.failed_frames > 0 or self.unmatched_peaks > 0
                or self.clamped_geometry > 0 or self.nonphysical_ranges > 0)


@dataclass
class PositionEstimate:
    """Fused per-antenna estimate with diagnostics."""

    r_hat: np.ndarray       # (N,) ranges, NaN where unavailable
    theta_hat: np.ndarray   # (N,) angles
    z_hat: np.ndarray       # (N, 2) positions relative to the tag
    p_hat: np.ndarray       # (N, 2) absolute positions
    v_radial: np.ndarray    # (N_rx, N_path) radial speeds (type II), NaN elsewhere
    flags: QualityFlags
    ok: bool


def _frame_ranges(frame, spec, f_samp, pad_q, pad_l, flags: QualityFlags):
    """Ranges and (for type II) per-path radial speeds of one frame."""
    rx = frame.antenna
    if spec.kind is WaveformKind.TYPE_I:
        rd = two_dim_spectrum(frame, pad_q, pad_l, SweepSubset.ALL)
        peaks = detect_and_match_peaks(rd, spec, expected_labels(spec, rx))
        peaks.rx = rx
        v_radial = {}
    else:
        odd_map = two_dim_spectrum(frame, pad_q, pad_l, SweepSubset.ODD)
        even_map = two_dim_spectrum(frame, pad_q, pad_l, SweepSubset.EVEN)
        _, po, pe = resolve_label_shift(odd_map, even_map, spec, rx, f_samp)
        po.rx = rx
        pe.rx = rx
        peaks, v_radial, dropped = doppler_refine(po, pe, spec, f_samp)
        flags.dropped_parity += dropped
    flags.unmatched_peaks += peaks.n_unmatched()
    ranges, nonphys = ranges_from_peaks(peaks, spec, f_samp, rx)
    flags.nonphysical_ranges += nonphys
    return ranges, v_radial


def estimate(frames, spec: WaveformSpec, f_samp: float, p_tag, d: float,
             pad_q: int = 2, pad_l: int = 2) -> PositionEstimate:
    """Full chain: frames -> spectra -> peaks -> ranges -> angles -> fusion.

    Each receive frame yields ranges for every detected path, N-1 antenna
    pair triangles for angles (reference antenna = the receiver), and a
    relative position set; the per-frame sets are averaged. Failed frames
    or paths degrade the estimate (and are counted in the flags) instead
    of aborting; ``ok`` is False when some antenna was never placed.

    The default pads only localize peaks coarsely; sub-bin coordinates
    always come from the 1/8-bin DTFT zoom, so accuracy does not depend
    on the pad factors.
    """
    n_ant = spec.N
    flags = QualityFlags()
    v_radial = np.full((n_ant, n_ant), np.nan)
    position_sets = []
    range_sets = {a: [] for a in range(1, n_ant + 1)}
    angle_sets = {a: [] for a in range(1, n_ant + 1)}

    for frame in frames:
        rx = frame.antenna
        try:
            ranges, v_rad = _frame_ranges(frame, spec, f_samp, pad_q, pad_l, flags)
        except FrameEstimationError:
            flags.failed_frames += 1
            continue
        for m, v in v_rad.items():
            v_radial[rx - 1, m - 1] = v

        frame_angles = {a: [] for a in ranges}
        for m in ranges:
            if m == rx:
                continue
            i, j = min(rx, m), max(rx, m)
            if ranges[i] <= 0 or ranges[j] <= 0:
                continue
            baseline = (j - i) * d
            try:
                ti, tj, clamped = angles_from_ranges(ranges[i], ranges[j], baseline)
            except ValueError:
                flags.clamped_geometry += 1
                continue
            if clamped:
                flags.clamped_geometry += 1
            frame_angles[i].append(ti)
            frame_angles[j].append(tj)

        placed = {a for a in frame_angles if frame_angles[a]}
        if not placed:
            flags.failed_frames += 1
            continue
        theta_frame = fuse_mac({a: frame_angles[a] for a in placed})
        z_frame = np.full((n_ant, 2), np.nan)
        for a in placed:
            z_frame[a - 1] = relative_positions([ranges[a]], [theta_frame[a]])[0]
            range_sets[a].append(ranges[a])
            angle_sets[a].append(theta_frame[a])
        position_sets.append(z_frame)

    try:
        z_hat = fuse_bc(position_sets)
        ok = True
    except ValueError:
        z_hat = np.full((n_ant, 2), np.nan)
        ok = False
        if position_sets:
            stack = np.stack(position_sets)
            with np.errstate(invalid="ignore"):
                z_hat = np.nanmean(stack, axis=0)

    r_hat = np.array([np.mean(range_sets[a]) if range_sets[a] else np.nan
                      for a in range(1, n_ant + 1)])
    theta_hat = np.array([circ_mean(angle_sets[a]) if angle_sets[a] else np.nan
                          for a in range(1, n_ant + 1)])
    p_hat = absolute_positions(z_hat, p_tag)
    return PositionEstimate(r_hat=r_hat, theta_hat=theta_hat, z_hat=z_hat,
                            p_hat=p_hat, v_radial=v_radial, flags=flags, ok=ok)
