"""Chirp-sampling ranging protocol and multi-beacon position solving.

A beacon starts broadcasting a long audio chirp at a known time; an RF
wake-up at a later known time triggers the tag, which captures a short slice
of whatever part of the chirp is passing by.  Locating that slice inside the
reference chirp gives the emission offset, and the gap between elapsed time
and emission offset is the time of flight.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import AcousticChannel, ReceiveWindow, propagate_acoustic, sample_window
from .errors import ConvergenceError, GeometryError, ParameterError, RangeWindowError
from .signals import (
    BitStream,
    ChirpSpec,
    FskConfig,
    fsk_modulate,
    fsk_recover_stream,
    gen_chirp,
    one_bit_quantize,
    xcorr_offset,
)
from .signals import _pearson_window, _sliding_pearson

__all__ = [
    "RangingTimeline",
    "RangingResult",
    "BeaconSet",
    "PositionFix",
    "simulate_ranging",
    "estimate_distance",
    "trilaterate",
]

MODES = ("ideal-audio", "one-bit-backscatter")


@dataclass(frozen=True)
class RangingTimeline:
    """Shared clock events of one ranging exchange (absolute seconds).

    Attributes:
        chirp_start: when the beacon starts emitting the chirp.
        wakeup_time: when the RF wake-up fires and the tag starts sampling.
        capture_duration: how long the tag samples.
    """

    chirp_start: float = 0.0
    wakeup_time: float = 0.020
    capture_duration: float = 0.001

    def __post_init__(self):
        if self.wakeup_time < self.chirp_start:
            raise ParameterError(
                f"wakeup_time ({self.wakeup_time}) must not precede "
                f"chirp_start ({self.chirp_start})"
            )
        if not self.capture_duration > 0:
            raise ParameterError(
                f"capture_duration must be positive, got {self.capture_duration}"
            )

    @property
    def wakeup_delay(self) -> float:
        return self.wakeup_time - self.chirp_start

    def max_distance(self, speed_of_sound: float) -> float:
        """Farthest tag whose capture starts after the chirp front arrives."""
        return speed_of_sound * self.wakeup_delay

    def min_distance(self, speed_of_sound: float, chirp_duration: float) -> float:
        """Nearest tag whose capture ends before the chirp tail passes."""
        return max(
            0.0,
            speed_of_sound
            * (self.wakeup_delay + self.capture_duration - chirp_duration),
        )


@dataclass(frozen=True)
class RangingResult:
    """Outcome of one simulated exchange."""

    lag: float
    peak: float
    tof: float
    distance: float
    clamped: bool = False


@dataclass(frozen=True)
class BeaconSet:
    """Beacon coordinates (one row per beacon) plus their shared timeline."""

    positions: np.ndarray
    timeline: RangingTimeline | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2:
            raise ParameterError("positions must be a 2-D array (beacons x dims)")
        k, dims = pos.shape
        if dims not in (2, 3):
            raise ParameterError(f"supported dimensions are 2 and 3, got {dims}")
        if k < dims + 1:
            raise ParameterError(
                f"need at least {dims + 1} beacons for a {dims}-D fix, got {k}"
            )
        spread = pos - pos.mean(axis=0)
        if np.linalg.matrix_rank(spread) < dims:
            kind = "collinear" if dims == 2 else "coplanar"
            raise GeometryError(f"beacons are {kind}; the fix is not unique")
        object.__setattr__(self, "positions", pos)


@dataclass(frozen=True)
class PositionFix:
    coordinates: np.ndarray
    residual_rms: float
    iterations: int


def estimate_distance(lag: float, timeline: RangingTimeline,
                      speed_of_sound: float) -> float:
    """Convert a correlation lag into a distance.

    The sample heard at wake-up left the beacon ``lag`` seconds into the
    chirp, so the flight time is (wakeup_delay - lag).  A lag larger than the
    wake-up delay would mean negative distance; the result clamps to zero and
    a warning is emitted.
    """
    if lag < 0:
        raise ParameterError(f"lag must be >= 0, got {lag}")
    if not speed_of_sound > 0:
        raise ParameterError(f"speed_of_sound must be positive, got {speed_of_sound}")
    raw = speed_of_sound * (timeline.wakeup_delay - lag)
    if raw < 0:
        warnings.warn(
            f"lag {lag:.6g} s exceeds the wake-up delay "
            f"{timeline.wakeup_delay:.6g} s; clamping distance to 0",
            stacklevel=2,
        )
        return 0.0
    return raw


def simulate_ranging(
    chirp: ChirpSpec,
    channel: AcousticChannel,
    timeline: RangingTimeline,
    mode: str = "ideal-audio",
    fsk: FskConfig | None = None,
    threshold: float = 0.0,
) -> RangingResult:
    """Run one ranging exchange end to end.

    In ``ideal-audio`` mode the captured analog window is correlated against
    the reference chirp directly.  In ``one-bit-backscatter`` mode the tag's
    comparator output toggles the FSK tone pair and the beacon recovers the
    comparator stream from the reflection, then correlates it against the
    sign of the reference chirp.  The comparator has no clock of its own, so
    this leg is modeled at the RF sample rate: transition timing survives at
    far better than audio-sample resolution, which is what makes the 1-bit
    stream locatable inside the sweep even where its audio-rate sampling
    would alias into a periodic pattern.

    Raises:
        RangeWindowError: if the capture window cannot land fully inside the
            chirp at this distance.
    """
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "one-bit-backscatter" and fsk is None:
        raise ParameterError("one-bit-backscatter mode requires an FskConfig")

    c = channel.speed_of_sound
    d_max = timeline.max_distance(c)
    d_min = timeline.min_distance(c, chirp.duration)
    if not (d_min <= channel.distance <= d_max):
        raise RangeWindowError(
            f"distance {channel.distance:.3f} m puts the capture window "
            f"outside the chirp; supported range is [{d_min:.3f}, {d_max:.3f}] m "
            f"(chirp_start={timeline.chirp_start}, "
            f"wakeup_time={timeline.wakeup_time}, "
            f"capture_duration={timeline.capture_duration}, "
            f"chirp duration={chirp.duration})"
        )

    if mode == "ideal-audio":
        rate = chirp.sample_rate
    else:
        # the comparator switches tones asynchronously; its transitions are
        # observable at the RF sampling resolution
        rate = fsk.sample_rate
        chirp = dataclasses.replace(chirp, sample_rate=rate)

    reference = gen_chirp(chirp)
    tx = dataclasses.replace(reference, t_origin=timeline.chirp_start)
    rx = propagate_acoustic(tx, channel)
    window = ReceiveWindow(timeline.wakeup_time, timeline.capture_duration, rate)
    captured = sample_window(rx, window, interpolate=channel.interpolate_delays)

    if mode == "ideal-audio":
        lag, peak = xcorr_offset(reference, captured)
    else:
        lag, peak = _locate_backscatter(reference, captured, fsk, threshold)

    raw = c * (timeline.wakeup_delay - lag)
    clamped = raw < 0
    distance = max(raw, 0.0)
    return RangingResult(
        lag=lag, peak=peak, tof=distance / c, distance=distance, clamped=clamped
    )


def _locate_backscatter(reference, captured, fsk: FskConfig,
                        threshold: float) -> tuple[float, float]:
    """Find the capture offset from the FSK reflection of the comparator.

    Acquisition runs on the recovered comparator stream: one sliding
    normalized correlation against the sign of the reference chirp.  Its
    margins against carrier-cycle aliases are thin (the comparator stream is
    locally periodic), so the decision stage matched-filters the received RF
    waveform against exact reflection replicas built from the reference at
    the shortlisted lags; a misplaced replica loses carrier phase lock at the
    first mismatched comparator transition, which separates the true lag
    decisively.
    """
    ref_bits = one_bit_quantize(reference, threshold)
    tag_bits = one_bit_quantize(captured, threshold)
    rf = fsk_modulate(tag_bits, fsk)
    heard = fsk_recover_stream(rf, fsk)

    ref_signs = ref_bits.signs()
    corr = _sliding_pearson(ref_signs, heard.signs())
    take = min(256, corr.size)
    shortlist = np.sort(np.argpartition(corr, -take)[-take:])

    m = len(tag_bits)
    rfz = rf.samples - rf.samples.mean()
    erf2 = float(np.dot(rfz, rfz))
    tones = np.array([fsk.freq0, fsk.freq1])
    windows = np.lib.stride_tricks.sliding_window_view(ref_bits.bits, m)
    cycles_per_sample = tones / fsk.sample_rate

    def best_replica(candidates: np.ndarray) -> tuple[int, float]:
        # Tone sequence per candidate window, carrier phase by cumulative
        # sum, reflection signs (first half of each cycle is positive, as in
        # fsk_modulate), then Pearson against the received RF stream.
        lag, score = 0, -np.inf
        for start in range(0, candidates.size, 128):
            chunk = candidates[start:start + 128]
            cyc = cycles_per_sample[windows[chunk]]
            phase = np.empty_like(cyc)
            phase[:, 0] = 0.0
            np.cumsum(cyc[:, :-1], axis=1, out=phase[:, 1:])
            rep = np.where(np.mod(phase, 1.0) < 0.5, 1.0, -1.0)
            repz = rep - rep.mean(axis=1, keepdims=True)
            energy = np.einsum("ij,ij->i", repz, repz)
            scores = (repz @ rfz) / np.sqrt(energy * erf2)
            i = int(np.argmax(scores))
            if scores[i] > score:
                score, lag = float(scores[i]), int(chunk[i])
        return lag, score

    def exact_score(k: int) -> float:
        # recompute through the modulator so a perfect match is exactly 1.0
        rep = fsk_modulate(BitStream(ref_bits.bits[k:k + m], ref_bits.bit_rate), fsk)
        return _pearson_window(rep.samples, 0, rfz, erf2)

    best_lag, _ = best_replica(shortlist)
    best_score = exact_score(best_lag)
    # A clean lock can only come from the right window: any other candidate
    # window disagrees on dozens of samples, which costs far more than this
    # margin.  A lower score means the shortlist may have locked a few audio
    # periods off (the comparator stream is locally periodic there), so sweep
    # the neighbourhood exhaustively.  The longest constant run in the
    # reference stream is half the slowest audio period.
    if best_score < 0.995:
        flips = np.flatnonzero(np.diff(ref_bits.bits)) + 1
        runs = np.diff(np.concatenate(([0], flips, [ref_bits.bits.size])))
        span = int(round(4.4 * runs.max()))
        lo = max(0, best_lag - span)
        hi = min(corr.size, best_lag + span + 1)
        swept_lag, _ = best_replica(np.arange(lo, hi))
        if swept_lag != best_lag:
            swept = exact_score(swept_lag)
            if swept > best_score:
                best_lag, best_score = swept_lag, swept
    return best_lag / ref_bits.bit_rate, best_score


def trilaterate(
    beacons: BeaconSet | np.ndarray,
    distances: np.ndarray,
    initial_guess: np.ndarray | None = None,
    max_iterations: int = 50,
    step_tol: float = 1e-9,
) -> PositionFix:
    """Solve for a position from beacon distances by Gauss-Newton.

    Starts from the beacon centroid (or ``initial_guess``) and iterates
    damped-free Gauss-Newton steps until the step norm drops below
    ``step_tol`` metres.

    Raises:
        GeometryError: degenerate beacon geometry or rank-deficient Jacobian.
        ConvergenceError: no convergence within ``max_iterations``; the
            exception carries the last iterate.
    """
    bset = beacons if isinstance(beacons, BeaconSet) else BeaconSet(np.asarray(beacons))
    pos = bset.positions
    k, dims = pos.shape
    d = np.asarray(distances, dtype=np.float64)
    if d.shape != (k,):
        raise ParameterError(
            f"need one distance per beacon: {k} beacons, {d.size} distances"
        )
    if (d < 0).any():
        raise ParameterError("distances must be >= 0")

    x = pos.mean(axis=0) if initial_guess is None else np.asarray(
        initial_guess, dtype=np.float64).copy()
    if x.shape != (dims,):
        raise ParameterError(f"initial_guess must have {dims} coordinates")

    residual = None
    for iteration in range(1, max_iterations + 1):
        diff = x - pos
        ranges = np.linalg.norm(diff, axis=1)
        ranges = np.maximum(ranges, 1e-12)  # guard the derivative at a beacon
        residual = ranges - d
        jac = diff / ranges[:, None]
        step, _, rank, _ = np.linalg.lstsq(jac, -residual, rcond=None)
        if rank < dims:
            raise GeometryError(
                f"Jacobian rank {rank} < {dims} at iterate {x}; beacon "
                "geometry does not constrain the fix"
            )
        x = x + step
        if np.linalg.norm(step) < step_tol:
            diff = x - pos
            residual = np.linalg.norm(diff, axis=1) - d
            return PositionFix(
                coordinates=x,
                residual_rms=float(np.sqrt(np.mean(residual**2))),
                iterations=iteration,
            )
    raise ConvergenceError(
        f"no convergence after {max_iterations} iterations; last iterate {x} "
        f"with residual RMS {float(np.sqrt(np.mean(residual**2))):.3e}",
        last_iterate=x,
        iterations=max_iterations,
    )
