"""Chirp synthesis, one-bit quantization, square-wave FSK, and lag estimation.

Everything here is a pure function of its arguments; no global state, no RNG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "ChirpSpec",
    "Waveform",
    "BitStream",
    "FskConfig",
    "gen_chirp",
    "one_bit_quantize",
    "fsk_modulate",
    "fsk_demodulate",
    "fsk_recover_stream",
    "xcorr_offset",
]


@dataclass(frozen=True)
class ChirpSpec:
    """Linear frequency sweep description.

    A zero-bandwidth sweep (f_stop == f_start) degenerates to a pure tone,
    which is allowed.
    """

    f_start: float
    f_stop: float
    duration: float
    sample_rate: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.f_start > 0:
            raise ParameterError(f"f_start must be positive, got {self.f_start}")
        if self.f_stop < self.f_start:
            raise ParameterError(
                f"f_stop ({self.f_stop}) must be >= f_start ({self.f_start})"
            )
        if not self.duration > 0:
            raise ParameterError(f"duration must be positive, got {self.duration}")
        if not self.sample_rate > 2 * self.f_stop:
            raise ParameterError(
                f"sample_rate ({self.sample_rate}) must exceed twice f_stop "
                f"({self.f_stop}) to satisfy Nyquist"
            )
        if not self.amplitude > 0:
            raise ParameterError(f"amplitude must be positive, got {self.amplitude}")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled real signal with an absolute time origin.

    ``t_origin`` is the absolute time of ``samples[0]``; shifting a waveform
    in time is therefore free and exact.
    """

    samples: np.ndarray
    sample_rate: float
    t_origin: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ParameterError("samples must be one-dimensional")
        if arr.size and not np.isfinite(arr).all():
            raise ParameterError("samples must be finite")
        if not self.sample_rate > 0:
            raise ParameterError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", _readonly(arr))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @property
    def t_end(self) -> float:
        return self.t_origin + self.duration


@dataclass(frozen=True)
class BitStream:
    """Hard-decision bit sequence produced at a fixed rate."""

    bits: np.ndarray
    bit_rate: float

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ParameterError("bits must be one-dimensional")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ParameterError("bits must contain only 0 and 1")
        if not self.bit_rate > 0:
            raise ParameterError(f"bit_rate must be positive, got {self.bit_rate}")
        object.__setattr__(self, "bits", _readonly(arr))

    def __len__(self) -> int:
        return self.bits.size

    def signs(self) -> np.ndarray:
        """Map bits to a +/-1 float sequence (0 -> -1, 1 -> +1)."""
        return self.bits.astype(np.float64) * 2.0 - 1.0


@dataclass(frozen=True)
class FskConfig:
    """Two-tone square-wave FSK parameters for the backscatter uplink.

    The tone spacing is kept small relative to the carriers so a single
    oscillator pair can generate both; ``max_shift_ratio`` bounds
    ``|freq1 - freq0| / min(freq0, freq1)``.
    """

    freq0: float = 1.0e6
    freq1: float = 1.1e6
    sample_rate: float = 1.0e7
    max_shift_ratio: float = 0.10

    def __post_init__(self):
        if not (self.freq0 > 0 and self.freq1 > 0):
            raise ParameterError("tone frequencies must be positive")
        if self.freq0 == self.freq1:
            raise ParameterError("freq0 and freq1 must differ")
        shift = abs(self.freq1 - self.freq0) / min(self.freq0, self.freq1)
        if shift > self.max_shift_ratio + 1e-12:
            raise ParameterError(
                f"tone spacing {shift:.3f} exceeds max_shift_ratio "
                f"{self.max_shift_ratio}"
            )
        if not self.sample_rate > 4 * max(self.freq0, self.freq1):
            raise ParameterError(
                f"sample_rate ({self.sample_rate}) must exceed four times the "
                f"faster tone ({max(self.freq0, self.freq1)})"
            )


def gen_chirp(spec: ChirpSpec) -> Waveform:
    """Synthesize a linear up-chirp.

    Returns round(duration * sample_rate) samples with t_origin = 0.  The
    instantaneous frequency sweeps linearly from f_start to f_stop over the
    duration; a zero-bandwidth spec yields a pure tone.
    """
    n = spec.n_samples
    t = np.arange(n) / spec.sample_rate
    rate = (spec.f_stop - spec.f_start) / spec.duration
    phase = 2.0 * np.pi * (spec.f_start * t + 0.5 * rate * t * t)
    return Waveform(spec.amplitude * np.sin(phase), spec.sample_rate, 0.0)


def one_bit_quantize(wave: Waveform, threshold: float = 0.0) -> BitStream:
    """Comparator model: bit is 1 where the sample is >= threshold.

    The bit rate equals the waveform sample rate; every sample becomes one
    hard decision, exactly what a single comparator clocked at the ADC-less
    front end produces.
    """
    if not math.isfinite(threshold):
        raise ParameterError(f"threshold must be finite, got {threshold}")
    bits = (wave.samples >= threshold).astype(np.uint8)
    return BitStream(bits, wave.sample_rate)


def _bit_boundaries(n_bits: int, samples_per_bit: float) -> np.ndarray:
    # Rounding each boundary (rather than each width) keeps the long-run bit
    # rate exact even when sample_rate / bit_rate is not an integer.
    return np.round(np.arange(n_bits + 1) * samples_per_bit).astype(np.int64)


def fsk_modulate(bits: BitStream, cfg: FskConfig) -> Waveform:
    """Modulate bits onto a phase-continuous +/-1 square-wave FSK stream.

    Bit value 0 selects freq0, bit value 1 selects freq1.  The output models
    the reflection coefficient of an RF switch driven by a multiplexed
    oscillator pair, so samples take only the values +1 and -1.
    """
    n_bits = len(bits)
    if n_bits == 0:
        return Waveform(np.zeros(0), cfg.sample_rate, 0.0)
    spb = cfg.sample_rate / bits.bit_rate
    edges = _bit_boundaries(n_bits, spb)
    per_bit = np.where(bits.bits, cfg.freq1, cfg.freq0) / cfg.sample_rate
    cycles_per_sample = np.repeat(per_bit, np.diff(edges))
    # accumulated phase keeps the carrier continuous across bit boundaries;
    # the sample is high during the first half of each carrier cycle.  The
    # half-open comparison keeps the sign deterministic even when a cycle
    # boundary lands exactly on a sample, which happens whenever the tone
    # divides the sample rate.
    phase = np.concatenate(([0.0], np.cumsum(cycles_per_sample[:-1])))
    samples = np.where(np.mod(phase, 1.0) < 0.5, 1.0, -1.0)
    return Waveform(samples, cfg.sample_rate, 0.0)


def fsk_demodulate(wave: Waveform, cfg: FskConfig, bit_rate: float) -> BitStream:
    """Recover bits by comparing quadrature correlation energy at both tones.

    For each bit period the received samples are correlated against sine and
    cosine templates at freq0 and freq1; the tone with the larger energy
    (I^2 + Q^2) wins.  Works on square-wave input because the fundamental
    carries most of the energy and the harmonics fall outside both bands.

    Args:
        wave: received reflection-coefficient stream, sampled at
            cfg.sample_rate.
        cfg: tone configuration used by the modulator.
        bit_rate: decision rate in bits per second.

    Returns:
        BitStream at ``bit_rate``.
    """
    if not bit_rate > 0:
        raise ParameterError(f"bit_rate must be positive, got {bit_rate}")
    slow = min(cfg.freq0, cfg.freq1)
    if 1.0 / bit_rate < 2.0 / slow:
        raise ParameterError(
            f"bit period {1.0 / bit_rate:.3e} s is shorter than two cycles of "
            f"the slower tone ({slow:.3e} Hz)"
        )
    n = len(wave)
    if n == 0:
        return BitStream(np.zeros(0, dtype=np.uint8), bit_rate)
    spb = cfg.sample_rate / bit_rate
    n_bits = int(round(n / spb))
    if n_bits == 0:
        return BitStream(np.zeros(0, dtype=np.uint8), bit_rate)
    edges = np.minimum(_bit_boundaries(n_bits, spb), n)
    t = np.arange(n) / cfg.sample_rate
    bits = np.empty(n_bits, dtype=np.uint8)
    for i in range(n_bits):
        seg = wave.samples[edges[i]:edges[i + 1]]
        ts = t[edges[i]:edges[i + 1]]
        energies = []
        for f in (cfg.freq0, cfg.freq1):
            arg = 2.0 * np.pi * f * ts
            i_corr = float(np.dot(seg, np.cos(arg)))
            q_corr = float(np.dot(seg, np.sin(arg)))
            energies.append(i_corr * i_corr + q_corr * q_corr)
        bits[i] = 1 if energies[1] > energies[0] else 0
    return BitStream(bits, bit_rate)


def fsk_recover_stream(wave: Waveform, cfg: FskConfig,
                       cycles: float = 4.0) -> BitStream:
    """Recover the comparator stream behind an FSK reflection, per sample.

    The tag's comparator drives the tone multiplexer asynchronously, so
    transition timing far finer than any symbol clock survives in the
    reflection.  A sliding quadrature discriminator (window spanning
    ``cycles`` periods of the slower tone, centred on each sample) scores
    both tones everywhere; the louder tone gives the decision.  The output
    bit rate equals the waveform sample rate.

    Transitions blur by roughly half the discriminator window; interior
    decisions are reliable, the first and last half-window less so.
    """
    n = len(wave)
    if n == 0:
        return BitStream(np.zeros(0, dtype=np.uint8), cfg.sample_rate)
    if not cycles > 0:
        raise ParameterError(f"cycles must be positive, got {cycles}")
    slow = min(cfg.freq0, cfg.freq1)
    win = max(2, int(round(cycles * cfg.sample_rate / slow)))
    win = min(win, n)
    t = np.arange(n) / cfg.sample_rate
    kernel = np.ones(win)
    energies = []
    for f in (cfg.freq0, cfg.freq1):
        arg = 2.0 * np.pi * f * t
        i_corr = np.convolve(wave.samples * np.cos(arg), kernel, mode="same")
        q_corr = np.convolve(wave.samples * np.sin(arg), kernel, mode="same")
        energies.append(i_corr * i_corr + q_corr * q_corr)
    return BitStream((energies[1] > energies[0]).astype(np.uint8),
                     cfg.sample_rate)


def _as_series(x: Waveform | BitStream) -> tuple[np.ndarray, float]:
    if isinstance(x, BitStream):
        return x.signs(), x.bit_rate
    if isinstance(x, Waveform):
        return x.samples, x.sample_rate
    raise ParameterError(f"expected Waveform or BitStream, got {type(x).__name__}")


def _pearson_window(x: np.ndarray, k: int, yz: np.ndarray, ey2: float) -> float:
    """Exact Pearson correlation of x[k:k+m] against a pre-centred segment."""
    xw = x[k:k + yz.size]
    xz = xw - xw.mean()
    a = float(np.dot(xz, xz))
    if a == 0.0 and ey2 == 0.0:
        return 1.0
    if a == 0.0 or ey2 == 0.0:
        return 0.0
    # sqrt(fl(a*a)) == a in IEEE double, so a perfect match is exactly 1.0
    denom = math.sqrt(a * ey2)
    if denom == 0.0:
        # a*ey2 underflowed; the factored form cannot, since sqrt of a
        # positive subnormal is a positive normal number
        denom = math.sqrt(a) * math.sqrt(ey2)
    peak = float(np.dot(xz, yz)) / denom
    return min(1.0, max(-1.0, peak))


def _sliding_pearson(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pearson correlation of y against every full window of x.

    Sliding window sums give the per-lag mean and energy of the reference
    without materializing an (n-m+1, m) matrix.  Large problems route the
    dot products through the FFT; callers that need exact values at specific
    lags should recompute them with ``_pearson_window``.
    """
    n, m = x.size, y.size
    y_mean = y.mean()
    ey2 = float(np.dot(y - y_mean, y - y_mean))

    csum = np.concatenate(([0.0], np.cumsum(x)))
    csum2 = np.concatenate(([0.0], np.cumsum(x * x)))
    s1 = csum[m:] - csum[:-m]
    s2 = csum2[m:] - csum2[:-m]
    if n * m <= 5e7:
        dot = np.correlate(x, y, mode="valid")
    else:
        size = 1 << int(n + m - 1).bit_length()
        spec = np.fft.rfft(x, size) * np.fft.rfft(y[::-1], size)
        dot = np.fft.irfft(spec, size)[m - 1:n]
    num = dot - s1 * y_mean
    ex2 = np.maximum(s2 - s1 * s1 / m, 0.0)

    denom = np.sqrt(ex2 * ey2)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(denom > 0.0, num / denom, 0.0)
    if ey2 == 0.0:
        return np.where(ex2 == 0.0, 1.0, 0.0)
    corr[ex2 == 0.0] = 0.0
    return corr


def xcorr_offset(
    reference: Waveform | BitStream, segment: Waveform | BitStream
) -> tuple[float, float]:
    """Locate a segment inside a longer reference by normalized correlation.

    Every candidate placement keeps the segment fully inside the reference.
    Each window is compared Pearson-style (zero mean, unit energy), so a
    scaled or attenuated copy still correlates at 1.  Bit streams take part
    as +/-1 sequences.

    Returns:
        (lag_seconds, peak) where lag is the offset of the best placement in
        seconds and peak is the correlation value in [-1, 1].  Ties break
        toward the smallest lag.

    Conventions for degenerate windows: two zero-variance windows correlate
    at 1.0, a zero-variance window against a varying one at 0.0.
    """
    x, rate_x = _as_series(reference)
    y, rate_y = _as_series(segment)
    if not math.isclose(rate_x, rate_y, rel_tol=1e-9):
        raise ParameterError(
            f"sample rates must match: reference {rate_x}, segment {rate_y}"
        )
    n, m = x.size, y.size
    if m == 0:
        raise ParameterError("segment is empty")
    if m > n:
        raise ParameterError(
            f"segment ({m} samples) is longer than reference ({n} samples)"
        )

    yz = y - y.mean()
    ey2 = float(np.dot(yz, yz))
    corr = _sliding_pearson(x, y)

    # The scan locates the neighbourhood of the maximum; every lag within
    # scan tolerance of it is then recomputed directly so the result does not
    # depend on accumulated rounding, and true ties resolve to the smallest
    # lag.
    candidates = np.nonzero(corr >= corr.max() - 1e-6)[0]
    if candidates.size > 4096:
        # a plateau this wide is exact ties (periodic or degenerate windows);
        # the smallest lags plus the scan argmax cover every possible winner
        candidates = np.union1d(candidates[:4096], [int(np.argmax(corr))])
    best_lag, best_peak = 0, -np.inf
    for k in candidates:
        peak = _pearson_window(x, int(k), yz, ey2)
        if peak > best_peak:
            best_peak, best_lag = peak, int(k)
    return best_lag / rate_x, best_peak
