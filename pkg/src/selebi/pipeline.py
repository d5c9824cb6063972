"""End-to-end time stretching.

Both stretchers share one engine: analyze on a (possibly nonuniform)
grid, advance phases to the stretched hop sequence, lock them to
spectral peaks, and overlap-add on the stretched grid. The baseline
keeps the uniform grid everywhere; the event-adaptive variant first
detects percussive events on a uniform scan and compresses the analysis
windows around them, which is the only point where the two paths
diverge. A run with zero detected events therefore reproduces the
baseline bit for bit.
"""

import math
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .adaptive_grid import (
    attach_events,
    build_grid,
    segment_regions,
    window_length_vector,
)
from .gabor import (
    FrameNotInvertibleError,
    NonuniformGrid,
    UniformGrid,
    dgt,
    hann_windows,
    insdgt,
    make_hann,
    nsdgt,
    nsdgt_dual_windows,
)
from .percussion import compression_curve, find_events, mpd, percussive_mask
from .phase import (
    identity_phase_lock,
    phase_time_derivative,
    propagate_phase,
    stretched_gaps,
)

__all__ = [
    "Analysis",
    "StretchConfig",
    "StretchReport",
    "analyze",
    "stretch",
    "stretch_pv",
    "stretch_selebi",
]

METHODS = ("pv", "selebi")


@dataclass(frozen=True)
class StretchConfig:
    """Stretch parameters plus the derived grid geometry.

    The synthesis hop is the anchor: the analysis hop is its floor
    quotient by alpha, so the synthesis grid keeps the same density for
    every stretch factor. `channels` left at 0 resolves to the smallest
    multiple of the analysis hop covering alpha times the window, which
    keeps the detection grid's divisibility requirements satisfiable by
    padding alone.
    """

    alpha: float = 1.0
    window_length: int = 2048
    synthesis_hop: int = 128
    channels: int = 0
    beta: float = 4.0
    theta_mag: float = 0.01
    theta_p_low: float = 0.5
    theta_p_high: float = 0.75
    median_kernel: int = 5
    min_prominence: float = 0.1
    sample_rate: int = 22050

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha < 1.0:
            raise ValueError("stretch factor must be a finite value of at least 1")
        if self.window_length < 2 or self.window_length % 2:
            raise ValueError("window length must be an even number of samples")
        if self.synthesis_hop < self.alpha:
            raise ValueError(
                "synthesis hop must be at least alpha, or the analysis hop vanishes"
            )
        if self.beta <= 1.0:
            raise ValueError("beta must exceed 1")
        if self.theta_mag <= 0.0:
            raise ValueError("theta_mag must be positive")
        if self.theta_p_low >= self.theta_p_high:
            raise ValueError("proximity thresholds must be ordered")
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ValueError("median kernel must be odd")
        if self.min_prominence < 0.0:
            raise ValueError("minimum prominence cannot be negative")
        if self.sample_rate < 1:
            raise ValueError("sample rate must be positive")
        if self.channels == 0:
            hop = self.analysis_hop
            wanted = math.ceil(self.alpha * self.window_length - 1e-9)
            object.__setattr__(self, "channels", -(-wanted // hop) * hop)
        if self.channels < self.window_length:
            raise ValueError("channel count must be at least the window length")

    @property
    def analysis_hop(self):
        return int(self.synthesis_hop / self.alpha)

    @property
    def pad_block(self):
        """Padded lengths must be multiples of this so the detection grid
        has integral frames and a cyclic-consistent channel count."""
        return math.lcm(self.analysis_hop, self.channels)


@dataclass(frozen=True, eq=False)
class Analysis:
    """Detection artifacts plus the analysis grid they produced."""

    detection: UniformGrid
    mask: np.ndarray
    curve: np.ndarray
    events: tuple
    grid: NonuniformGrid


@dataclass(frozen=True)
class StretchReport:
    method: str
    alpha: float
    events: tuple
    frames: int
    hop_counts: tuple
    window_min: int
    window_max: int
    input_samples: int
    padded_samples: int
    output_samples: int
    rms_ratio: float
    elapsed_seconds: float = field(compare=False)

    def to_dict(self):
        return {
            "method": self.method,
            "alpha": self.alpha,
            "events": [{"frame": e.frame, "rate": e.rate} for e in self.events],
            "frames": self.frames,
            "hops": {str(h): c for h, c in self.hop_counts},
            "window_min": self.window_min,
            "window_max": self.window_max,
            "input_samples": self.input_samples,
            "padded_samples": self.padded_samples,
            "output_samples": self.output_samples,
            "rms_ratio": self.rms_ratio,
            "elapsed_seconds": self.elapsed_seconds,
        }


def _as_samples(x):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (1, 2):
        raise ValueError("signal must be 1-D (samples) or 2-D (samples, channels)")
    if arr.shape[0] < 1:
        raise ValueError("signal is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal contains non-finite samples")
    return arr


def _mixdown(arr, detect_channel):
    if arr.ndim == 1:
        return arr
    if detect_channel is None:
        return arr.mean(axis=1)
    if not 0 <= detect_channel < arr.shape[1]:
        raise ValueError(f"detect_channel {detect_channel} out of range")
    return arr[:, detect_channel]


def _padded(x, total):
    out = np.zeros(total)
    out[: x.size] = x
    return out


def _detect(mono, cfg, original):
    """Percussive events of the zero-padded mixdown, restricted to frames
    whose window sits fully inside the original extent.

    The compression rate is a magnitude ratio, so near-silent columns at
    the padding seam and at fade edges can score high and fire spurious
    events; windows straddling the input boundary degrade to the uniform
    grid instead.
    """
    grid = UniformGrid(
        signal_length=mono.size,
        hop=cfg.analysis_hop,
        window_length=cfg.window_length,
        channels=cfg.channels,
    )
    X = dgt(mono, make_hann(cfg.window_length), grid)
    scores = mpd(X, grid)
    mask = percussive_mask(
        X,
        scores,
        theta_mag=cfg.theta_mag,
        theta_p_low=cfg.theta_p_low,
        theta_p_high=cfg.theta_p_high,
    )
    curve = compression_curve(X, mask, median_kernel=cfg.median_kernel)
    half = cfg.window_length // 2
    first = -(-half // cfg.analysis_hop)
    last = (original - half) // cfg.analysis_hop
    events = tuple(
        e for e in find_events(curve, min_prominence=cfg.min_prominence)
        if first <= e.frame <= last
    )
    return grid, mask, curve, events


def _plan(events, cfg, total):
    frames = total // cfg.analysis_hop
    v = window_length_vector(
        events, cfg.window_length, cfg.analysis_hop, frames, cfg.alpha
    )
    regions = attach_events(segment_regions(v, cfg.window_length), events)
    grid, _ = build_grid(
        v,
        regions,
        cfg.analysis_hop,
        cfg.alpha,
        cfg.beta,
        cfg.window_length,
        cfg.channels,
    )
    return grid


def analyze(x, cfg, method="selebi", detect_channel=None):
    """Run detection and grid planning without synthesizing audio."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    arr = _as_samples(x)
    original = arr.shape[0]
    total = -(-original // cfg.pad_block) * cfg.pad_block
    mono = _padded(_mixdown(arr, detect_channel), total)
    detection, mask, curve, events = _detect(mono, cfg, original)
    planned = events if method == "selebi" else ()
    return Analysis(
        detection=detection,
        mask=mask,
        curve=curve,
        events=planned,
        grid=_plan(planned, cfg, total),
    )


def _stretch_channel(x, grid, cfg, out_grid, windows, duals):
    hops = np.asarray(grid.hops, dtype=np.int64)
    X = nsdgt(x, windows, grid)
    magnitude = np.abs(X)
    phase = np.angle(X)
    del X
    delta = phase_time_derivative(phase, hops, cfg.channels)
    propagated = propagate_phase(delta, cfg.alpha, hops, phase[:, 0])
    del delta
    locked = identity_phase_lock(magnitude, phase, propagated, cfg.theta_mag)
    del propagated, phase
    return insdgt(magnitude * np.exp(1j * locked), duals, out_grid)


def stretch(x, cfg, method="selebi", detect_channel=None):
    """Stretch a signal by cfg.alpha; returns (audio, report).

    2-D input is interpreted as (samples, channels); all channels share
    one grid, planned from events of the channel mixdown (or of the
    channel picked by `detect_channel`) so transients stay aligned
    across channels.
    """
    started = time.perf_counter()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    arr = _as_samples(x)
    original = arr.shape[0]
    total = -(-original // cfg.pad_block) * cfg.pad_block

    events = ()
    if method == "selebi":
        mono = _padded(_mixdown(arr, detect_channel), total)
        _, _, _, events = _detect(mono, cfg, original)
    grid = _plan(events, cfg, total)

    steps = stretched_gaps(np.asarray(grid.hops, dtype=np.int64), cfg.alpha)
    out_grid = NonuniformGrid(
        signal_length=int(steps.sum()),
        hops=tuple(int(s) for s in steps),
        window_lengths=grid.window_lengths,
        channels=cfg.channels,
    )
    windows = hann_windows(grid.window_lengths)
    try:
        duals = nsdgt_dual_windows(windows, out_grid)
    except FrameNotInvertibleError as err:
        err.grid = out_grid
        raise

    target = math.ceil(cfg.alpha * original - 1e-9)
    if arr.ndim == 1:
        out = _stretch_channel(_padded(arr, total), grid, cfg, out_grid, windows, duals)
        out = out[:target]
    else:
        out = np.stack(
            [
                _stretch_channel(
                    _padded(arr[:, c], total), grid, cfg, out_grid, windows, duals
                )[:target]
                for c in range(arr.shape[1])
            ],
            axis=1,
        )

    in_rms = float(np.sqrt(np.mean(arr**2)))
    out_rms = float(np.sqrt(np.mean(out**2)))
    lengths = np.asarray(grid.window_lengths)
    report = StretchReport(
        method=method,
        alpha=cfg.alpha,
        events=events,
        frames=grid.frames,
        hop_counts=tuple(sorted(Counter(grid.hops).items())),
        window_min=int(lengths.min()),
        window_max=int(lengths.max()),
        input_samples=original,
        padded_samples=total,
        output_samples=target,
        rms_ratio=out_rms / in_rms if in_rms > 0 else 0.0,
        elapsed_seconds=time.perf_counter() - started,
    )
    return out, report


def stretch_pv(x, cfg, detect_channel=None):
    """Baseline uniform-grid stretch; returns the audio alone."""
    out, _ = stretch(x, cfg, method="pv", detect_channel=detect_channel)
    return out


def stretch_selebi(x, cfg, detect_channel=None):
    """Event-adaptive stretch; returns (audio, report)."""
    return stretch(x, cfg, method="selebi", detect_channel=detect_channel)
