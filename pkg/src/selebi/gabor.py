"""Gabor transforms on uniform and nonuniform time grids.

Analysis windows are centered on their frame positions (zero-phase
placement, taper sample j sits at offset j - floor(W/2)) and indexed
circularly over the signal length. The frequency modulation is relative
to the frame position, exp(-2j*pi*m*(l - A_n)/M), which is the convention
the phase-propagation code depends on. Synthesis applies the conjugate
modulation, also relative to the frame position, so that overlap-add with
dual windows inverts the analysis exactly whenever every window length
stays at or below the channel count M (the painless case, where the frame
operator is diagonal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FrameNotInvertibleError",
    "UniformGrid",
    "NonuniformGrid",
    "make_hann",
    "hann_windows",
    "dgt",
    "idgt",
    "dual_window",
    "nsdgt",
    "nsdgt_dual_windows",
    "insdgt",
]

# Relative floor below which the frame-operator diagonal counts as zero.
INVERTIBILITY_TOL = 1e-12


class FrameNotInvertibleError(RuntimeError):
    """Synthesis denominator vanishes at some sample, the frame has no dual.

    Attributes
    ----------
    sample_index : int
        First sample index where the frame-operator diagonal is (near) zero.
    """

    def __init__(self, sample_index, message=None):
        self.sample_index = int(sample_index)
        if message is None:
            message = (
                "frame not invertible: synthesis denominator vanishes at "
                f"sample {sample_index}"
            )
        super().__init__(message)


@dataclass(frozen=True)
class UniformGrid:
    """Frame timing for a constant-hop transform.

    Parameters
    ----------
    signal_length : int
        Number of signal samples L. Must be divisible by both `hop`
        (so the frame count is integral) and `channels` (so the painless
        inversion argument holds on the cyclic signal).
    hop : int
        Samples between consecutive frame positions.
    window_length : int
        Taper length W, at most `channels`.
    channels : int
        Number of frequency channels M per frame.
    """

    signal_length: int
    hop: int
    window_length: int
    channels: int

    def __post_init__(self):
        if self.hop < 1:
            raise ValueError("hop must be a positive integer")
        if self.window_length < 2:
            raise ValueError("window length must be at least 2 samples")
        if self.channels < 1:
            raise ValueError("channel count must be positive")
        if self.signal_length % self.hop:
            raise ValueError(
                f"hop {self.hop} does not divide signal length {self.signal_length}"
            )
        if self.signal_length % self.channels:
            raise ValueError(
                f"channel count {self.channels} does not divide signal "
                f"length {self.signal_length}"
            )
        if self.window_length > self.channels:
            raise ValueError(
                f"painless condition violated: window length {self.window_length} "
                f"exceeds channel count {self.channels}"
            )

    @property
    def frames(self):
        return self.signal_length // self.hop

    @property
    def positions(self):
        return np.arange(self.frames) * self.hop

    def as_nonuniform(self):
        """Equivalent constant-hop NonuniformGrid."""
        n = self.frames
        return NonuniformGrid(
            signal_length=self.signal_length,
            hops=(self.hop,) * n,
            window_lengths=(self.window_length,) * n,
            channels=self.channels,
        )


@dataclass(frozen=True)
class NonuniformGrid:
    """Frame timing with per-frame hops and window lengths.

    Frame n sits at position A_n = hops[0] + ... + hops[n-1] (A_0 = 0);
    the final hop wraps the grid around the cyclic signal, so the hops
    must sum to `signal_length` exactly.
    """

    signal_length: int
    hops: tuple
    window_lengths: tuple
    channels: int

    def __post_init__(self):
        hops = tuple(int(h) for h in self.hops)
        lengths = tuple(int(w) for w in self.window_lengths)
        object.__setattr__(self, "hops", hops)
        object.__setattr__(self, "window_lengths", lengths)
        if not hops:
            raise ValueError("grid needs at least one frame")
        if len(hops) != len(lengths):
            raise ValueError("hops and window lengths must pair up one per frame")
        if any(h < 1 for h in hops):
            raise ValueError("hops must be positive integers")
        if sum(hops) != self.signal_length:
            raise ValueError(
                f"hops sum to {sum(hops)}, expected signal length {self.signal_length}"
            )
        if any(w < 2 for w in lengths):
            raise ValueError("window lengths must be at least 2 samples")
        if any(w > self.channels for w in lengths):
            raise ValueError(
                "painless condition violated: some window length exceeds "
                f"channel count {self.channels}"
            )

    @property
    def frames(self):
        return len(self.hops)

    @property
    def positions(self):
        return np.concatenate(([0], np.cumsum(self.hops[:-1]))).astype(np.int64)


def make_hann(length):
    """Symmetric Hann taper (endpoints zero) of the given length.

    The symmetric variant keeps the taper even about its center, which the
    zero-phase window placement relies on; the periodic variant would
    shift every analysis phase by a fraction of a bin.
    """
    if length < 2:
        raise ValueError("window length must be at least 2 samples")
    return np.hanning(length)


def hann_windows(lengths):
    """Hann tapers for a sequence of lengths, sharing arrays for repeats."""
    cache = {}
    out = []
    for w in lengths:
        w = int(w)
        if w not in cache:
            cache[w] = make_hann(w)
        out.append(cache[w])
    return out


def _offsets(length):
    # Sample j of a taper sits at this offset from the frame position.
    return np.arange(length) - length // 2


def dgt(x, window, grid):
    """Gabor coefficients of `x` on a uniform grid.

    Returns the M x N complex matrix
    X[m, n] = sum_l x[l] * g[l - n*a] * exp(-2j*pi*m*(l - n*a)/M)
    with circular indexing, evaluated frame by frame through a length-M FFT
    of the windowed segment.
    """
    x = np.asarray(x)
    window = np.asarray(window, dtype=np.float64)
    if x.ndim != 1 or x.size != grid.signal_length:
        raise ValueError(
            f"signal has {x.size} samples, grid expects {grid.signal_length}"
        )
    if window.size != grid.window_length:
        raise ValueError(
            f"window has {window.size} samples, grid expects {grid.window_length}"
        )
    off = _offsets(window.size)
    idx = (grid.positions[:, None] + off[None, :]) % grid.signal_length
    seg = x[idx] * window
    buf = np.zeros((grid.frames, grid.channels), dtype=seg.dtype)
    buf[:, off % grid.channels] = seg
    return np.fft.fft(buf, axis=1).T


def idgt(X, dual, grid):
    """Overlap-add synthesis from uniform-grid coefficients.

    Inverts `dgt` when `dual` comes from `dual_window`. The imaginary
    residual of the accumulation is discarded; it vanishes (to rounding)
    whenever the coefficient columns are conjugate-symmetric, which is the
    case for every spectrogram this package synthesizes from.
    """
    X = np.asarray(X)
    dual = np.asarray(dual, dtype=np.float64)
    if X.shape != (grid.channels, grid.frames):
        raise ValueError(
            f"coefficients have shape {X.shape}, grid expects "
            f"{(grid.channels, grid.frames)}"
        )
    if dual.size != grid.window_length:
        raise ValueError("dual window length does not match the grid")
    off = _offsets(dual.size)
    frames = np.fft.ifft(X.T, axis=1) * grid.channels
    vals = frames[:, off % grid.channels] * dual
    idx = (grid.positions[:, None] + off[None, :]) % grid.signal_length
    acc = np.zeros(grid.signal_length, dtype=np.complex128)
    np.add.at(acc, idx, vals)
    return acc.real


def _frame_diagonal(windows, positions, signal_length):
    # Diagonal of the frame operator divided by M: sum_n g_n[l - A_n]^2.
    acc = np.zeros(signal_length)
    covered = np.zeros(signal_length, dtype=bool)
    for g, pos in zip(windows, positions):
        idx = (pos + _offsets(g.size)) % signal_length
        np.add.at(acc, idx, g * g)
        covered[idx[g != 0]] = True
    return acc, covered


def dual_window(window, grid):
    """Canonical dual of `window` on a uniform grid.

    dual[l] = g[l] / (M * sum_n g[l - n*a]^2); the denominator is
    hop-periodic, so one length-W taper serves every frame. Raises
    FrameNotInvertibleError when the denominator (near-)vanishes on the
    window support.
    """
    window = np.asarray(window, dtype=np.float64)
    if window.size != grid.window_length:
        raise ValueError("window length does not match the grid")
    acc, covered = _frame_diagonal(
        [window] * grid.frames, grid.positions, grid.signal_length
    )
    denom = grid.channels * acc
    bad = covered & (denom <= INVERTIBILITY_TOL * denom.max())
    if bad.any():
        raise FrameNotInvertibleError(np.flatnonzero(bad)[0])
    local = denom[_offsets(window.size) % grid.signal_length]
    return np.where(window != 0, window / np.where(local > 0, local, 1.0), 0.0)


def nsdgt(x, windows, grid):
    """Gabor coefficients on a nonuniform grid (per-frame windows and hops).

    X[m, n] = sum_l x[l] * g_n[l - A_n] * exp(-2j*pi*m*(l - A_n)/M).
    Reduces to `dgt` when every hop and window agree.
    """
    x = np.asarray(x)
    if x.ndim != 1 or x.size != grid.signal_length:
        raise ValueError(
            f"signal has {x.size} samples, grid expects {grid.signal_length}"
        )
    if len(windows) != grid.frames:
        raise ValueError("need exactly one window per frame")
    M = grid.channels
    out = np.empty((M, grid.frames), dtype=np.complex128)
    for n, (g, pos) in enumerate(zip(windows, grid.positions)):
        g = np.asarray(g, dtype=np.float64)
        if g.size != grid.window_lengths[n]:
            raise ValueError(f"window {n} length does not match the grid")
        off = _offsets(g.size)
        buf = np.zeros(M)
        buf[off % M] = x[(pos + off) % grid.signal_length] * g
        out[:, n] = np.fft.fft(buf)
    return out


def nsdgt_dual_windows(windows, grid):
    """Per-frame dual windows for painless nonuniform synthesis.

    dual_n[l] = g_n[l] / S[l + A_n] with the diagonal frame operator
    S[l] = M * sum_n g_n[l - A_n]^2. Raises FrameNotInvertibleError if S
    (near-)vanishes anywhere, since a gap in coverage loses those samples.
    """
    if len(windows) != grid.frames:
        raise ValueError("need exactly one window per frame")
    windows = [np.asarray(g, dtype=np.float64) for g in windows]
    acc, _ = _frame_diagonal(windows, grid.positions, grid.signal_length)
    S = grid.channels * acc
    tol = INVERTIBILITY_TOL * S.max() if S.size else 0.0
    if S.min() <= tol:
        raise FrameNotInvertibleError(int(np.argmin(S)))
    duals = []
    for g, pos in zip(windows, grid.positions):
        local = S[(pos + _offsets(g.size)) % grid.signal_length]
        duals.append(np.where(g != 0, g / local, 0.0))
    return duals


def insdgt(X, duals, grid):
    """Overlap-add synthesis from nonuniform-grid coefficients.

    Places each frame's inverse DFT, weighted by its dual window, at the
    frame position; inverts `nsdgt` when the duals come from
    `nsdgt_dual_windows`.
    """
    X = np.asarray(X)
    if X.shape != (grid.channels, grid.frames):
        raise ValueError(
            f"coefficients have shape {X.shape}, grid expects "
            f"{(grid.channels, grid.frames)}"
        )
    if len(duals) != grid.frames:
        raise ValueError("need exactly one dual window per frame")
    M = grid.channels
    acc = np.zeros(grid.signal_length, dtype=np.complex128)
    frames = np.fft.ifft(X, axis=0).T * M
    for n, (g, pos) in enumerate(zip(duals, grid.positions)):
        off = _offsets(g.size)
        vals = frames[n, off % M] * g
        np.add.at(acc, (pos + off) % grid.signal_length, vals)
    return acc.real
