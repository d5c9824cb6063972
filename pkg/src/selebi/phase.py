"""Synthesis phase generation for time stretching.

The instantaneous phase advance of each bin is estimated from
consecutive analysis frames by heterodyning with the bin center
frequency, wrapping to the principal value, and adding the center back.
Integrating those derivatives over the stretched hop sequence yields the
synthesis phase; identity locking then rigidifies each spectral peak's
neighborhood so sidelobe bins keep their analysis phase relations
instead of drifting apart.
"""

import numpy as np

from .percussion import principal

__all__ = [
    "phase_time_derivative",
    "propagate_phase",
    "stretched_gaps",
    "identity_phase_lock",
]


def _gaps(hops, columns):
    """Hop between consecutive frames, one entry per column after the
    first. Accepts either the full per-frame hop vector (whose last
    entry closes the circle and is unused here) or exactly columns-1
    gaps."""
    hops = np.asarray(hops, dtype=np.int64)
    if hops.ndim != 1 or hops.size < columns - 1:
        raise ValueError(f"need at least {columns - 1} hops, got {hops.size}")
    if np.any(hops[: columns - 1] < 1):
        raise ValueError("hops must be positive")
    return hops[: columns - 1]


def stretched_gaps(hops, alpha, columns=None):
    """Stretched hop sequence, each gap scaled by alpha and rounded up.

    The small backoff keeps exact products like 1.1*50 from landing one
    integer too high after rounding in binary.
    """
    if alpha < 1.0:
        raise ValueError("stretch factor must be at least 1")
    hops = np.asarray(hops, dtype=np.int64)
    if columns is not None:
        hops = _gaps(hops, columns)
    return np.ceil(alpha * hops - 1e-9).astype(np.int64)


def phase_time_derivative(phase, hops, channels):
    """Per-bin instantaneous phase advance per sample, from Eq.-style
    heterodyned principal differences.

    Column n uses the hop separating frames n-1 and n. Column 0 has no
    predecessor and falls back to the bin center frequency 2*pi*m/M,
    which makes integration start from the original phase without a
    spurious first step.
    """
    phase = np.asarray(phase)
    if phase.ndim != 2 or phase.shape[0] != channels:
        raise ValueError(f"phase matrix must have {channels} rows")
    rows, columns = phase.shape
    center = 2.0 * np.pi * np.arange(rows)[:, None] / channels
    out = np.empty_like(phase, dtype=np.float64)
    out[:, :1] = center
    if columns == 1:
        return out
    gaps = _gaps(hops, columns)
    diff = phase[:, 1:] - phase[:, :-1]
    wrapped = principal(diff - center * gaps[None, :])
    out[:, 1:] = wrapped / gaps[None, :] + center
    return out


def propagate_phase(derivative, alpha, hops, initial):
    """Integrate phase derivatives over the stretched hop sequence.

    The first output column is the seed (normally the original phase of
    frame 0); each later column advances by ceil(alpha * hop) times its
    derivative.
    """
    derivative = np.asarray(derivative)
    initial = np.asarray(initial, dtype=np.float64)
    rows, columns = derivative.shape
    if initial.shape != (rows,):
        raise ValueError("seed column does not match the derivative matrix")
    if columns == 1:
        return initial[:, None].copy()
    steps = stretched_gaps(hops, alpha, columns)
    increments = derivative[:, 1:] * steps[None, :]
    out = np.empty((rows, columns), dtype=np.float64)
    out[:, 0] = initial
    np.cumsum(increments, axis=1, out=out[:, 1:])
    out[:, 1:] += initial[:, None]
    return out


def identity_phase_lock(magnitude, phase, propagated, theta_mag=0.01):
    """Re-anchor non-peak bins to their peak's propagated phase.

    Peaks are strict local magnitude maxima over bins (array ends count
    as below everything) above theta_mag times the global magnitude
    maximum. Each remaining bin joins the region of its nearest peak,
    regions splitting at the leftmost magnitude minimum between peaks,
    and keeps its analysis phase offset from that peak. Columns without
    peaks (silence, or flat impulse columns) pass through unchanged.
    """
    magnitude = np.asarray(magnitude)
    phase = np.asarray(phase)
    propagated = np.asarray(propagated)
    if not magnitude.shape == phase.shape == propagated.shape:
        raise ValueError("magnitude and phase matrices must share shape")
    if theta_mag <= 0:
        raise ValueError("theta_mag must be positive")
    out = propagated.copy()
    floor = theta_mag * magnitude.max()
    if floor == 0.0:
        return out
    rows = magnitude.shape[0]
    interior_peak = np.zeros_like(magnitude, dtype=bool)
    interior_peak[1:-1, :] = (magnitude[1:-1, :] > magnitude[:-2, :]) & (
        magnitude[1:-1, :] > magnitude[2:, :]
    )
    if rows >= 2:
        interior_peak[0, :] = magnitude[0, :] > magnitude[1, :]
        interior_peak[-1, :] = magnitude[-1, :] > magnitude[-2, :]
    interior_peak &= magnitude > floor
    for n in np.flatnonzero(interior_peak.any(axis=0)):
        peaks = np.flatnonzero(interior_peak[:, n])
        anchor = np.empty(rows, dtype=np.int64)
        anchor[: peaks[0] + 1] = peaks[0]
        for p, q in zip(peaks[:-1], peaks[1:]):
            valley = p + int(np.argmin(magnitude[p : q + 1, n]))
            anchor[p : valley + 1] = p
            anchor[valley + 1 : q + 1] = q
        anchor[peaks[-1] :] = peaks[-1]
        out[:, n] = propagated[anchor, n] + (phase[:, n] - phase[anchor, n])
    return out
