"""Adaptive analysis grids around percussive events.

Detected events shrink the analysis window linearly (in steps of twice
the hop) down to a per-event shortest length, producing a window length
vector on the original uniform grid. That vector segments into runs of
four kinds: constant at the full length, constant at an event plateau,
shrinking, and growing. Each region is then re-gridded: plateaus tile
with an adaptive hop, transitions get a linear hop ramp between endpoint
hops inferred from the neighboring regions, and every region's realized
hops sum exactly to its original duration, so region boundaries keep
their original sample positions.
"""

import math
from dataclasses import dataclass

import numpy as np

from .gabor import NonuniformGrid

__all__ = [
    "DegenerateTransitionError",
    "Region",
    "shortest_window",
    "window_length_vector",
    "segment_regions",
    "attach_events",
    "adaptive_hop",
    "transition_frame_count",
    "transition_hops",
    "build_grid",
]


class DegenerateTransitionError(ValueError):
    """A transition region is too short for even one ramp frame."""


@dataclass(frozen=True)
class Region:
    """Half-open frame interval [start, end) of one grid region.

    kind is "long" (full window length), "short" (event plateau), "down"
    (shrinking windows) or "up" (growing windows). event is the index of
    the plateau's event when one has been attached.
    """

    kind: str
    start: int
    end: int
    event: int | None = None


def shortest_window(total, rate, alpha):
    """Shortest window length reached at an event of the given rate.

    total is the full analysis window length V; a rate of 1 at stretch
    factor alpha shrinks the window by the factor that keeps the event's
    stretched smearing equal to its analysis smearing. Rate 0 leaves the
    window untouched.
    """
    if total < 2:
        raise ValueError("window length must be at least 2")
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    if alpha < 1.0:
        raise ValueError("stretch factor must be at least 1")
    return max(2, math.floor(total - rate * rate * (1.0 - 1.0 / alpha) * total))


def window_length_vector(events, total, hop, frames, alpha):
    """Per-frame window lengths on the original grid, full length outside
    all event neighborhoods.

    Around each event the length ramps down by 2*hop per frame to that
    event's shortest length; overlapping neighborhoods take the
    elementwise minimum. Neighborhoods truncate at the array edges
    instead of wrapping, so shortening never couples signal start and
    end.
    """
    n_half = -(-total // (2 * hop))
    v = np.full(frames, total, dtype=np.int64)
    for event in events:
        shortest = shortest_window(total, event.rate, alpha)
        lo = max(0, event.frame - n_half)
        hi = min(frames - 1, event.frame + n_half)
        if lo > hi:
            continue
        offsets = np.abs(np.arange(lo, hi + 1) - event.frame)
        candidate = np.maximum(shortest, 2 * hop * offsets + total - 2 * hop * n_half)
        v[lo : hi + 1] = np.minimum(v[lo : hi + 1], candidate)
    return v


def _runs(v):
    """Run-length encoding of v as (value, start, end) triples."""
    edges = np.flatnonzero(np.diff(v)) + 1
    starts = np.concatenate([[0], edges])
    ends = np.concatenate([edges, [v.size]])
    return [(int(v[s]), int(s), int(e)) for s, e in zip(starts, ends)]


def segment_regions(v, total):
    """Split a window length vector into maximal typed regions.

    Full-length runs are "long". Local-minimum runs are event plateaus
    ("short"), and so are interior shelves at least two frames wide,
    which arise when neighborhoods of events with different rates merge.
    What remains are monotone stretches ("down"/"up"); a stretch that
    peaks without reaching the full length splits at the first frame of
    its maximum, the peak joining the descending side.
    """
    v = np.asarray(v)
    if v.size == 0:
        raise ValueError("window length vector is empty")
    if np.any(v < 2) or np.any(v > total):
        raise ValueError("window lengths must lie in [2, total]")
    runs = _runs(v)
    kinds = []
    for i, (value, start, end) in enumerate(runs):
        prev_value = runs[i - 1][0] if i > 0 else None
        next_value = runs[i + 1][0] if i + 1 < len(runs) else None
        if value == total:
            kinds.append("long")
            continue
        falls_in = prev_value is None or prev_value > value
        rises_out = next_value is None or next_value > value
        if falls_in and rises_out:
            kinds.append("short")
        elif prev_value is not None and next_value is not None and not falls_in and not rises_out:
            kinds.append("peak")
        elif end - start >= 2:
            # A flat non-extremal run is an event floor shelf; true ramps
            # move every frame.
            kinds.append("short")
        else:
            kinds.append("ramp")

    regions = []

    def add(kind, start, end):
        if end > start:
            regions.append(Region(kind, start, end))

    i = 0
    while i < len(runs):
        if kinds[i] in ("long", "short"):
            add(kinds[i], runs[i][1], runs[i][2])
            i += 1
            continue
        j = i
        while j < len(runs) and kinds[j] not in ("long", "short"):
            j += 1
        start, end = runs[i][1], runs[j - 1][2]
        peak = next((t for t in range(i, j) if kinds[t] == "peak"), None)
        if peak is not None:
            add("up", start, runs[peak][1])
            add("down", runs[peak][1], end)
        else:
            if j - i >= 2:
                ascending = runs[j - 1][0] > runs[i][0]
            else:
                left = runs[i - 1][0] if i > 0 else None
                right = runs[j][0] if j < len(runs) else None
                if left is None:
                    ascending = right is not None and right > runs[i][0]
                elif right is None:
                    ascending = runs[i][0] > left
                else:
                    ascending = right > left
            add("up" if ascending else "down", start, end)
        i = j
    return regions


def attach_events(regions, events):
    """Label each plateau region with the index of the event it holds.

    An event belongs to the region containing its frame; plateaus
    without any event (artifacts of merged neighborhoods) stay
    unlabeled.
    """
    labeled = []
    for region in regions:
        index = None
        if region.kind == "short":
            for k, event in enumerate(events):
                if region.start <= event.frame < region.end:
                    index = k
                    break
        labeled.append(Region(region.kind, region.start, region.end, index))
    return labeled


def adaptive_hop(shortest, alpha, beta):
    """Analysis hop used while the window sits at an event plateau.

    Chosen so the stretched hop keeps a fixed overlap factor beta with
    the shortened window; never below 1.
    """
    if shortest < 1:
        raise ValueError("window length must be positive")
    if alpha < 1.0:
        raise ValueError("stretch factor must be at least 1")
    if beta <= 1.0:
        raise ValueError("overlap factor must exceed 1")
    return max(1, round(shortest / (alpha * beta)))


def transition_frame_count(a_start, a_end, n_org, hop):
    """Number of ramp frames replacing n_org original frames.

    The half-difference shift centers the ramp so its average hop matches
    the region duration; raising on a result below 1 lets callers fall
    back to a single hop spanning the whole region.
    """
    if a_start < 1 or a_end < 1:
        raise ValueError("endpoint hops must be positive")
    if n_org < 1:
        raise ValueError("region must contain at least one frame")
    n_new = (2 * hop * n_org - (a_start - a_end)) // (a_start + a_end)
    if n_new < 1:
        raise DegenerateTransitionError(
            f"transition of {n_org} frames cannot ramp {a_start} -> {a_end}"
        )
    return n_new


def transition_hops(a_start, a_end, n_new, n_org, hop):
    """Linear hop ramp between two endpoint hops, duration-exact.

    Hops are laid out from the larger endpoint down to the smaller, the
    leftover duration is appended as two final correction hops (halves of
    the residual, zeros skipped), and the whole sequence is reversed when
    the larger endpoint is the later one. The sum is n_org*hop exactly.
    """
    if n_new < 1:
        raise ValueError("need at least one ramp frame")
    a_max, a_min = max(a_start, a_end), min(a_start, a_end)
    spread = a_max - a_min
    seq = [a_max - (l * spread + n_new - 1) // n_new for l in range(1, n_new + 1)]
    residual = n_org * hop - sum(seq)
    if residual < 0:
        raise ValueError("ramp exceeds region duration")
    for piece in (residual // 2, residual - residual // 2):
        if piece:
            seq.append(piece)
    if a_start < a_end:
        seq.reverse()
    return seq


def _boundary_hop(neighbor, boundary_value, v, hop, alpha, beta, total):
    """Endpoint hop of a transition, from what lies beyond the boundary.

    Full-length neighbors keep the uniform hop; plateaus contribute their
    adaptive hop; a peak split between two ramps, or an array edge, gets
    a hop scaled by the local window length (the boundary-window rule).
    """
    if neighbor is not None and neighbor.kind == "long":
        return hop
    if neighbor is not None and neighbor.kind == "short":
        return adaptive_hop(int(v[neighbor.start]), alpha, beta)
    return max(1, round(hop * boundary_value / total))


def build_grid(v, regions, hop, alpha, beta, total, channels):
    """Realize the nonuniform analysis grid for a window length vector.

    Returns the grid plus the per-frame window lengths (the same values
    the grid holds, as an array). Long regions keep the uniform hop and
    length; plateaus tile with their adaptive hop plus one remainder hop;
    transitions ramp linearly between endpoint hops with exact duration
    correction, collapsing to a single hop when too short to ramp. New
    window lengths interpolate v at the new positions, rounded down to
    even.
    """
    v = np.asarray(v)
    frames = v.size
    hops = []
    for index, region in enumerate(regions):
        n_org = region.end - region.start
        duration = n_org * hop
        if region.kind == "long":
            hops.extend([hop] * n_org)
        elif region.kind == "short":
            tile = adaptive_hop(int(v[region.start]), alpha, beta)
            count, leftover = divmod(duration, tile)
            hops.extend([tile] * count)
            if leftover:
                hops.append(leftover)
        else:
            left = regions[index - 1] if index > 0 else None
            right = regions[index + 1] if index + 1 < len(regions) else None
            # Boundary frames belong to the following region, so the
            # right-hand boundary value lives at region.end.
            a_start = _boundary_hop(
                left, int(v[region.start]), v, hop, alpha, beta, total
            )
            a_end = _boundary_hop(
                right, int(v[min(region.end, frames - 1)]), v, hop, alpha, beta, total
            )
            try:
                n_new = transition_frame_count(a_start, a_end, n_org, hop)
            except DegenerateTransitionError:
                hops.append(duration)
                continue
            hops.extend(transition_hops(a_start, a_end, n_new, n_org, hop))

    positions = np.concatenate([[0], np.cumsum(hops[:-1])])
    original = np.arange(frames) * hop
    lengths = np.interp(positions, original, v.astype(np.float64))
    lengths = np.maximum(2, (lengths.astype(np.int64) // 2) * 2)
    grid = NonuniformGrid(
        signal_length=frames * hop,
        hops=tuple(hops),
        window_lengths=tuple(int(w) for w in lengths),
        channels=channels,
    )
    return grid, lengths.astype(np.int64)
