"""CSV renderings of analysis products.

Shared by the command line and the HTTP service so both emit identical
artifacts for the same audio and parameters. Every renderer takes the
`Analysis` returned by `pipeline.analyze` and produces a complete CSV
document, header included, with a trailing newline.
"""

import numpy as np

__all__ = ["KINDS", "render"]

KINDS = ("events", "grid", "mask", "curve")


def _events(analysis):
    lines = ["frame,rate"]
    lines.extend(f"{ev.frame},{ev.rate:.6g}" for ev in analysis.events)
    return lines


def _grid(analysis):
    # Position column is the running hop sum, so hops can be re-checked
    # against the padded signal length from the dump alone.
    lines = ["position,hop,window_length"]
    position = 0
    grid = analysis.grid
    for hop, length in zip(grid.hops, grid.window_lengths):
        lines.append(f"{position},{hop},{length}")
        position += hop
    return lines


def _mask(analysis):
    # Sparse cell list; a dense dump of the full time-frequency grid
    # would be megabytes of zeros for a few seconds of audio.
    lines = ["frame,bin"]
    frames, bins = np.nonzero(np.asarray(analysis.mask).T)
    lines.extend(f"{f},{b}" for f, b in zip(frames, bins))
    return lines


def _curve(analysis):
    lines = ["frame,rate"]
    lines.extend(
        f"{n},{value:.6g}" for n, value in enumerate(np.asarray(analysis.curve))
    )
    return lines


_RENDERERS = {
    "events": _events,
    "grid": _grid,
    "mask": _mask,
    "curve": _curve,
}


def render(kind, analysis):
    """CSV text for one dump kind."""
    try:
        renderer = _RENDERERS[kind]
    except KeyError:
        raise ValueError(f"unknown dump kind {kind!r}, expected one of {KINDS}")
    return "\n".join(renderer(analysis)) + "\n"
