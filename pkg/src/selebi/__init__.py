"""Event-adaptive time stretching for audio.

Phase-vocoder time-scale modification in which analysis windows and hops
contract around detected percussive events, so transients survive
stretching without smearing. Includes a fixed-window baseline and an
objective evaluation harness over synthetic test signals.

The usual entry points:

>>> from selebi import StretchConfig, stretch
>>> cfg = StretchConfig(alpha=2.0)
>>> stretched, report = stretch(samples, cfg)      # doctest: +SKIP

plus `read_wav`/`write_wav` for files, `run_table` for the synthetic
error table, and `selebi.service.create_app` for the HTTP surface.
"""

__version__ = "0.1.0"

from .evaluate import CASES, gen_case, gen_ground_truth, run_table, to_csv
from .gabor import FrameNotInvertibleError
from .pipeline import (
    Analysis,
    StretchConfig,
    StretchReport,
    analyze,
    stretch,
    stretch_pv,
    stretch_selebi,
)
from .wavio import WavError, decode_wav, encode_wav, read_wav, write_wav

__all__ = [
    "Analysis",
    "CASES",
    "FrameNotInvertibleError",
    "StretchConfig",
    "StretchReport",
    "WavError",
    "analyze",
    "decode_wav",
    "encode_wav",
    "gen_case",
    "gen_ground_truth",
    "read_wav",
    "run_table",
    "stretch",
    "stretch_pv",
    "stretch_selebi",
    "to_csv",
    "write_wav",
    "__version__",
]
