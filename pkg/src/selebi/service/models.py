"""Request and response bodies for the HTTP surface.

Range checking for the stretch parameters lives in `pipeline.StretchConfig`;
the models here only pin types and defaults so a request documents the full
knob set without duplicating those rules. Audio travels as base64-encoded
WAV bytes in both directions, which keeps the API a single JSON endpoint
instead of a multipart upload plus a side channel for the report.
"""

from typing import Literal, Optional

from pydantic import BaseModel

from ..evaluate import CASES
from ..pipeline import StretchConfig

Method = Literal["pv", "selebi"]
DumpKind = Literal["events", "grid", "mask", "curve"]


class StretchParams(BaseModel):
    alpha: float = 1.0
    method: Method = "selebi"
    window_length: int = 2048
    synthesis_hop: int = 128
    beta: float = 4.0
    theta_mag: float = 0.01
    theta_p_low: float = 0.5
    theta_p_high: float = 0.75
    median_kernel: int = 5
    min_prominence: float = 0.1
    detect_channel: Optional[int] = None

    def to_config(self, sample_rate):
        """Core configuration for audio at the given rate.

        Raises ValueError through StretchConfig when the combination is
        unusable, e.g. a synthesis hop smaller than alpha.
        """
        return StretchConfig(
            alpha=self.alpha,
            window_length=self.window_length,
            synthesis_hop=self.synthesis_hop,
            beta=self.beta,
            theta_mag=self.theta_mag,
            theta_p_low=self.theta_p_low,
            theta_p_high=self.theta_p_high,
            median_kernel=self.median_kernel,
            min_prominence=self.min_prominence,
            sample_rate=sample_rate,
        )


class StretchRequest(StretchParams):
    audio: str


class EventOut(BaseModel):
    frame: int
    rate: float


class ReportOut(BaseModel):
    method: str
    alpha: float
    events: list[EventOut]
    frames: int
    hops: dict[str, int]
    window_min: int
    window_max: int
    input_samples: int
    padded_samples: int
    output_samples: int
    rms_ratio: float
    elapsed_seconds: float


class StretchResponse(BaseModel):
    audio: str
    sample_rate: int
    encoding: str
    clipped: int
    report: ReportOut


class BenchRequest(BaseModel):
    methods: list[Method] = ["pv", "selebi"]
    cases: list[str] = list(CASES)
    alphas: list[float] = [2.0, 4.0]
    sample_rate: int = 22050
    duration: float = 1.0


class ErrorRow(BaseModel):
    method: str
    case: str
    alpha: float
    error: float
    frames_lo: int
    frames_hi: int


class BenchResponse(BaseModel):
    rows: list[ErrorRow]
    csv: str


class InspectRequest(StretchParams):
    audio: str
    dump: DumpKind = "events"


class InspectResponse(BaseModel):
    dump: DumpKind
    csv: str


class HealthResponse(BaseModel):
    status: str
    version: str
