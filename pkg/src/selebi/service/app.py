"""HTTP wrapper around the stretch pipeline.

Handlers are stateless and run in-process: decode the posted WAV, run the
core call, encode the result. Anything the caller can fix by changing the
request (bad base64, unreadable WAV, rejected parameters) comes back as a
400 with the original message. A frame with no dual window is special: the
parameters are individually valid but fail on that signal, so it maps to
422 and carries the first bad sample index.
"""

import base64
import binascii

from fastapi import FastAPI, HTTPException

from .. import __version__, dumps
from ..evaluate import run_table, to_csv
from ..gabor import FrameNotInvertibleError
from ..pipeline import analyze, stretch
from ..wavio import WavError, decode_wav, encode_wav
from . import models

__all__ = ["create_app"]


def _decoded(request):
    try:
        blob = base64.b64decode(request.audio, validate=True)
    except (binascii.Error, ValueError) as err:
        raise HTTPException(400, f"audio is not valid base64: {err}")
    try:
        return decode_wav(blob)
    except WavError as err:
        raise HTTPException(400, f"audio is not a readable WAV file: {err}")


def _config(params, rate):
    try:
        return params.to_config(rate)
    except ValueError as err:
        raise HTTPException(400, str(err))


def create_app():
    app = FastAPI(title="selebi", version=__version__)

    @app.get("/health", response_model=models.HealthResponse)
    def health():
        return models.HealthResponse(status="ok", version=__version__)

    @app.post("/stretch", response_model=models.StretchResponse)
    def stretch_audio(request: models.StretchRequest):
        samples, rate, encoding = _decoded(request)
        cfg = _config(request, rate)
        try:
            out, report = stretch(
                samples, cfg, method=request.method,
                detect_channel=request.detect_channel,
            )
        except FrameNotInvertibleError as err:
            raise HTTPException(422, {
                "message": str(err),
                "sample_index": err.sample_index,
            })
        except ValueError as err:
            raise HTTPException(400, str(err))
        blob, clipped = encode_wav(out, rate, encoding)
        return models.StretchResponse(
            audio=base64.b64encode(blob).decode("ascii"),
            sample_rate=rate,
            encoding=encoding,
            clipped=clipped,
            report=models.ReportOut.model_validate(report.to_dict()),
        )

    @app.post("/bench", response_model=models.BenchResponse)
    def bench(request: models.BenchRequest):
        try:
            results = run_table(
                methods=tuple(request.methods),
                cases=tuple(request.cases),
                alphas=tuple(request.alphas),
                fs=request.sample_rate,
                duration=request.duration,
            )
        except ValueError as err:
            raise HTTPException(400, str(err))
        rows = [
            models.ErrorRow(
                method=r.method, case=r.case, alpha=r.alpha, error=r.error,
                frames_lo=r.frames_lo, frames_hi=r.frames_hi,
            )
            for r in results
        ]
        return models.BenchResponse(rows=rows, csv=to_csv(results))

    @app.post("/inspect", response_model=models.InspectResponse)
    def inspect(request: models.InspectRequest):
        samples, rate, _ = _decoded(request)
        cfg = _config(request, rate)
        try:
            analysis = analyze(
                samples, cfg, method=request.method,
                detect_channel=request.detect_channel,
            )
        except ValueError as err:
            raise HTTPException(400, str(err))
        return models.InspectResponse(
            dump=request.dump, csv=dumps.render(request.dump, analysis)
        )

    return app
