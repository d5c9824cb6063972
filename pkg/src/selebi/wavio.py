"""RIFF/WAVE file access for the command-line and service layers.

Reads and writes the three encodings the tools exchange: 16 and 24 bit
integer PCM and 32 bit IEEE float, mono or multichannel, plain or
extensible fmt chunks.  The standard-library wave module cannot express
the float variant, so the container is handled directly; everything is
plain chunk walking over bytes.

Samples cross this boundary as float64 in [-1, 1): integers are scaled
by their full-scale value on read and rounded back on write.  Writing
reports how many samples had to be clamped into range, since stretching
can overshoot full scale.
"""

import struct
from pathlib import Path

import numpy as np

__all__ = [
    "ENCODINGS",
    "WavError",
    "decode_wav",
    "encode_wav",
    "read_wav",
    "write_wav",
]

_PCM = 1
_FLOAT = 3
_EXTENSIBLE = 0xFFFE

# encoding name -> (bits per sample, format code)
ENCODINGS = {
    "pcm16": (16, _PCM),
    "pcm24": (24, _PCM),
    "float32": (32, _FLOAT),
}

_FULL_SCALE = {"pcm16": 2 ** 15, "pcm24": 2 ** 23}


class WavError(ValueError):
    """A file that cannot be parsed, or audio that cannot be encoded."""


def _chunks(blob):
    pos = 12
    while pos + 8 <= len(blob):
        ident = blob[pos : pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        body = blob[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise WavError("truncated chunk " + ident.decode("latin1"))
        yield ident, body
        # chunks are word-aligned: odd sizes carry a pad byte
        pos += 8 + size + (size & 1)


def _parse_fmt(body):
    if len(body) < 16:
        raise WavError("fmt chunk too short")
    code, channels, rate, _, block, bits = struct.unpack_from("<HHIIHH", body, 0)
    if code == _EXTENSIBLE:
        if len(body) < 40:
            raise WavError("extensible fmt chunk too short")
        # the real format code is the leading word of the SubFormat GUID
        (code,) = struct.unpack_from("<H", body, 24)
    if channels < 1:
        raise WavError("no channels")
    if rate < 1:
        raise WavError("bad sample rate")
    for name, (enc_bits, enc_code) in ENCODINGS.items():
        if bits == enc_bits and code == enc_code:
            encoding = name
            break
    else:
        raise WavError(f"unsupported sample format (code {code}, {bits} bit)")
    if block != channels * bits // 8:
        raise WavError("block alignment does not match the sample format")
    return encoding, channels, rate, block


def _decode(data, encoding, channels):
    if encoding == "pcm16":
        flat = np.frombuffer(data, dtype="<i2").astype(np.float64)
        flat /= _FULL_SCALE["pcm16"]
    elif encoding == "pcm24":
        raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3)
        flat = (
            raw[:, 0].astype(np.int32)
            | raw[:, 1].astype(np.int32) << 8
            | raw[:, 2].astype(np.int32) << 16
        )
        flat = np.where(flat >= 1 << 23, flat - (1 << 24), flat).astype(np.float64)
        flat /= _FULL_SCALE["pcm24"]
    else:
        flat = np.frombuffer(data, dtype="<f4").astype(np.float64)
    frames = flat.reshape(-1, channels)
    return frames[:, 0] if channels == 1 else frames


def decode_wav(blob):
    """Decode WAV bytes to (samples, rate, encoding).

    Samples are float64, shape (n,) for mono and (n, channels)
    otherwise.  Unknown chunks are skipped.
    """
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise WavError("not a RIFF/WAVE file")
    fmt = data = None
    for ident, body in _chunks(blob):
        if ident == b"fmt ":
            fmt = body
        elif ident == b"data":
            data = body
    if fmt is None:
        raise WavError("missing fmt chunk")
    if data is None:
        raise WavError("missing data chunk")
    encoding, channels, rate, block = _parse_fmt(fmt)
    if len(data) % block:
        raise WavError("data chunk is not a whole number of frames")
    return _decode(data, encoding, channels), rate, encoding


def _encode(frames, encoding):
    if encoding == "float32":
        return frames.astype("<f4").tobytes(), 0
    scale = _FULL_SCALE[encoding]
    ints = np.round(frames * scale)
    clipped = int(np.count_nonzero((ints < -scale) | (ints > scale - 1)))
    ints = np.clip(ints, -scale, scale - 1).astype(np.int32)
    if encoding == "pcm16":
        return ints.astype("<i2").tobytes(), clipped
    raw = ints.astype("<i4").view(np.uint8).reshape(-1, 4)[:, :3]
    return raw.tobytes(), clipped


def encode_wav(samples, rate, encoding="pcm16"):
    """Encode samples to WAV bytes; returns (blob, clipped count).

    Integer encodings clamp out-of-range values to full scale; the
    caller decides whether the returned count warrants a warning.
    """
    if encoding not in ENCODINGS:
        raise WavError(f"unknown encoding {encoding!r}")
    if int(rate) < 1:
        raise WavError("bad sample rate")
    frames = np.asarray(samples, dtype=np.float64)
    if frames.ndim == 1:
        frames = frames[:, None]
    if frames.ndim != 2 or frames.size == 0:
        raise WavError("samples must be a nonempty 1-D or 2-D array")
    if not np.all(np.isfinite(frames)):
        raise WavError("samples contain NaN or infinity")

    bits, code = ENCODINGS[encoding]
    channels = frames.shape[1]
    block = channels * bits // 8
    payload, clipped = _encode(frames, encoding)

    chunks = [(b"fmt ", struct.pack(
        "<HHIIHH", code, channels, int(rate), int(rate) * block, block, bits
    ))]
    if code == _FLOAT:
        # non-PCM files carry a fact chunk with the frame count
        chunks.append((b"fact", struct.pack("<I", frames.shape[0])))
    chunks.append((b"data", payload))

    body = bytearray()
    for ident, chunk in chunks:
        body += ident + struct.pack("<I", len(chunk)) + chunk
        if len(chunk) & 1:
            body += b"\x00"
    blob = b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + bytes(body)
    return blob, clipped


def read_wav(path):
    """decode_wav for a file on disk."""
    return decode_wav(Path(path).read_bytes())


def write_wav(path, samples, rate, encoding="pcm16"):
    """encode_wav to a file on disk; returns the clipped-sample count."""
    blob, clipped = encode_wav(samples, rate, encoding)
    Path(path).write_bytes(blob)
    return clipped
