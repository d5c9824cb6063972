"""Tests for the WAV reader and writer.

Round trips must be bit-exact for every supported encoding, the
container layout must match the RIFF specification byte for byte, and
malformed files must be rejected rather than misread.
"""

import struct

import numpy as np
import pytest

from selebi.wavio import ENCODINGS, WavError, read_wav, write_wav


def _random_pcm(rng, count, bits, channels=None):
    scale = 2 ** (bits - 1)
    shape = (count,) if channels is None else (count, channels)
    return rng.integers(-scale, scale, size=shape).astype(np.float64) / scale


# ---------------------------------------------------------------------------
# round trips


@pytest.mark.parametrize("channels", [None, 2, 3])
def test_pcm16_round_trip_bit_exact(tmp_path, channels):
    rng = np.random.default_rng(1)
    x = _random_pcm(rng, 1000, 16, channels)
    path = tmp_path / "a.wav"
    assert write_wav(path, x, 22050, "pcm16") == 0
    y, rate, encoding = read_wav(path)
    assert rate == 22050 and encoding == "pcm16"
    assert np.array_equal(y, x)


def test_pcm24_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    x = _random_pcm(rng, 777, 24, 2)
    path = tmp_path / "a.wav"
    assert write_wav(path, x, 48000, "pcm24") == 0
    y, rate, encoding = read_wav(path)
    assert rate == 48000 and encoding == "pcm24"
    assert np.array_equal(y, x)


def test_pcm24_negative_values_sign_extend(tmp_path):
    x = np.array([-1.0, -(2 ** -23), 2 ** -23, (2 ** 23 - 1) / 2 ** 23])
    path = tmp_path / "a.wav"
    write_wav(path, x, 8000, "pcm24")
    y, _, _ = read_wav(path)
    assert np.array_equal(y, x)


def test_float32_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    x = rng.normal(scale=2.0, size=500).astype(np.float32).astype(np.float64)
    path = tmp_path / "a.wav"
    assert write_wav(path, x, 44100, "float32") == 0
    y, rate, encoding = read_wav(path)
    assert rate == 44100 and encoding == "float32"
    # float carries out-of-range values untouched
    assert np.array_equal(y, x)


def test_second_write_is_byte_identical(tmp_path):
    rng = np.random.default_rng(4)
    x = _random_pcm(rng, 333, 16)
    one, two = tmp_path / "1.wav", tmp_path / "2.wav"
    write_wav(one, x, 22050, "pcm16")
    y, rate, encoding = read_wav(one)
    write_wav(two, y, rate, encoding)
    assert one.read_bytes() == two.read_bytes()


# ---------------------------------------------------------------------------
# container layout


def test_header_layout_pcm16(tmp_path):
    path = tmp_path / "a.wav"
    write_wav(path, np.zeros((4, 2)), 22050, "pcm16")
    blob = path.read_bytes()
    assert blob[:4] == b"RIFF" and blob[8:12] == b"WAVE"
    assert struct.unpack_from("<I", blob, 4)[0] == len(blob) - 8
    assert blob[12:16] == b"fmt "
    code, channels, rate, byterate, block, bits = struct.unpack_from(
        "<HHIIHH", blob, 20
    )
    assert (code, channels, rate, bits) == (1, 2, 22050, 16)
    assert block == 4 and byterate == 22050 * 4
    assert blob[36:40] == b"data"
    assert struct.unpack_from("<I", blob, 40)[0] == 4 * 4


def test_float32_file_carries_fact_chunk(tmp_path):
    path = tmp_path / "a.wav"
    write_wav(path, np.zeros(7), 22050, "float32")
    blob = path.read_bytes()
    pos = blob.index(b"fact")
    assert struct.unpack_from("<I", blob, pos + 8)[0] == 7


def test_odd_data_chunk_padded_to_word_boundary(tmp_path):
    path = tmp_path / "a.wav"
    write_wav(path, np.zeros(3), 22050, "pcm24")  # 9 data bytes
    blob = path.read_bytes()
    assert len(blob) % 2 == 0
    y, _, _ = read_wav(path)
    assert y.size == 3


def test_unknown_chunks_skipped(tmp_path):
    path = tmp_path / "a.wav"
    x = np.array([0.25, -0.5])
    write_wav(path, x, 22050, "pcm16")
    blob = path.read_bytes()
    # splice a LIST chunk between fmt and data
    extra = b"LIST" + struct.pack("<I", 6) + b"INFOab"
    spliced = blob[:36] + extra + blob[36:]
    spliced = spliced[:4] + struct.pack("<I", len(spliced) - 8) + spliced[8:]
    path.write_bytes(spliced)
    y, rate, encoding = read_wav(path)
    assert np.array_equal(y, x) and encoding == "pcm16"


def test_extensible_fmt_accepted(tmp_path):
    # hand-build an extensible-format float file
    frames = np.array([0.5, -0.25], dtype="<f4")
    guid = struct.pack("<H", 3) + b"\x00\x00" + bytes.fromhex(
        "0000100080000aa00389b71".rjust(28, "0")
    )
    fmt = struct.pack("<HHIIHH", 0xFFFE, 1, 22050, 22050 * 4, 4, 32)
    fmt += struct.pack("<HHI", 22, 32, 4) + guid[:16]
    body = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", 8) + frames.tobytes()
    blob = b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body
    path = tmp_path / "a.wav"
    path.write_bytes(blob)
    y, rate, encoding = read_wav(path)
    assert encoding == "float32" and rate == 22050
    assert np.array_equal(y, frames.astype(np.float64))


# ---------------------------------------------------------------------------
# clipping


def test_clipped_samples_counted_and_clamped(tmp_path):
    path = tmp_path / "a.wav"
    x = np.array([1.5, -2.0, 0.5, 1.0])
    clipped = write_wav(path, x, 22050, "pcm16")
    # +1.0 rounds to +32768 which is out of range for int16
    assert clipped == 3
    y, _, _ = read_wav(path)
    assert y[0] == (2 ** 15 - 1) / 2 ** 15
    assert y[1] == -1.0
    assert y[2] == 0.5
    assert y[3] == (2 ** 15 - 1) / 2 ** 15


def test_float32_never_clips(tmp_path):
    path = tmp_path / "a.wav"
    assert write_wav(path, np.array([123.0, -456.0]), 22050, "float32") == 0


# ---------------------------------------------------------------------------
# rejection


def _valid_blob():
    fmt = struct.pack("<HHIIHH", 1, 1, 22050, 22050 * 2, 2, 16)
    body = b"fmt " + struct.pack("<I", 16) + fmt
    body += b"data" + struct.pack("<I", 4) + b"\x00\x01\x02\x03"
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body


def test_valid_blob_helper_parses(tmp_path):
    path = tmp_path / "a.wav"
    path.write_bytes(_valid_blob())
    y, rate, encoding = read_wav(path)
    assert y.size == 2 and rate == 22050 and encoding == "pcm16"


@pytest.mark.parametrize(
    "mangle",
    [
        lambda b: b[:20],  # truncated inside fmt
        lambda b: b"JUNK" + b[4:],  # wrong magic
        lambda b: b.replace(b"WAVE", b"AIFF"),
        lambda b: b.replace(b"fmt ", b"fmtX"),  # fmt missing
        lambda b: b.replace(b"data", b"datb"),  # data missing
        lambda b: b.replace(
            struct.pack("<HHIIHH", 1, 1, 22050, 22050 * 2, 2, 16),
            struct.pack("<HHIIHH", 2, 1, 22050, 22050 * 2, 2, 16),
        ),  # ADPCM code
        lambda b: b.replace(
            struct.pack("<HHIIHH", 1, 1, 22050, 22050 * 2, 2, 16),
            struct.pack("<HHIIHH", 1, 1, 22050, 22050, 1, 8),
        ),  # 8-bit unsupported
        lambda b: b.replace(
            struct.pack("<HHIIHH", 1, 1, 22050, 22050 * 2, 2, 16),
            struct.pack("<HHIIHH", 1, 2, 22050, 22050 * 2, 2, 16),
        ),  # stereo but data is an odd frame count
        lambda b: b.replace(
            struct.pack("<HHIIHH", 1, 1, 22050, 22050 * 2, 2, 16),
            struct.pack("<HHIIHH", 1, 1, 22050, 22050 * 2, 3, 16),
        ),  # block align contradicts format
        lambda b: b.replace(
            struct.pack("<HHIIHH", 1, 1, 22050, 22050 * 2, 2, 16),
            struct.pack("<HHIIHH", 1, 0, 22050, 22050 * 2, 2, 16),
        ),  # zero channels
    ],
)
def test_malformed_files_rejected(tmp_path, mangle):
    path = tmp_path / "a.wav"
    path.write_bytes(mangle(_valid_blob()))
    with pytest.raises(WavError):
        read_wav(path)


def test_write_rejects_bad_requests(tmp_path):
    path = tmp_path / "a.wav"
    with pytest.raises(WavError):
        write_wav(path, np.zeros(4), 22050, "pcm8")
    with pytest.raises(WavError):
        write_wav(path, np.zeros(4), 0, "pcm16")
    with pytest.raises(WavError):
        write_wav(path, np.zeros((2, 2, 2)), 22050, "pcm16")
    with pytest.raises(WavError):
        write_wav(path, np.array([]), 22050, "pcm16")
    with pytest.raises(WavError):
        write_wav(path, np.array([np.nan, 0.0]), 22050, "pcm16")


def test_encodings_table_is_consistent():
    assert set(ENCODINGS) == {"pcm16", "pcm24", "float32"}
    for bits, code in ENCODINGS.values():
        assert bits in (16, 24, 32) and code in (1, 3)
