"""Shared fixtures for the test suite."""

import numpy as np
import pytest

SAMPLE_RATE = 22050

# Two-strike test signal layout. Strike onsets are multiples of 64 so they
# land exactly on analysis frames of the default hop.
TWO_STRIKE_LENGTH = 24576
TWO_STRIKE_ONSETS = (6400, 14080)


def make_two_strike_signal(length=TWO_STRIKE_LENGTH, onsets=TWO_STRIKE_ONSETS):
    """Drum-like signal: two percussive strikes over a quiet tonal bed.

    Each strike is a unit impulse followed by a decaying resonance (about
    30 ms to 1/e), a crude stand-in for a struck membrane. The bed is a
    steady low-level sinusoid so detection has to reject tonal content
    rather than fire on everything nonzero. Raised-cosine ramps at both
    ends keep the circular analysis from seeing the bed's switch-on as
    one more transient.
    """
    t = np.arange(length) / SAMPLE_RATE
    x = 0.05 * np.sin(2 * np.pi * 220.0 * t)
    for onset, freq, amp in zip(onsets, (330.0, 290.0), (0.7, 0.6)):
        x[onset] += 1.0
        n = np.arange(length - onset)
        tail = amp * np.sin(2 * np.pi * freq * n / SAMPLE_RATE)
        x[onset:] += tail * np.exp(-n / (0.03 * SAMPLE_RATE))
    fade = 1024
    ramp = np.hanning(2 * fade)[:fade]
    x[:fade] *= ramp
    x[-fade:] *= ramp[::-1]
    return x


@pytest.fixture(scope="session")
def two_strike_signal():
    return make_two_strike_signal()
