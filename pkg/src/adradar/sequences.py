"""Golay complementary sequences and the 802.11ad preamble training field.

The preamble is built from the length-128 complementary pair Ga/Gb: a short
training field of 16 repetitions of Ga followed by -Ga, then the channel
estimation field assembled from +/-Ga and +/-Gb blocks.  The 512-sample window
starting at sample 2048 equals [-Ga, -Gb, -Ga, +Gb]; correlating the echo
against that window gives a sidelobe-free delay peak, which is the property
every estimator in this package leans on.
"""

from dataclasses import dataclass

import numpy as np

PREAMBLE_LEN = 3328
CORR_SEGMENT_OFFSET = 2048
CORR_SEGMENT_LEN = 512

# Delay and seed-weight vectors of the standard length-128 generator.
_AD_DELAYS = (1, 8, 2, 4, 16, 32, 64)
_AD_WEIGHTS = (-1, -1, -1, -1, 1, -1, -1)


@dataclass(frozen=True)
class GolayPair:
    """A complementary pair of +/-1 sequences of equal power-of-two length."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ValueError("pair members must be 1-D and equal length")

    def __len__(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class Preamble:
    """3328-sample +/-1 training field (STF followed by CEF)."""

    samples: np.ndarray
    correlation_segment_offset: int = CORR_SEGMENT_OFFSET
    correlation_segment_length: int = CORR_SEGMENT_LEN

    def __len__(self) -> int:
        return self.samples.shape[0]


def generate_golay_pair(length: int) -> GolayPair:
    """Generate a binary Golay complementary pair of the given length.

    Uses the recursive delay/weight construction.  For length 128 the delay
    and weight vectors of the 802.11ad generator are used, so the pair is the
    standard Ga128/Gb128 (validated through the complementarity and preamble
    window invariants).  Shorter lengths use the natural delay ordering with
    unit weights.

    Parameters
    ----------
    length : int
        Sequence length; must be a power of two in [2, 128].

    Returns
    -------
    GolayPair
        Integer-valued pair whose aperiodic autocorrelations satisfy
        R_a[l] + R_b[l] = 2*length * delta[l].
    """
    if length < 2 or length > 128 or (length & (length - 1)) != 0:
        raise ValueError(f"length must be a power of two in [2, 128], got {length}")
    stages = length.bit_length() - 1
    if length == 128:
        delays, weights = _AD_DELAYS, _AD_WEIGHTS
    else:
        delays = tuple(2 ** k for k in range(stages))
        weights = (1,) * stages

    a = np.zeros(length, dtype=np.int64)
    b = np.zeros(length, dtype=np.int64)
    a[0] = 1
    b[0] = 1
    for d, w in zip(delays, weights):
        shifted = np.zeros(length, dtype=np.int64)
        shifted[d:] = b[:length - d]
        a, b = w * a + shifted, w * a - shifted
    return GolayPair(a=a, b=b)


def build_preamble() -> Preamble:
    """Assemble the 3328-sample training field.

    Layout: STF = 16 x Ga followed by -Ga (2176 samples); CEF = Gu512, Gv512
    and a trailing -Gb (1152 samples), with Gu512 = [-Gb, -Ga, +Gb, -Ga] and
    Gv512 = [-Gb, +Ga, -Gb, -Ga].  Samples [2048, 2560) then read
    [-Ga, -Gb, -Ga, +Gb], the correlation segment.
    """
    pair = generate_golay_pair(128)
    ga, gb = pair.a, pair.b
    stf = np.concatenate([np.tile(ga, 16), -ga])
    gu512 = np.concatenate([-gb, -ga, gb, -ga])
    gv512 = np.concatenate([-gb, ga, -gb, -ga])
    cef = np.concatenate([gu512, gv512, -gb])
    samples = np.concatenate([stf, cef])
    assert samples.shape[0] == PREAMBLE_LEN
    return Preamble(samples=samples)


def correlation_segment(p: Preamble) -> np.ndarray:
    """Return the 512-sample correlation window s_c at offset 2048."""
    o, n = p.correlation_segment_offset, p.correlation_segment_length
    return p.samples[o:o + n]


def cross_correlate(s_c: np.ndarray, window: np.ndarray, lag: int):
    """Correlate s_c against a conjugated slice of the observation window.

    Returns sum_{k=0}^{511} s_c[k] * conj(window[lag + k]).  The conjugate
    sits on the observation, so the result is conjugate-linear in ``window``.

    Raises
    ------
    ValueError
        If ``lag`` puts any required index outside ``window``.
    """
    n = len(s_c)
    if lag < 0 or lag + n > len(window):
        raise ValueError(f"lag {lag} out of range for window of length {len(window)}")
    return np.dot(s_c, np.conj(window[lag:lag + n]))


def correlation_profile(s_c: np.ndarray, window: np.ndarray) -> np.ndarray:
    """Vectorized cross_correlate over every admissible lag of ``window``.

    Element ``l`` equals ``cross_correlate(s_c, window, l)``; the output has
    ``len(window) - len(s_c) + 1`` entries.
    """
    n = len(s_c)
    if len(window) < n:
        raise ValueError("window shorter than the correlation segment")
    views = np.lib.stride_tricks.sliding_window_view(window, n)
    # s_c is real, so conjugation commutes out of the sum.
    return np.conj(views @ s_c.astype(np.float64))
