"""Discrete-time echo synthesis over the preamble-bearing window of a frame.

Each frame-m echo sample is

    y[m, k] = sum_p sqrt(P_TX) h_p exp(j 2 pi nu_p (k + m K) T_s) s[k - l_p] + z[m, k]

with s the preamble on [0, K_pre) and zero elsewhere, and z i.i.d. complex
Gaussian clutter-plus-noise.  The Doppler phase references the absolute sample
index k + m K; the whole unwrapping chain depends on that accumulated phase.

By default the synthesized window runs from the first target's delay through
the last target's preamble tail, so the least-squares shift matrices have
complete rows for every target; the narrower window that stops at the first
target's tail is available via ``first_delay_window``.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ScenarioError
from .scene import FrameTruth, Scene

_DUMP_MAGIC = b"ADRECHO\x00"


@dataclass(frozen=True)
class EchoFrame:
    """Complex baseband samples of one frame, covering k in [k_start, k_start+len)."""

    m: int
    k_start: int
    samples: np.ndarray


def synthesize_frame(scene: Scene, truth: FrameTruth, preamble_samples: np.ndarray,
                     m: int, rng: np.random.Generator,
                     first_delay_window: bool = False) -> EchoFrame:
    """Generate the frame-m echo for every target plus noise.

    Parameters
    ----------
    rng : numpy Generator
        Noise substream for this frame; pass None for a noiseless frame.
    first_delay_window : bool
        Restrict the window to K_pre samples starting at the first delay,
        truncating later targets' tails.
    """
    k_pre = scene.wf.preamble_len
    if len(preamble_samples) != k_pre:
        raise ValueError("preamble length inconsistent with waveform parameters")
    delays = truth.delay_samples
    k_start = int(delays[0])
    if first_delay_window:
        n = k_pre
    else:
        n = k_pre + int(delays[-1] - delays[0])
    if np.any(delays < k_start) or np.any(delays - k_start >= n):
        raise ScenarioError(f"delay outside representable window at frame {m}")

    k = k_start + np.arange(n)
    amp = np.sqrt(scene.tx_power)
    ts = scene.wf.sample_period
    big_k = scene.wf.frame_len
    samples = np.zeros(n, dtype=complex)
    for h, nu, ell in zip(truth.backscatter, truth.doppler_hz, delays):
        idx = k - int(ell)
        occupied = (idx >= 0) & (idx < k_pre)
        phase = 2.0 * np.pi * nu * (k[occupied] + m * big_k) * ts
        samples[occupied] += (amp * h * np.exp(1j * phase)
                              * preamble_samples[idx[occupied]])
    if rng is not None and scene.noise_clutter_var > 0:
        sigma = np.sqrt(scene.noise_clutter_var / 2.0)
        samples += sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return EchoFrame(m=m, k_start=k_start, samples=samples)


def write_frame_dump(path, frame: EchoFrame) -> None:
    """Debug dump: 24-byte header (magic, m, length) then interleaved f64 re/im.

    The window origin is not part of the format; dumps restore with
    ``k_start = 0``.
    """
    with open(path, "wb") as f:
        f.write(_DUMP_MAGIC)
        f.write(struct.pack("<qq", frame.m, len(frame.samples)))
        inter = np.empty(2 * len(frame.samples), dtype="<f8")
        inter[0::2] = frame.samples.real
        inter[1::2] = frame.samples.imag
        f.write(inter.tobytes())


def read_frame_dump(path) -> EchoFrame:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != _DUMP_MAGIC:
            raise ValueError("not an echo frame dump")
        m, n = struct.unpack("<qq", f.read(16))
        inter = np.frombuffer(f.read(16 * n), dtype="<f8")
    samples = inter[0::2] + 1j * inter[1::2]
    return EchoFrame(m=int(m), k_start=0, samples=samples)
