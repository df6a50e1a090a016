"""Multi-target delay, Doppler, and velocity estimation from preamble echoes.

The pipeline runs in two stages.  Delay: cross-correlate each frame against
the 512-sample preamble segment, take the dominant peak, then collect further
local maxima above threshold near it.  Doppler: recover the per-target
channel coefficients of frame 0 (where the Doppler phase is nearly flat) and
of a late frame m_d by least squares; the phase of their ratio, scaled by the
accumulated sample count, gives a raw Doppler that is ambiguous modulo full
phase turns.  A second frame m_i with a slightly different scale factor
resolves the integer number of turns, and the refined Doppler maps to a
velocity through the two-way Doppler relation.
"""

from dataclasses import dataclass

import numpy as np

from .echo import EchoFrame
from .errors import (AssociationError, DetectionShortfallError, NoTargetError,
                     SingularDesignError)
from .params import WaveformParams
from .sequences import (CORR_SEGMENT_OFFSET, Preamble, correlation_profile,
                        correlation_segment)

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class DelayEstimate:
    """Detected delays of one frame, sorted ascending."""

    delays: np.ndarray            # integer lags
    dominant_index: int           # position of the argmax peak in ``delays``
    correlation_peak: np.ndarray  # |R| at each retained delay


@dataclass(frozen=True)
class DopplerEstimate:
    """Per-target Doppler chain: LSE coefficients, raw, wraps, refined."""

    h_hat: np.ndarray           # frame-0 coefficients
    h_hat_md: np.ndarray        # frame-m_d coefficients
    h_hat_mi: np.ndarray        # frame-m_i coefficients
    nu_raw: np.ndarray          # Hz, wrapped estimate at m_d
    wrap_count: np.ndarray      # integer turns
    nu_refined: np.ndarray      # Hz
    d_md: float                 # Hz per radian at m_d
    d_mi: float                 # Hz per radian at m_i


@dataclass(frozen=True)
class VelocityEstimate:
    """Final per-target velocities with the full estimation trace."""

    velocities: np.ndarray
    doppler: DopplerEstimate
    delays: dict                # frame index -> DelayEstimate

    def relative_squared_errors(self, true_velocities) -> np.ndarray:
        v = np.asarray(true_velocities, dtype=float)
        return ((v - self.velocities) / v) ** 2


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of one pipeline run over a CPI."""

    m_d: int
    m_i: int
    threshold: float
    expected_targets: int
    search_halfwidth: int = 1024
    guard: int = 8
    first_delay_window: bool = False


def estimate_delays(frame: EchoFrame, s_c: np.ndarray, threshold: float,
                    expected_targets: int = None, search_halfwidth: int = 1024,
                    guard: int = 8) -> DelayEstimate:
    """Correlation-based multi-target delay estimation on one frame.

    The correlation at lag l is R[l] = sum_k s_c[k] conj(y[m, l + k + 2048]),
    so a target at delay l_p peaks at l = l_p.  The dominant delay is the
    global argmax of |R|; further targets are local maxima above ``threshold``
    within ``search_halfwidth`` lags of the dominant, accepted largest first
    with ``guard`` lags suppressed on both sides of every accepted peak.

    Parameters
    ----------
    expected_targets : int, optional
        When given, exactly this many peaks are required (perfect-detection
        assumption); fewer raises DetectionShortfallError.

    Raises
    ------
    NoTargetError
        If no lag exceeds the threshold.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    first_lag = frame.k_start - CORR_SEGMENT_OFFSET
    profile = correlation_profile(s_c, frame.samples)
    mag = np.abs(profile)

    dom = int(np.argmax(mag))
    if mag[dom] <= threshold:
        raise NoTargetError(
            f"no correlation peak above threshold {threshold:.3e} "
            f"(max {mag[dom]:.3e}) in frame {frame.m}")

    lo = max(0, dom - search_halfwidth)
    hi = min(len(mag), dom + search_halfwidth + 1)
    interior = np.zeros(len(mag), dtype=bool)
    interior[1:-1] = (mag[1:-1] >= mag[:-2]) & (mag[1:-1] >= mag[2:])
    candidate = interior & (mag > threshold)
    candidate[:lo] = False
    candidate[hi:] = False
    candidate[dom] = True

    accepted = []
    available = candidate.copy()
    order_mag = mag.copy()
    while available.any():
        pick = int(np.argmax(np.where(available, order_mag, -1.0)))
        accepted.append(pick)
        available[max(0, pick - guard):pick + guard + 1] = False
        if expected_targets is not None and len(accepted) == expected_targets:
            break

    if expected_targets is not None and len(accepted) != expected_targets:
        raise DetectionShortfallError(
            f"frame {frame.m}: detected {len(accepted)} of "
            f"{expected_targets} targets above threshold {threshold:.3e}")

    accepted = sorted(accepted)
    delays = np.array([first_lag + i for i in accepted], dtype=np.int64)
    dominant_index = accepted.index(dom)
    return DelayEstimate(delays=delays, dominant_index=dominant_index,
                         correlation_peak=mag[accepted])


def build_shift_matrix(delays, preamble: Preamble, rows: int) -> np.ndarray:
    """Design matrix whose column p is the preamble shifted to delay l_p.

    Row x corresponds to sample index k = l_0 + x; entry (x, p) equals
    s[l_0 + x - l_p] when that index lies in [0, K_pre) and zero otherwise.

    Raises
    ------
    SingularDesignError
        On duplicate delays (identical columns).
    """
    delays = np.asarray(delays, dtype=np.int64)
    if len(set(delays.tolist())) != len(delays):
        raise SingularDesignError(f"duplicate delays {delays}")
    if np.any(np.diff(delays) < 0):
        raise ValueError("delays must be sorted ascending")
    k_pre = len(preamble.samples)
    s = np.zeros((rows, len(delays)))
    x = np.arange(rows)
    for p, ell in enumerate(delays):
        idx = delays[0] + x - ell
        ok = (idx >= 0) & (idx < k_pre)
        s[ok, p] = preamble.samples[idx[ok]]
    return s


def lse_coefficients(y: np.ndarray, shift_matrix: np.ndarray,
                     tx_power: float) -> np.ndarray:
    """Least-squares channel coefficients: (S^H S)^{-1} S^H y / sqrt(P_TX).

    Raises
    ------
    SingularDesignError
        If the normal equations are ill-conditioned (cond >= 1e12); the
        message names the most correlated delay pair.
    """
    gram = shift_matrix.T @ shift_matrix  # S is real
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond >= _COND_LIMIT:
        norms = np.sqrt(np.diag(gram))
        corr = np.abs(gram) / np.outer(norms, norms)
        np.fill_diagonal(corr, 0.0)
        i, j = np.unravel_index(np.argmax(corr), corr.shape)
        raise SingularDesignError(
            f"shift matrix ill-conditioned (cond {cond:.2e}); "
            f"columns {i} and {j} nearly collinear")
    rhs = shift_matrix.T @ y
    return np.linalg.solve(gram, rhs) / np.sqrt(tx_power)


def denominator_inverse(l_0: int, m: int, frame_len: int, preamble_len: int,
                        sample_period: float) -> float:
    """Scale factor D_m turning the frame-m ratio phase into a Doppler (Hz/rad).

    D_m = 1 / (2 pi ((2 l_0 + K_pre - 1)/2 + m K) T_s); the inner term is the
    mid-preamble absolute sample index at which the frame-m phase is read.
    """
    if m < 0:
        raise ValueError("frame index must be nonnegative")
    k_mid = (2 * l_0 + preamble_len - 1) / 2.0
    return 1.0 / (2.0 * np.pi * (k_mid + m * frame_len) * sample_period)


def raw_doppler(h_md_p: complex, h_p: complex, d_md: float) -> float:
    """Wrapped Doppler estimate: angle(h_md[p]/h[p]) * D_md, angle in [-pi, pi]."""
    if h_p == 0:
        raise ZeroDivisionError("frame-0 coefficient is zero")
    return float(np.angle(h_md_p / h_p) * d_md)


def wrap_count(nu_md: float, nu_mi: float, d_md: float, d_mi: float,
               wrapped_phase_sign: float) -> int:
    """Integer number of full phase turns shared by frames m_d and m_i.

    Uses the magnitude difference of the two wrapped estimates,
    c = |nu_md| - |nu_mi|, scaled by the difference of the frame scale
    factors; the sign of the observed wrapped phase at m_d selects the
    branch.  Valid when both frames wrap the same number of times with
    residual phases of equal sign.
    """
    if d_mi <= d_md:
        raise ValueError("need d_mi > d_md (i.e. m_i < m_d)")
    c_hat = abs(nu_md) - abs(nu_mi)
    scale = 2.0 * np.pi * (d_mi - d_md)
    value = c_hat / scale if wrapped_phase_sign >= 0 else -c_hat / scale
    return int(np.rint(value))


def refine_doppler(nu_md: float, n_wraps: int, d_md: float) -> float:
    """Unwrapped Doppler: nu_md + 2 pi N D_md."""
    return float(nu_md + 2.0 * np.pi * n_wraps * d_md)


def velocity_from_doppler(nu_hz: float, v_source: float, wavelength: float) -> float:
    """Two-way Doppler to absolute target velocity: V = V_s - nu * lambda / 2."""
    return float(v_source - nu_hz * wavelength / 2.0)


def _lse_window(frame: EchoFrame, delays: np.ndarray, preamble: Preamble,
                first_delay_window: bool):
    """Slice the frame to the LSE window starting at the estimated l_0."""
    k_pre = len(preamble.samples)
    if first_delay_window:
        rows = k_pre
    else:
        rows = k_pre + int(delays[-1] - delays[0])
    start = int(delays[0]) - frame.k_start
    if start < 0 or start + rows > len(frame.samples):
        rows = min(rows, len(frame.samples) - max(start, 0))
        start = max(start, 0)
    return frame.samples[start:start + rows], rows


def run_pipeline(frames, preamble: Preamble, wf: WaveformParams,
                 v_source: float, tx_power: float,
                 cfg: PipelineConfig) -> VelocityEstimate:
    """Full velocity estimation over one CPI.

    Parameters
    ----------
    frames : mapping of frame index to EchoFrame
        Must contain frames 0, cfg.m_i, and cfg.m_d.

    Notes
    -----
    Targets are associated across frames by delay rank order; detected counts
    are forced equal by the perfect-detection assumption, and a mismatch
    raises AssociationError.  The frame-m_d scale factor uses that frame's
    own first delay.
    """
    if not 0 <= cfg.m_i < cfg.m_d:
        raise ValueError(f"need 0 <= m_i < m_d, got m_i={cfg.m_i} m_d={cfg.m_d}")
    s_c = correlation_segment(preamble).astype(float)

    needed = (0, cfg.m_i, cfg.m_d)
    frame_map = {f.m: f for f in frames.values()} if isinstance(frames, dict) \
        else {f.m: f for f in frames}
    missing = [m for m in needed if m not in frame_map]
    if missing:
        raise ValueError(f"pipeline needs frames {needed}, missing {missing}")

    delay_est = {}
    for m in needed:
        delay_est[m] = estimate_delays(frame_map[m], s_c, cfg.threshold,
                                       cfg.expected_targets,
                                       cfg.search_halfwidth, cfg.guard)
    counts = {m: len(delay_est[m].delays) for m in needed}
    if len(set(counts.values())) != 1:
        raise AssociationError(f"detection counts differ across frames: {counts}")

    coeffs = {}
    for m in needed:
        est = delay_est[m]
        y, rows = _lse_window(frame_map[m], est.delays, preamble,
                              cfg.first_delay_window)
        s = build_shift_matrix(est.delays, preamble, rows)
        coeffs[m] = lse_coefficients(y, s, tx_power)

    d_md = denominator_inverse(int(delay_est[cfg.m_d].delays[0]), cfg.m_d,
                               wf.frame_len, wf.preamble_len, wf.sample_period)
    d_mi = denominator_inverse(int(delay_est[cfg.m_i].delays[0]), cfg.m_i,
                               wf.frame_len, wf.preamble_len, wf.sample_period)

    n_targets = counts[0]
    nu_raw = np.empty(n_targets)
    nu_mi = np.empty(n_targets)
    wraps = np.empty(n_targets, dtype=np.int64)
    nu_refined = np.empty(n_targets)
    velocities = np.empty(n_targets)
    for p in range(n_targets):
        nu_raw[p] = raw_doppler(coeffs[cfg.m_d][p], coeffs[0][p], d_md)
        nu_mi[p] = raw_doppler(coeffs[cfg.m_i][p], coeffs[0][p], d_mi)
        sign = np.angle(coeffs[cfg.m_d][p] / coeffs[0][p])
        wraps[p] = wrap_count(nu_raw[p], nu_mi[p], d_md, d_mi, sign)
        nu_refined[p] = refine_doppler(nu_raw[p], wraps[p], d_md)
        velocities[p] = velocity_from_doppler(nu_refined[p], v_source,
                                              wf.wavelength)

    doppler = DopplerEstimate(h_hat=coeffs[0], h_hat_md=coeffs[cfg.m_d],
                              h_hat_mi=coeffs[cfg.m_i], nu_raw=nu_raw,
                              wrap_count=wraps, nu_refined=nu_refined,
                              d_md=d_md, d_mi=d_mi)
    return VelocityEstimate(velocities=velocities, doppler=doppler,
                            delays=delay_est)
