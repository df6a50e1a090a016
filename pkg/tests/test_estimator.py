import numpy as np
import pytest

from adradar.echo import synthesize_frame
from adradar.errors import (DetectionShortfallError, NoTargetError,
                            SingularDesignError)
from adradar.estimator import (PipelineConfig, build_shift_matrix,
                               denominator_inverse, estimate_delays,
                               lse_coefficients, raw_doppler, refine_doppler,
                               run_pipeline, velocity_from_doppler, wrap_count)
from adradar.scene import Scenario, build_scene, frame_truth

TS = 1 / 1.76e9
K = 13632
K_PRE = 3328


def scene_with_delays(ranges, velocities=None, azimuths=None, p_tx_dbm=10.0):
    n = len(ranges)
    if velocities is None:
        velocities = tuple(20.0 + i for i in range(n))
    if azimuths is None:
        azimuths = tuple(0.02 * (i - (n - 1) / 2) for i in range(n))
    scn = Scenario(target_velocities_mps=tuple(velocities),
                   target_ranges_m=tuple(ranges),
                   target_azimuths_rad=azimuths,
                   target_elevations_rad=(0.0,) * n,
                   p_tx_dbm=p_tx_dbm)
    return build_scene(scn)


def noiseless_frame(scene, m, preamble):
    return synthesize_frame(scene, frame_truth(scene, m), preamble.samples, m, None)


# ---------------------------------------------------------------------------
# delay estimation
# ---------------------------------------------------------------------------

def test_single_target_delay_587(preamble, s_c):
    # range chosen so the rounded delay is exactly 587 samples
    scene = scene_with_delays([50.0], velocities=[25.271], azimuths=[0.0])
    frame = noiseless_frame(scene, 0, preamble)
    est = estimate_delays(frame, s_c, threshold=1e-9, expected_targets=1)
    assert est.delays.tolist() == [587]
    assert est.dominant_index == 0

    # oracle: exhaustive scan with an independently computed correlation
    lags = np.arange(frame.k_start - 2048, frame.k_start - 2048
                     + len(frame.samples) - 511)
    mags = [abs(np.dot(s_c, np.conj(frame.samples[l + 2048 - frame.k_start:
                                                  l + 2048 - frame.k_start + 512])))
            for l in lags]
    assert lags[int(np.argmax(mags))] == 587


def test_three_targets_recovered_exactly(preamble, s_c):
    # delays {587, 800, 1050} with comparable |h_p|: per-target RCS
    # compensates the r^-4 spread so all main peaks beat every sidelobe.
    from dataclasses import replace
    from scipy.constants import c as c0
    ranges = [l * c0 / (2 * 1.76e9) for l in (587, 800, 1050)]
    scene = scene_with_delays(ranges)
    targets = tuple(replace(t, rcs=t.rcs * (t.initial_range / ranges[0]) ** 4)
                    for t in scene.targets)
    scene = replace(scene, targets=targets)
    frame = noiseless_frame(scene, 0, preamble)
    est = estimate_delays(frame, s_c, threshold=1e-9, expected_targets=3)
    assert est.delays.tolist() == [587, 800, 1050]


def test_default_scene_delays(preamble, s_c, default_scene):
    frame = noiseless_frame(default_scene, 0, preamble)
    truth = frame_truth(default_scene, 0)
    est = estimate_delays(frame, s_c,
                          threshold=512 * np.sqrt(default_scene.noise_clutter_var),
                          expected_targets=3)
    assert est.delays.tolist() == truth.delay_samples.tolist()


def test_threshold_is_cauchy_schwarz_bound(s_c):
    # |z^H s_c| <= ||z|| ||s_c||; with E||z||^2 = 512 sigma^2 the bound is
    # 512 sigma on average, the detection threshold value.
    rng = np.random.default_rng(23)
    sigma = 1.7e-6
    z = sigma / np.sqrt(2) * (rng.standard_normal(512) + 1j * rng.standard_normal(512))
    inner = abs(np.vdot(z, s_c))
    assert inner <= np.linalg.norm(z) * np.linalg.norm(s_c)
    assert np.linalg.norm(s_c) == pytest.approx(np.sqrt(512))


def test_no_target_error(preamble, s_c, default_scene):
    frame = noiseless_frame(default_scene, 0, preamble)
    with pytest.raises(NoTargetError):
        estimate_delays(frame, s_c, threshold=1e6)


def test_detection_shortfall(preamble, s_c, default_scene):
    # a threshold just under the dominant peak leaves one detection
    frame = noiseless_frame(default_scene, 0, preamble)
    dominant = estimate_delays(frame, s_c, threshold=1e-9, expected_targets=1)
    near_peak = 0.9 * float(dominant.correlation_peak[0])
    with pytest.raises(DetectionShortfallError):
        estimate_delays(frame, s_c, threshold=near_peak, expected_targets=3)


def test_threshold_must_be_positive(preamble, s_c, default_scene):
    frame = noiseless_frame(default_scene, 0, preamble)
    with pytest.raises(ValueError):
        estimate_delays(frame, s_c, threshold=0.0)


def test_scale_invariance(preamble, s_c, default_scene):
    from dataclasses import replace
    frame = noiseless_frame(default_scene, 0, preamble)
    base = estimate_delays(frame, s_c, threshold=1e-12, expected_targets=3)
    for alpha in (0.5, 3.0, 10.0):
        scaled = replace(frame, samples=alpha * frame.samples)
        est = estimate_delays(scaled, s_c, threshold=1e-12, expected_targets=3)
        assert est.delays.tolist() == base.delays.tolist()
        assert est.dominant_index == base.dominant_index


# ---------------------------------------------------------------------------
# shift matrix and LSE
# ---------------------------------------------------------------------------

def test_shift_matrix_single_delay(preamble):
    s = build_shift_matrix([587], preamble, rows=K_PRE)
    np.testing.assert_array_equal(s[:, 0], preamble.samples)
    assert (s.T @ s)[0, 0] == K_PRE


def test_shift_matrix_disjoint_support(preamble):
    sep = K_PRE + 10
    s = build_shift_matrix([0, sep], preamble, rows=K_PRE + sep)
    assert s[:, 0] @ s[:, 1] == 0


def test_shift_matrix_inner_product_is_autocorrelation(preamble):
    s = build_shift_matrix([0, 64], preamble, rows=K_PRE + 64)
    auto = np.correlate(preamble.samples.astype(float),
                        preamble.samples.astype(float), "full")
    assert s[:, 0] @ s[:, 1] == auto[len(preamble.samples) - 1 + 64]


def test_shift_matrix_duplicate_delay(preamble):
    with pytest.raises(SingularDesignError):
        build_shift_matrix([10, 10], preamble, rows=K_PRE)


def test_lse_noiseless_recovery(preamble, s_c):
    # zero relative velocity -> zero Doppler -> exact linear model
    scene = scene_with_delays([14.0, 15.7, 17.9], velocities=[25.271] * 3)
    truth = frame_truth(scene, 0)
    frame = noiseless_frame(scene, 0, preamble)
    rows = len(frame.samples)
    s = build_shift_matrix(truth.delay_samples, preamble, rows)
    h_hat = lse_coefficients(frame.samples, s, scene.tx_power)
    np.testing.assert_allclose(h_hat, truth.backscatter, rtol=1e-9)


def test_lse_zero_observation(preamble):
    s = build_shift_matrix([0, 40], preamble, rows=K_PRE + 40)
    h = lse_coefficients(np.zeros(K_PRE + 40, dtype=complex), s, 0.01)
    np.testing.assert_array_equal(h, 0)


def test_lse_power_scaling(preamble, s_c):
    scene = scene_with_delays([14.0], velocities=[25.271], azimuths=[0.0])
    truth = frame_truth(scene, 0)
    frame = noiseless_frame(scene, 0, preamble)
    s = build_shift_matrix(truth.delay_samples, preamble, len(frame.samples))
    h1 = lse_coefficients(frame.samples, s, scene.tx_power)
    h4 = lse_coefficients(frame.samples, s, 4 * scene.tx_power)
    np.testing.assert_allclose(h4, h1 / 2, rtol=1e-12)


def test_lse_ill_conditioned(preamble):
    col = preamble.samples.astype(float)
    s = np.column_stack([col, col * (1 + 1e-15)])
    with pytest.raises(SingularDesignError, match="columns 0 and 1"):
        lse_coefficients(np.zeros(len(col), dtype=complex), s, 1.0)


# ---------------------------------------------------------------------------
# Doppler chain
# ---------------------------------------------------------------------------

def test_denominator_inverse_values():
    d0 = denominator_inverse(0, 0, K, K_PRE, TS)
    assert d0 == pytest.approx(1.76e9 / (2 * np.pi * 1663.5), rel=1e-12)
    assert d0 == pytest.approx(1.684e5, rel=1e-3)
    d128 = denominator_inverse(0, 128, K, K_PRE, TS)
    assert d128 == pytest.approx(1.76e9 / (2 * np.pi * (1663.5 + 128 * K)), rel=1e-12)
    assert d128 == pytest.approx(160.4, rel=1e-3)


def test_denominator_inverse_monotone():
    values = [denominator_inverse(100, m, K, K_PRE, TS) for m in range(0, 130, 10)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_raw_doppler_identity_and_scaling():
    assert raw_doppler(1 + 1j, 1 + 1j, 300.0) == 0.0
    assert raw_doppler(1j, 1.0, 160.4) == pytest.approx(np.pi / 2 * 160.4)
    assert np.pi / 2 * 160.4 == pytest.approx(251.9, rel=1e-3)
    with pytest.raises(ZeroDivisionError):
        raw_doppler(1.0, 0.0, 160.4)


def test_raw_doppler_no_wrap_recovery(preamble):
    # true phase within [-pi, pi]: the raw estimate alone recovers nu
    nu = 300.0
    m_d, l0 = 20, 100
    d_md = denominator_inverse(l0, m_d, K, K_PRE, TS)
    assert abs(nu / d_md) < np.pi
    h0 = 1.0 + 0.5j
    h_md = h0 * np.exp(1j * nu / d_md)
    assert raw_doppler(h_md, h0, d_md) == pytest.approx(nu, rel=1e-12)


def test_wrap_count_zero_when_unwrapped():
    d_md = denominator_inverse(0, 70, K, K_PRE, TS)
    d_mi = denominator_inverse(0, 65, K, K_PRE, TS)
    nu = 100.0  # well below one wrap at both frames
    assert wrap_count(nu, nu, d_md, d_mi, +1.0) == 0


def test_wrap_count_constructed_single_wrap():
    # nu = 1998.2 Hz wraps once at m_d = 70 with positive residual phase at
    # both frames; forward-compute the wrapped estimates and round-trip.
    nu = 1998.2
    d_md = denominator_inverse(0, 70, K, K_PRE, TS)
    d_mi = denominator_inverse(0, 65, K, K_PRE, TS)
    zeta_md, zeta_mi = nu / d_md, nu / d_mi
    assert 2 * np.pi < zeta_md < 2.5 * np.pi
    assert 2 * np.pi < zeta_mi < 2.5 * np.pi
    nu_md = (zeta_md - 2 * np.pi) * d_md
    nu_mi = (zeta_mi - 2 * np.pi) * d_mi
    n = wrap_count(nu_md, nu_mi, d_md, d_mi, wrapped_phase_sign=+1.0)
    assert n == 1
    assert refine_doppler(nu_md, n, d_md) == pytest.approx(nu, rel=1e-12)


def test_wrap_count_sign_mirror():
    nu = 1998.2
    d_md = denominator_inverse(0, 70, K, K_PRE, TS)
    d_mi = denominator_inverse(0, 65, K, K_PRE, TS)
    nu_md = (nu / d_md - 2 * np.pi) * d_md
    nu_mi = (nu / d_mi - 2 * np.pi) * d_mi
    # a target faster than the source mirrors every sign
    n = wrap_count(-nu_md, -nu_mi, d_md, d_mi, wrapped_phase_sign=-1.0)
    assert n == -1
    assert refine_doppler(-nu_md, n, d_md) == pytest.approx(-nu, rel=1e-12)


def test_wrap_count_degenerate_pair():
    d = denominator_inverse(0, 70, K, K_PRE, TS)
    with pytest.raises(ValueError):
        wrap_count(100.0, 100.0, d, d, +1.0)


def test_wrap_property_phase_arithmetic_sweep():
    # Wherever both frames share the wrap count and residual sign, the
    # rounded wrap estimate is exact and refinement inverts the wrapping.
    m_d, gap, l0 = 63, 6, 164
    d_md = denominator_inverse(l0, m_d, K, K_PRE, TS)
    d_mi = denominator_inverse(l0, m_d - gap, K, K_PRE, TS)
    max_nu = 3.2 * 2 * np.pi * d_md
    checked = 0
    for nu in np.linspace(-max_nu, max_nu, 101):
        if abs(nu) < 1.0:
            continue
        zeta_md, zeta_mi = nu / d_md, nu / d_mi
        n_md = int(np.rint(zeta_md / (2 * np.pi)))
        n_mi = int(np.rint(zeta_mi / (2 * np.pi)))
        zw_md = zeta_md - 2 * np.pi * n_md
        zw_mi = zeta_mi - 2 * np.pi * n_mi
        if n_md != n_mi or np.sign(zw_md) != np.sign(zw_mi):
            continue
        nu_md, nu_mi = zw_md * d_md, zw_mi * d_mi
        n_bar = wrap_count(nu_md, nu_mi, d_md, d_mi, zw_md)
        assert n_bar == n_md
        assert refine_doppler(nu_md, n_bar, d_md) == pytest.approx(nu, rel=1e-9)
        checked += 1
    assert checked > 60  # the predicate keeps most of the grid


def test_refine_doppler_values():
    assert refine_doppler(123.4, 0, 160.4) == 123.4
    assert refine_doppler(0.0, 1, 160.4) == pytest.approx(2 * np.pi * 160.4)
    assert 2 * np.pi * 160.4 == pytest.approx(1007.8, rel=1e-3)


def test_velocity_from_doppler():
    lam = 299792458.0 / 60e9
    assert velocity_from_doppler(0.0, 25.271, lam) == 25.271
    v = velocity_from_doppler(1998.18, 25.271, lam)
    assert v == pytest.approx(20.279, abs=1e-4)
    assert velocity_from_doppler(-100.0, 25.271, lam) > 25.271


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------

def run_noiseless_pipeline(scene, preamble, cpi_s=0.5e-3, gap=6):
    wf = scene.wf
    m_count = wf.frames_per_cpi(cpi_s)
    m_d, m_i = m_count - 1, m_count - 1 - gap
    frames = {m: noiseless_frame(scene, m, preamble) for m in (0, m_i, m_d)}
    cfg = PipelineConfig(m_d=m_d, m_i=m_i,
                         threshold=512 * np.sqrt(scene.noise_clutter_var),
                         expected_targets=len(scene.targets))
    return run_pipeline(frames, preamble, wf, scene.source_velocity,
                        scene.tx_power, cfg)


def test_pipeline_noiseless_stock_scenario(preamble, default_scene, true_velocities):
    res = run_noiseless_pipeline(default_scene, preamble)
    np.testing.assert_allclose(res.velocities, true_velocities, atol=0.02)
    assert res.doppler.wrap_count.tolist() == [1, 0, 1]


def test_pipeline_lse_phase_matches_midpoint_model(preamble, default_scene):
    # Noiseless chain: each frame-m_d coefficient carries the mid-preamble
    # phase 2 pi nu (k_mid + m_d K) T_s, up to the frame-0 residual.
    res = run_noiseless_pipeline(default_scene, preamble)
    truth = frame_truth(default_scene, 0)
    m_d = max(res.delays)
    k_mid = (2 * truth.delay_samples[0] + K_PRE - 1) / 2
    for p in range(3):
        predicted = 2 * np.pi * truth.doppler_hz[p] * (k_mid + m_d * K) * TS
        observed = np.angle(res.doppler.h_hat_md[p] / truth.backscatter[p])
        resid = (predicted - observed + np.pi) % (2 * np.pi) - np.pi
        assert abs(resid) < 2.5e-2


def test_pipeline_zero_doppler_exact_recovery(preamble):
    scene = scene_with_delays([14.0, 15.7, 17.9], velocities=[25.271] * 3)
    res = run_noiseless_pipeline(scene, preamble)
    np.testing.assert_allclose(res.velocities, 25.271, rtol=1e-9)
    assert res.doppler.wrap_count.tolist() == [0, 0, 0]


def test_pipeline_requires_distinct_frames(preamble, default_scene):
    with pytest.raises(ValueError):
        run_noiseless_pipeline(default_scene, preamble, gap=0)


def test_pipeline_first_delay_window(preamble, default_scene, true_velocities):
    # Restricting frames to K_pre samples at the first delay truncates the
    # later targets' tails; the estimates degrade slightly but stay close.
    wf = default_scene.wf
    m_count = wf.frames_per_cpi(0.5e-3)
    m_d, m_i = m_count - 1, m_count - 7
    frames = {m: synthesize_frame(default_scene, frame_truth(default_scene, m),
                                  preamble.samples, m, None,
                                  first_delay_window=True)
              for m in (0, m_i, m_d)}
    cfg = PipelineConfig(m_d=m_d, m_i=m_i,
                         threshold=512 * np.sqrt(default_scene.noise_clutter_var),
                         expected_targets=3, first_delay_window=True)
    res = run_pipeline(frames, preamble, wf, default_scene.source_velocity,
                       default_scene.tx_power, cfg)
    np.testing.assert_allclose(res.velocities, true_velocities, atol=0.05)


def test_pipeline_velocity_map_inverts_frame_truth(default_scene):
    # velocity mapping is affine and inverts the scene Doppler map exactly
    truth = frame_truth(default_scene, 0)
    wf = default_scene.wf
    for p, target in enumerate(default_scene.targets):
        v = velocity_from_doppler(truth.doppler_hz[p],
                                  default_scene.source_velocity, wf.wavelength)
        assert v == pytest.approx(target.velocity, rel=1e-12)


def test_pipeline_refined_doppler_within_half_percent(preamble, default_scene):
    res = run_noiseless_pipeline(default_scene, preamble)
    truth = frame_truth(default_scene, 0)
    np.testing.assert_allclose(res.doppler.nu_refined, truth.doppler_hz, rtol=5e-3)


def test_pipeline_doppler_fields_self_consistent(preamble, default_scene):
    # stored raw/refined values obey their defining relations
    res = run_noiseless_pipeline(default_scene, preamble)
    d = res.doppler
    for p in range(3):
        assert d.nu_raw[p] == pytest.approx(
            np.angle(d.h_hat_md[p] / d.h_hat[p]) * d.d_md, rel=1e-12)
        assert d.nu_refined[p] == pytest.approx(
            d.nu_raw[p] + 2 * np.pi * d.wrap_count[p] * d.d_md, rel=1e-12)
    assert d.d_mi > d.d_md
