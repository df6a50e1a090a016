"""Built-in invariant battery behind the ``selftest`` CLI subcommand."""

import numpy as np

from .echo import synthesize_frame
from .estimator import PipelineConfig, run_pipeline
from .harness import ExperimentConfig, format_csv, run_experiment, _point_rows
from .phasedarray import UpaGeometry, measure_beamwidth
from .scene import Scenario, build_scene, frame_truth, _designed_beam
from .sequences import build_preamble, correlation_segment, generate_golay_pair
from .waveform import nyquist_residual, rrc_taps


def _check_golay():
    pair = generate_golay_pair(128)
    total = (np.correlate(pair.a, pair.a, "full")
             + np.correlate(pair.b, pair.b, "full"))
    expected = np.zeros(255, dtype=np.int64)
    expected[127] = 256
    ok = np.array_equal(total, expected)
    return ok, "R_a + R_b = 256*delta over all lags"


def _check_preamble():
    pair = generate_golay_pair(128)
    pre = build_preamble()
    window = np.concatenate([-pair.a, -pair.b, -pair.a, pair.b])
    ok = (len(pre.samples) == 3328
          and np.array_equal(pre.samples[2048:2560], window)
          and np.array_equal(correlation_segment(pre), window)
          and bool(np.all(np.abs(pre.samples) == 1)))
    return ok, "3328 +/-1 samples; [2048, 2560) = [-a, -b, -a, +b]"


def _check_beamwidths():
    scn = Scenario()
    geo = UpaGeometry(nx_tx=scn.nx_tx, ny_tx=scn.ny_tx,
                      nx_rx=scn.nx_rx, ny_rx=scn.ny_rx)
    f = _designed_beam(scn, geo)
    az = measure_beamwidth(f, geo, "azimuth", scn.elevation_center_rad)
    el = measure_beamwidth(f, geo, "elevation", scn.elevation_center_rad)
    ok = abs(az - 0.4084) / 0.4084 < 0.05 and abs(el - 1.0399) / 1.0399 < 0.05
    return ok, f"azimuth {az:.4f} rad, elevation {el:.4f} rad"


def _check_rrc():
    residual = nyquist_residual(rrc_taps(0.25, 16, 4))
    return residual < 1e-3, f"cascade ISI residual {residual:.2e}"


def _check_noiseless_pipeline():
    scn = Scenario()
    scene = build_scene(scn)
    wf = scene.wf
    pre = build_preamble()
    m_count = wf.frames_per_cpi(0.5e-3)
    m_d, m_i = m_count - 1, m_count - 7
    frames = {m: synthesize_frame(scene, frame_truth(scene, m), pre.samples,
                                  m, None) for m in (0, m_i, m_d)}
    cfg = PipelineConfig(m_d=m_d, m_i=m_i,
                         threshold=512 * np.sqrt(scene.noise_clutter_var),
                         expected_targets=scn.num_targets)
    res = run_pipeline(frames, pre, wf, scene.source_velocity,
                       scene.tx_power, cfg)
    true_v = np.array([t.velocity for t in scene.targets])
    worst = float(np.max(np.abs(res.velocities - true_v)))
    return worst < 0.02, f"worst noiseless velocity error {worst:.4f} m/s"


def _check_determinism():
    scn = Scenario()
    exp = ExperimentConfig(cpi_s=2e-4, trials=4)
    outputs = []
    for _ in range(2):
        records = run_experiment(scn, exp)
        outputs.append(format_csv(_point_rows(scn, exp, records, exp.cpi_s)))
    return outputs[0] == outputs[1], "repeated run produces identical CSV"


CHECKS = (
    ("golay-complementarity", _check_golay),
    ("preamble-window", _check_preamble),
    ("beamwidths", _check_beamwidths),
    ("rrc-nyquist", _check_rrc),
    ("noiseless-pipeline", _check_noiseless_pipeline),
    ("determinism", _check_determinism),
)


def run_selftest(out=print) -> bool:
    all_ok = True
    for name, check in CHECKS:
        try:
            ok, detail = check()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        out(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
