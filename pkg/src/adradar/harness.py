"""Experiment orchestration: Monte Carlo trials, NMSE aggregation, sweeps, CSV.

Every random draw derives from (seed, trial, stream, ...) seed sequences, so
runs are reproducible bit-for-bit regardless of worker count, and common
random numbers carry across sweep points that share trial indices.  Workers
are capped by the ADRADAR_WORKERS environment variable (default 1).
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .baseline import baseline_velocities, delay_doppler_map
from .echo import synthesize_frame
from .errors import AggregationError, EstimationError
from .estimator import PipelineConfig, run_pipeline
from .scene import (Scenario, build_scene, draw_betas, frame_truth,
                    scene_backscatter)
from .sequences import (CORR_SEGMENT_OFFSET, build_preamble,
                        correlation_profile, correlation_segment)

_STREAM_NOISE = 0
_STREAM_BETA = 1
_STREAM_BOOTSTRAP = 2

# Per-frame detection threshold is 512 sigma_cn (Cauchy-Schwarz bound on the
# noise term of the correlator); the map threshold additionally allows for
# worst-case off-grid scalloping of the slow-time DFT peak.
_MAP_SCALLOP_MARGIN = 0.5

BASELINE_LAG_HALFWIDTH = 128


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo experiment over a fixed scenario."""

    cpi_s: float
    trials: int = 200
    p_tx_dbm: float = None        # None: use the scenario value
    m_i_offset: int = 6
    estimators: str = "proposed"  # proposed | baseline | both
    seed: int = None              # None: use the scenario value

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.estimators not in ("proposed", "baseline", "both"):
            raise ValueError(f"unknown estimator selection {self.estimators!r}")


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial: truth, per-estimator estimates or failure text."""

    trial: int
    seed: int
    true_velocities: tuple
    estimates: dict               # estimator name -> tuple of velocities
    failures: dict                # estimator name -> error message
    wrap_counts: tuple = ()
    delays: tuple = ()


def nmse(records, estimator: str = "proposed") -> float:
    """Mean over targets of the empirical mean squared relative velocity error.

    Trials that failed for the estimator are excluded.

    Raises
    ------
    AggregationError
        If no trial succeeded.
    """
    per_trial = [
        ((np.asarray(r.true_velocities) - np.asarray(r.estimates[estimator]))
         / np.asarray(r.true_velocities)) ** 2
        for r in records if estimator in r.estimates]
    if not per_trial:
        raise AggregationError(f"no successful trials for {estimator!r}")
    return float(np.mean(np.vstack(per_trial), axis=0).mean())


def bootstrap_ci(records, estimator: str, seed: int, resamples: int = 500,
                 level: float = 0.95):
    """Percentile bootstrap confidence interval of the NMSE over trials."""
    ok = [r for r in records if estimator in r.estimates]
    if not ok:
        raise AggregationError(f"no successful trials for {estimator!r}")
    errors = np.vstack([
        ((np.asarray(r.true_velocities) - np.asarray(r.estimates[estimator]))
         / np.asarray(r.true_velocities)) ** 2 for r in ok])
    rng = np.random.default_rng([seed, _STREAM_BOOTSTRAP])
    idx = rng.integers(0, len(ok), size=(resamples, len(ok)))
    stats = errors[idx].mean(axis=(1, 2))
    lo, hi = np.quantile(stats, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def _run_one_trial(scenario: Scenario, exp: ExperimentConfig, trial: int) -> TrialRecord:
    seed = exp.seed if exp.seed is not None else scenario.seed
    beta_rng = np.random.default_rng([seed, trial, _STREAM_BETA])
    betas = draw_betas(scenario, beta_rng)
    scene = build_scene(scenario, betas=betas, p_tx_dbm=exp.p_tx_dbm)
    wf = scene.wf
    preamble = build_preamble()
    s_c = correlation_segment(preamble).astype(float)
    threshold = 512.0 * np.sqrt(scene.noise_clutter_var) * scenario.threshold_scale

    m_count = wf.frames_per_cpi(exp.cpi_s)
    m_d = m_count - 1
    m_i = m_d - exp.m_i_offset
    if not 0 <= m_i < m_d:
        raise ValueError(f"m_i offset {exp.m_i_offset} invalid for M={m_count}")

    want_proposed = exp.estimators in ("proposed", "both")
    want_baseline = exp.estimators in ("baseline", "both")
    needed = range(m_count) if want_baseline else sorted({0, m_i, m_d})
    h = scene_backscatter(scene)
    frames = {}
    for m in needed:
        rng = np.random.default_rng([seed, trial, _STREAM_NOISE, m])
        frames[m] = synthesize_frame(scene, frame_truth(scene, m, h),
                                     preamble.samples, m, rng,
                                     scenario.first_delay_window)

    true_v = tuple(t.velocity for t in scene.targets)
    estimates, failures = {}, {}
    wraps, delays = (), ()
    if want_proposed:
        cfg = PipelineConfig(m_d=m_d, m_i=m_i, threshold=threshold,
                             expected_targets=scenario.num_targets,
                             search_halfwidth=scenario.search_halfwidth,
                             guard=scenario.guard,
                             first_delay_window=scenario.first_delay_window)
        try:
            res = run_pipeline(frames, preamble, wf, scene.source_velocity,
                               scene.tx_power, cfg)
            estimates["proposed"] = tuple(float(v) for v in res.velocities)
            wraps = tuple(int(n) for n in res.doppler.wrap_count)
            delays = tuple(int(d) for d in res.delays[0].delays)
        except EstimationError as exc:
            failures["proposed"] = f"{type(exc).__name__}: {exc}"
    if want_baseline:
        try:
            # Window the map around the frame-0 dominant correlation peak;
            # targets are assumed not too far apart, as in the delay stage.
            profile0 = np.abs(correlation_profile(s_c, frames[0].samples))
            first_valid = frames[0].k_start - CORR_SEGMENT_OFFSET
            dominant = first_valid + int(np.argmax(profile0))
            lo = max(dominant - BASELINE_LAG_HALFWIDTH, first_valid)
            hi = min(dominant + BASELINE_LAG_HALFWIDTH,
                     first_valid + len(profile0) - 1)
            lags = np.arange(lo, hi + 1)
            ddm = delay_doppler_map(list(frames.values()), s_c, wf.frame_period,
                                    lags=lags)
            map_threshold = threshold * m_count * _MAP_SCALLOP_MARGIN
            bv = baseline_velocities(ddm, scene.source_velocity, wf.wavelength,
                                     scenario.num_targets, map_threshold,
                                     guard=scenario.guard)
            estimates["baseline"] = tuple(float(v) for v in bv)
        except EstimationError as exc:
            failures["baseline"] = f"{type(exc).__name__}: {exc}"
    return TrialRecord(trial=trial, seed=seed, true_velocities=true_v,
                       estimates=estimates, failures=failures,
                       wrap_counts=wraps, delays=delays)


def _worker_count() -> int:
    return max(1, int(os.environ.get("ADRADAR_WORKERS", "1")))


def run_experiment(scenario: Scenario, exp: ExperimentConfig):
    """Run all trials of one experiment; results are in trial order."""
    workers = _worker_count()
    trials = range(exp.trials)
    if workers == 1:
        return [_run_one_trial(scenario, exp, t) for t in trials]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one_trial, [scenario] * exp.trials,
                             [exp] * exp.trials, trials, chunksize=8))


def _point_rows(scenario, exp, records, x_value):
    """CSV rows (one per estimator) for a finished batch of trials."""
    seed = exp.seed if exp.seed is not None else scenario.seed
    p_tx = exp.p_tx_dbm if exp.p_tx_dbm is not None else scenario.p_tx_dbm
    names = {"proposed": ("proposed",), "baseline": ("baseline",),
             "both": ("proposed", "baseline")}[exp.estimators]
    rows = []
    for name in names:
        n_fail = sum(1 for r in records if name in r.failures)
        n_ok = sum(1 for r in records if name in r.estimates)
        if n_ok == 0:
            raise AggregationError(
                f"all {len(records)} trials failed for {name!r} at x={x_value}")
        value = nmse(records, name)
        lo, hi = bootstrap_ci(records, name, seed)
        rows.append({"x": x_value, "estimator": name, "p_tx_dbm": p_tx,
                     "nmse": value, "ci_lo": lo, "ci_hi": hi,
                     "trials": n_ok, "failures": n_fail})
    return rows


def sweep_framegap(scenario: Scenario, exp: ExperimentConfig, gaps):
    """NMSE of the proposed estimator versus the frame gap m_d - m_i.

    m_d is pinned to M-1; all gaps share trial seeds (common random numbers).
    """
    m_count = scenario.waveform().frames_per_cpi(exp.cpi_s)
    for gap in gaps:
        if not 1 <= gap < m_count:
            raise ValueError(f"gap {gap} not in [1, M-1] for M={m_count}")
    rows = []
    for gap in gaps:
        point = replace(exp, m_i_offset=int(gap), estimators="proposed")
        records = run_experiment(scenario, point)
        rows.extend(_point_rows(scenario, point, records, x_value=int(gap)))
    return rows


def sweep_cpi(scenario: Scenario, exp: ExperimentConfig, cpis, p_tx_dbm_grid=None):
    """NMSE of both estimators versus CPI duration, optionally over TX powers."""
    powers = ([exp.p_tx_dbm if exp.p_tx_dbm is not None else scenario.p_tx_dbm]
              if p_tx_dbm_grid is None else list(p_tx_dbm_grid))
    rows = []
    for p_tx in powers:
        for cpi in cpis:
            point = replace(exp, cpi_s=float(cpi), p_tx_dbm=float(p_tx))
            records = run_experiment(scenario, point)
            rows.extend(_point_rows(scenario, point, records, x_value=float(cpi)))
    return rows


CSV_HEADER = ("x", "estimator", "p_tx_dbm", "nmse", "ci_lo", "ci_hi",
              "trials", "failures")


def format_csv(rows) -> str:
    """Render result rows deterministically (shortest round-trip floats)."""
    lines = [",".join(CSV_HEADER)]
    for row in rows:
        lines.append(",".join(
            format(row[key], ".12g") if isinstance(row[key], float) else str(row[key])
            for key in CSV_HEADER))
    return "\n".join(lines) + "\n"


def write_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_csv(rows))
