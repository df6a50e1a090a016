"""Ground-truth V2V scenario: kinematics, channel gains, and noise statistics.

A scene fixes the source vehicle, an ordered list of target vehicles (sorted
by round-trip delay), the waveform, the designed TX/RX beams, and the
clutter-plus-noise variance.  Per-frame truth (Doppler, integer delay,
backscatter coefficient) is derived under a constant-velocity model.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import ScenarioError
from .params import WaveformParams
from .phasedarray import (BeamformerWeights, UpaGeometry, design_wide_beam,
                          rx_beam, steering_upa)


@dataclass(frozen=True)
class Target:
    """One target vehicle: kinematics, reflectivity, and small-scale gain."""

    velocity: float            # m/s, along-road
    initial_range: float       # m
    azimuth: float = 0.0       # rad
    elevation: float = 0.0     # rad
    rcs: float = 100.0         # m^2 (20 dBsm default)
    beta: complex = 1.0 + 0j   # small-scale gain, CN(0,1) draw or pinned 1

    def __post_init__(self):
        if self.initial_range <= 0:
            raise ScenarioError("target range must be positive")
        if self.rcs <= 0:
            raise ScenarioError("target RCS must be positive")


@dataclass(frozen=True)
class Scene:
    """Complete simulation scene over one CPI."""

    source_velocity: float
    targets: tuple               # Target, ordered by increasing delay
    tx_power: float              # W
    noise_clutter_var: float     # W, sigma_cn^2
    geometry: UpaGeometry
    f_tx: BeamformerWeights
    f_rx: BeamformerWeights
    wf: WaveformParams = field(default_factory=WaveformParams)

    def __post_init__(self):
        if not self.targets:
            raise ScenarioError("scene needs at least one target")
        if self.noise_clutter_var <= 0:
            raise ScenarioError("noise-plus-clutter variance must be positive")


@dataclass(frozen=True)
class FrameTruth:
    """Per-frame ground truth for every target, in scene target order."""

    frame: int
    doppler_hz: np.ndarray     # nu_p^m
    delay_samples: np.ndarray  # l_p^m, integer
    backscatter: np.ndarray    # h_p, complex


def large_scale_gain(range_m: float, rcs_m2: float, wavelength_m: float) -> float:
    """Two-way power gain of the monostatic radar range equation.

    G = lambda^2 * sigma / ((4 pi)^3 * r^4).
    """
    if range_m <= 0:
        raise ValueError(f"range must be positive, got {range_m}")
    return wavelength_m ** 2 * rcs_m2 / ((4.0 * np.pi) ** 3 * range_m ** 4)


def backscatter_coefficient(target: Target, f_tx: BeamformerWeights,
                            f_rx: BeamformerWeights, gain: float,
                            geometry: UpaGeometry) -> complex:
    """Effective radar channel coefficient after TX and RX beamforming.

    h_p = sqrt(G_p) * beta_p * (f_RX^H a_RX*(phi, theta)) * (a_TX^H(phi, theta) f_TX),
    held constant over one CPI.
    """
    a_rx = steering_upa(target.azimuth, target.elevation, geometry, "rx")
    a_tx = steering_upa(target.azimuth, target.elevation, geometry, "tx")
    rx_factor = np.vdot(f_rx.entries, np.conj(a_rx))
    tx_factor = np.vdot(a_tx, f_tx.entries)
    return complex(np.sqrt(gain) * target.beta * rx_factor * tx_factor)


def noise_clutter_variance(noise_density_w_hz: float, bandwidth_hz: float,
                           tx_power_w: float, clutter_ratio: float = 0.0) -> float:
    """Combined clutter-plus-noise variance sigma_cn^2 = N0*W + kappa*P_TX."""
    if min(noise_density_w_hz, bandwidth_hz, tx_power_w, clutter_ratio) < 0:
        raise ValueError("noise/clutter parameters must be nonnegative")
    return noise_density_w_hz * bandwidth_hz + clutter_ratio * tx_power_w


def scene_backscatter(scene: Scene) -> np.ndarray:
    """Backscatter coefficients h_p at the CPI start, constant over the CPI."""
    wf = scene.wf
    return np.array([backscatter_coefficient(
        tg, scene.f_tx, scene.f_rx,
        large_scale_gain(tg.initial_range, tg.rcs, wf.wavelength), scene.geometry)
        for tg in scene.targets])


def frame_truth(scene: Scene, m: int, backscatter: np.ndarray = None) -> FrameTruth:
    """Doppler, integer delay, and backscatter of every target at frame m.

    Constant-velocity model: nu_p = 2*(V_s - V_p)/lambda (small azimuth
    approximation) and r_p(t) = r_p(0) + (V_p - V_s)*t, rounded to whole
    sample delays.  ``backscatter`` short-circuits the h_p computation with
    a precomputed ``scene_backscatter`` result (h_p is frame-independent).
    """
    if m < 0:
        raise ValueError("frame index must be nonnegative")
    wf = scene.wf
    t = m * wf.frame_period
    doppler = np.array([2.0 * (scene.source_velocity - tg.velocity) / wf.wavelength
                        for tg in scene.targets])
    ranges = np.array([tg.initial_range + (tg.velocity - scene.source_velocity) * t
                       for tg in scene.targets])
    if np.any(ranges <= 0):
        raise ScenarioError(f"target range nonpositive at frame {m}")
    delays = np.rint(2.0 * ranges / SPEED_OF_LIGHT / wf.sample_period).astype(np.int64)
    if np.any(delays < 0):
        raise ScenarioError(f"negative delay at frame {m}")
    if len(set(delays.tolist())) != len(delays):
        raise ScenarioError(f"delays collide after rounding at frame {m}: {delays}")
    if np.any(np.diff(delays) <= 0):
        raise ScenarioError(f"delay ordering violated at frame {m}: {delays}")
    h = scene_backscatter(scene) if backscatter is None else backscatter
    return FrameTruth(frame=m, doppler_hz=doppler, delay_samples=delays, backscatter=h)


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass
class Scenario:
    """Serializable description of a scene plus detection knobs.

    This mirrors the JSON scenario file one-to-one; ``build_scene`` turns it
    into a concrete ``Scene`` (designing the wide beam along the way).
    """

    source_velocity_mps: float = 25.271
    target_velocities_mps: tuple = (20.279, 24.949, 21.806)
    target_ranges_m: tuple = (14.0, 15.7, 17.9)
    target_azimuths_rad: tuple = (-0.1, 0.0, 0.1)
    target_elevations_rad: tuple = (0.0, 0.0, 0.0)
    rcs_dbsm: float = 20.0
    p_tx_dbm: float = 20.0
    noise_density_dbm_hz: float = -174.0
    clutter_ratio: float = 0.0
    carrier_hz: float = 60e9
    bandwidth_hz: float = 1.76e9
    frame_len: int = 13632
    preamble_len: int = 3328
    n_beams: int = 3
    azimuth_beamwidth_rad: float = 0.4084
    elevation_center_rad: float = 0.0
    nx_tx: int = 8
    ny_tx: int = 2
    nx_rx: int = 8
    ny_rx: int = 2
    beta_mode: str = "fixed"          # "fixed" (beta = 1) or "rayleigh" (CN(0,1))
    threshold_scale: float = 1.0      # multiplies the 512*sigma_cn detection threshold
    search_halfwidth: int = 1024
    guard: int = 8
    first_delay_window: bool = False
    cpi_s: float = 0.5e-3
    m_i_offset: int = 6
    trials: int = 200
    seed: int = 1

    def __post_init__(self):
        n = len(self.target_velocities_mps)
        for name in ("target_ranges_m", "target_azimuths_rad", "target_elevations_rad"):
            if len(getattr(self, name)) != n:
                raise ScenarioError(f"{name} must list one value per target")
        if self.beta_mode not in ("fixed", "rayleigh"):
            raise ScenarioError(f"unknown beta_mode {self.beta_mode!r}")

    @property
    def num_targets(self) -> int:
        return len(self.target_velocities_mps)

    def waveform(self) -> WaveformParams:
        return WaveformParams(carrier_hz=self.carrier_hz,
                              bandwidth_hz=self.bandwidth_hz,
                              frame_len=self.frame_len,
                              preamble_len=self.preamble_len)


def save_scenario(scn: Scenario, path) -> None:
    data = {k: (list(v) if isinstance(v, tuple) else v)
            for k, v in vars(scn).items()}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    known = {f.name for f in Scenario.__dataclass_fields__.values()}
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    for key, val in data.items():
        if isinstance(val, list):
            data[key] = tuple(val)
    return Scenario(**data)


def default_scenario() -> Scenario:
    """The stock three-target V2V scenario used by the experiment harness."""
    return Scenario()


def draw_betas(scn: Scenario, rng: np.random.Generator) -> np.ndarray:
    """Small-scale gains for one CPI: pinned ones, or one CN(0,1) draw each."""
    if scn.beta_mode == "fixed":
        return np.ones(scn.num_targets, dtype=complex)
    re = rng.standard_normal(scn.num_targets)
    im = rng.standard_normal(scn.num_targets)
    return (re + 1j * im) / np.sqrt(2.0)


_BEAM_CACHE = {}


def _designed_beam(scn: Scenario, geometry: UpaGeometry) -> BeamformerWeights:
    # The bisection is deterministic; memoize per design so Monte Carlo
    # trials do not redo the pattern scans.
    key = (geometry, scn.n_beams, scn.azimuth_beamwidth_rad,
           scn.elevation_center_rad)
    if key not in _BEAM_CACHE:
        _BEAM_CACHE[key] = design_wide_beam(
            scn.azimuth_beamwidth_rad, scn.n_beams, geometry,
            elevation_center=scn.elevation_center_rad)
    return _BEAM_CACHE[key]


def build_scene(scn: Scenario, betas=None, p_tx_dbm=None) -> Scene:
    """Instantiate a Scene from a Scenario, designing the wide beam.

    ``betas`` overrides the small-scale gains (defaults to pinned ones);
    ``p_tx_dbm`` overrides the scenario TX power, which the sweeps use.
    """
    wf = scn.waveform()
    geometry = UpaGeometry(nx_tx=scn.nx_tx, ny_tx=scn.ny_tx,
                           nx_rx=scn.nx_rx, ny_rx=scn.ny_rx)
    f_tx = _designed_beam(scn, geometry)
    f_rx = rx_beam(f_tx)
    if betas is None:
        betas = np.ones(scn.num_targets, dtype=complex)
    rcs = 10.0 ** (scn.rcs_dbsm / 10.0)
    targets = tuple(
        Target(velocity=v, initial_range=r, azimuth=az, elevation=el,
               rcs=rcs, beta=complex(b))
        for v, r, az, el, b in zip(scn.target_velocities_mps, scn.target_ranges_m,
                                   scn.target_azimuths_rad,
                                   scn.target_elevations_rad, betas))
    p_tx = dbm_to_watts(scn.p_tx_dbm if p_tx_dbm is None else p_tx_dbm)
    n0 = dbm_to_watts(scn.noise_density_dbm_hz)
    sigma2 = noise_clutter_variance(n0, wf.bandwidth_hz, p_tx, scn.clutter_ratio)
    return Scene(source_velocity=scn.source_velocity_mps, targets=targets,
                 tx_power=p_tx, noise_clutter_var=sigma2, geometry=geometry,
                 f_tx=f_tx, f_rx=f_rx, wf=wf)
