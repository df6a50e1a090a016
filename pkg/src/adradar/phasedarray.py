"""Uniform planar array steering, wide-beam synthesis, and pattern measurement.

The source vehicle carries co-located TX and RX UPAs.  A wide azimuth beam is
formed by a weighted sum of a few steering vectors on the x-axis, Kronecker
multiplied with the single y-axis (elevation) steering vector, then normalized.
The RX beam is the elementwise conjugate of the TX beam.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BeamMeasurementError, DegenerateBeamError


@dataclass(frozen=True)
class UpaGeometry:
    """Antenna counts and element spacing (in wavelengths) of the two UPAs."""

    nx_tx: int = 8
    ny_tx: int = 2
    nx_rx: int = 8
    ny_rx: int = 2
    dx: float = 0.5
    dy: float = 0.5

    def __post_init__(self):
        if min(self.nx_tx, self.ny_tx, self.nx_rx, self.ny_rx) < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("element spacings must be positive")

    def counts(self, side: str):
        if side == "tx":
            return self.nx_tx, self.ny_tx
        if side == "rx":
            return self.nx_rx, self.ny_rx
        raise ValueError(f"side must be 'tx' or 'rx', got {side!r}")


@dataclass(frozen=True)
class BeamformerWeights:
    """Unit-norm beamforming vector with the design metadata that produced it."""

    entries: np.ndarray
    azimuths: tuple = ()
    weights: tuple = ()
    elevation: float = 0.0


def steering_x(azimuth: float, elevation: float, n: int, dx: float = 0.5) -> np.ndarray:
    """x-axis steering vector: entry m = exp(j*m*psi_x), psi_x = 2*pi*dx*cos(el)*sin(az)."""
    psi = 2.0 * np.pi * dx * np.cos(elevation) * np.sin(azimuth)
    return np.exp(1j * psi * np.arange(n))


def steering_y(elevation: float, n: int, dy: float = 0.5) -> np.ndarray:
    """y-axis steering vector: entry m = exp(j*m*psi_y), psi_y = 2*pi*dy*sin(el)."""
    psi = 2.0 * np.pi * dy * np.sin(elevation)
    return np.exp(1j * psi * np.arange(n))


def steering_upa(azimuth: float, elevation: float, geometry: UpaGeometry,
                 side: str = "tx") -> np.ndarray:
    """Full UPA steering vector, the Kronecker product of the axis vectors."""
    nx, ny = geometry.counts(side)
    return np.kron(steering_x(azimuth, elevation, nx, geometry.dx),
                   steering_y(elevation, ny, geometry.dy))


def wide_beam(azimuths, weights, elevation: float, geometry: UpaGeometry,
              side: str = "tx") -> BeamformerWeights:
    """Combine beams on the x-axis into one unit-norm wide-beam vector.

    f_x = sum_i gamma_i * a_x(phi_i, elevation); f = (f_x kron f_y) / ||.||.

    Raises
    ------
    DegenerateBeamError
        If the weighted combination is (numerically) the zero vector.
    """
    azimuths = tuple(float(a) for a in azimuths)
    weights = tuple(complex(w) for w in weights)
    if not azimuths or len(azimuths) != len(weights):
        raise ValueError("azimuths and weights must be non-empty and equal length")
    nx, ny = geometry.counts(side)
    fx = np.zeros(nx, dtype=complex)
    for phi, gamma in zip(azimuths, weights):
        fx += gamma * steering_x(phi, elevation, nx, geometry.dx)
    fy = steering_y(elevation, ny, geometry.dy)
    f = np.kron(fx, fy)
    norm = np.linalg.norm(f)
    if norm < 1e-12 * np.sqrt(nx * ny):
        raise DegenerateBeamError("beam combination is numerically zero")
    return BeamformerWeights(entries=f / norm, azimuths=azimuths,
                             weights=weights, elevation=elevation)


def rx_beam(f_tx: BeamformerWeights) -> BeamformerWeights:
    """Reciprocal receive beam: the elementwise conjugate of the TX beam."""
    return BeamformerWeights(entries=np.conj(f_tx.entries), azimuths=f_tx.azimuths,
                             weights=tuple(np.conj(w) for w in f_tx.weights),
                             elevation=f_tx.elevation)


def beam_gain(f: BeamformerWeights, azimuth: float, elevation: float,
              geometry: UpaGeometry, side: str = "tx") -> float:
    """Power pattern |a(az, el)^H f|^2 of a beamforming vector."""
    a = steering_upa(azimuth, elevation, geometry, side)
    return float(np.abs(np.vdot(a, f.entries)) ** 2)


def _gain_cut(f, geometry, side, plane, elevation_center, angles):
    if plane == "azimuth":
        nx, _ = geometry.counts(side)
        ax = np.exp(1j * 2 * np.pi * geometry.dx * np.cos(elevation_center)
                    * np.outer(np.sin(angles), np.arange(nx)))
        _, ny = geometry.counts(side)
        ay = steering_y(elevation_center, ny, geometry.dy)
        a = np.einsum("ki,j->kij", ax, ay).reshape(len(angles), -1)
    elif plane == "elevation":
        nx, ny = geometry.counts(side)
        # Azimuth fixed at 0: psi_x = 0 regardless of elevation.
        ax = np.ones((len(angles), nx))
        ay = np.exp(1j * 2 * np.pi * geometry.dy
                    * np.outer(np.sin(angles), np.arange(ny)))
        a = np.einsum("ki,kj->kij", ax + 0j, ay).reshape(len(angles), -1)
    else:
        raise ValueError(f"plane must be 'azimuth' or 'elevation', got {plane!r}")
    return np.abs(a.conj() @ f.entries) ** 2


def measure_beamwidth(f: BeamformerWeights, geometry: UpaGeometry,
                      plane: str = "azimuth", elevation_center: float = 0.0,
                      side: str = "tx", resolution: float = 1e-3) -> float:
    """Half-power width of the mainlobe in one principal plane.

    Scans the pattern cut on a uniform grid (default 1 mrad), locates the
    peak, and walks outward to the contiguous -3 dB crossings; each crossing
    is refined with a local parabolic fit through the three nearest samples.

    Raises
    ------
    BeamMeasurementError
        If the pattern is flat (no mainlobe) or the half-power level is never
        crossed inside the scanned interval.
    """
    angles = np.arange(-np.pi / 2 + resolution, np.pi / 2, resolution)
    gains = _gain_cut(f, geometry, side, plane, elevation_center, angles)
    peak = int(np.argmax(gains))
    half = gains[peak] / 2.0
    if gains[peak] <= 0 or np.all(gains >= half * 0.999999):
        raise BeamMeasurementError("pattern has no resolvable mainlobe")

    def crossing(start, step):
        i = start
        while 0 <= i + step < len(gains) and gains[i + step] >= half:
            i += step
        j = i + step
        if j < 0 or j >= len(gains):
            raise BeamMeasurementError("half-power level not crossed inside the scan")
        # The crossing lies between grid points k and k+1.
        k = min(max(i if step > 0 else j, 1), len(gains) - 2)
        y0, y1, y2 = gains[k - 1], gains[k], gains[k + 1]
        # Parabola through the three samples around the crossing:
        # g(k + x) = y1 + 0.5*(y2 - y0)*x + 0.5*(y0 - 2*y1 + y2)*x^2.
        a2 = 0.5 * (y0 - 2 * y1 + y2)
        a1 = 0.5 * (y2 - y0)
        a0 = y1 - half
        if a2 != 0:
            disc = a1 * a1 - 4 * a2 * a0
            if disc >= 0:
                roots = [(-a1 + s * np.sqrt(disc)) / (2 * a2) for s in (1, -1)]
                inside = [r for r in roots if 0.0 <= r <= 1.0]
                if inside:
                    return angles[k] + min(inside) * resolution
        # Fall back to linear interpolation between the straddling samples.
        gi, gj = gains[i], gains[j]
        frac = (gi - half) / (gi - gj)
        return angles[i] + step * frac * resolution

    upper = crossing(peak, +1)
    lower = crossing(peak, -1)
    return float(upper - lower)


def design_wide_beam(target_width: float, n_beams: int, geometry: UpaGeometry,
                     elevation_center: float = 0.0, side: str = "tx",
                     tol: float = 1e-5) -> BeamformerWeights:
    """Pick component azimuths so the combined beam hits a 3 dB azimuth width.

    Uses ``n_beams`` equally weighted beams at azimuths symmetric about zero,
    {-delta, ..., 0, ..., +delta}; delta is found by bisection on the measured
    width.  Deterministic for a given geometry and target.
    """
    if n_beams < 1:
        raise ValueError("n_beams must be >= 1")

    def beam(delta):
        az = tuple(np.linspace(-delta, delta, n_beams)) if n_beams > 1 else (0.0,)
        return wide_beam(az, (1.0,) * n_beams, elevation_center, geometry, side)

    def width(delta):
        return measure_beamwidth(beam(delta), geometry, "azimuth",
                                 elevation_center, side)

    lo = 0.0
    w_lo = width(lo)
    if w_lo >= target_width or n_beams == 1:
        return beam(lo)
    hi = 0.05
    while width(hi) < target_width:
        hi *= 2.0
        if hi > np.pi / 2:
            raise BeamMeasurementError(
                f"cannot reach target width {target_width} rad with {n_beams} beams")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if width(mid) < target_width:
            lo = mid
        else:
            hi = mid
    return beam(0.5 * (lo + hi))
