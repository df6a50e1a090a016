"""IEEE 802.11ad single-carrier waveform timing parameters."""

from dataclasses import dataclass

from scipy.constants import c as SPEED_OF_LIGHT


@dataclass(frozen=True)
class WaveformParams:
    """Symbol-rate timing of the 802.11ad SC PHY frame used for sensing.

    Attributes
    ----------
    carrier_hz : float
        Carrier frequency (60 GHz channelization).
    bandwidth_hz : float
        Symbol rate / occupied bandwidth (1.76 GHz).
    frame_len : int
        Samples per frame, preamble plus data fields (K = 13632).
    preamble_len : int
        Training samples per frame (K_pre = 3328).
    """

    carrier_hz: float = 60e9
    bandwidth_hz: float = 1.76e9
    frame_len: int = 13632
    preamble_len: int = 3328

    @property
    def sample_period(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def frame_period(self) -> float:
        return self.frame_len * self.sample_period

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    def frames_per_cpi(self, cpi_s: float) -> int:
        """Number of whole frames fitting in one coherent processing interval."""
        if cpi_s < 2 * self.frame_period:
            raise ValueError(f"CPI {cpi_s} s shorter than two frames "
                             f"({2 * self.frame_period:.3e} s)")
        return int(cpi_s / self.frame_period)
