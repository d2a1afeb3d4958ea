from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..errors import WaveformError

NB_IOT_FFT_SIZE = 128


def middle_subcarriers(count: int = 12) -> Tuple[int, ...]:
    """Centered subcarrier indices -count/2 .. count/2-1 around DC."""
    return tuple(range(-(count // 2), count - count // 2))


@dataclass(frozen=True)
class WaveformConfig:
    """
    Single OFDM symbol impairment model.

    Subcarrier and sample indices are centered, i.e. run over [-N/2, N/2-1].
    `residual_fo` is normalized by the subcarrier spacing and
    `phase_noise_std` is the Wiener increment per sample in radians.
    A `noise_var` of zero disables the additive noise.
    """
    fft_size: int = NB_IOT_FFT_SIZE
    active_subcarriers: Tuple[int, ...] = field(default_factory=middle_subcarriers)
    residual_fo: float = 0.0
    phase_noise_std: float = 0.0
    noise_var: float = 0.0
    initial_phase: float = 0.0
    num_trials: int = 10000
    seed: int = 2024

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        n = self.fft_size
        if n < 2 or n % 2:
            raise WaveformError(f"FFT size must be an even integer >= 2, got {n}", "fft_size")
        if len(self.active_subcarriers) > n:
            raise WaveformError("more active subcarriers than FFT bins", "active_subcarriers")
        if len(set(self.active_subcarriers)) != len(self.active_subcarriers):
            raise WaveformError("active subcarriers must be distinct", "active_subcarriers")
        if any(k < -n // 2 or k > n // 2 - 1 for k in self.active_subcarriers):
            raise WaveformError(f"active subcarriers must lie in [{-n // 2}, {n // 2 - 1}]", "active_subcarriers")
        if not np.isfinite(self.residual_fo):
            raise WaveformError("residual frequency offset must be finite", "residual_fo")
        if not np.isfinite(self.phase_noise_std) or self.phase_noise_std < 0.0:
            raise WaveformError("phase noise std must be finite and nonnegative", "phase_noise_std")
        if not np.isfinite(self.noise_var) or self.noise_var < 0.0:
            raise WaveformError("noise variance must be finite and nonnegative", "noise_var")
        if not np.isfinite(self.initial_phase):
            raise WaveformError("initial phase must be finite", "initial_phase")
        if self.num_trials < 1:
            raise WaveformError("at least one trial is required", "num_trials")

    @property
    def sample_indices(self) -> np.ndarray:
        return np.arange(-self.fft_size // 2, self.fft_size // 2)

    def positions(self, subcarriers) -> np.ndarray:
        """Array positions of centered subcarrier indices in a length-N grid."""
        return np.asarray(subcarriers, dtype=int) + self.fft_size // 2

    @property
    def active_positions(self) -> np.ndarray:
        return self.positions(self.active_subcarriers)


@dataclass
class OfdmSymbol:
    """One received OFDM symbol with the phase stream that impaired it."""
    tx_grid: np.ndarray
    time_samples: np.ndarray
    phase_stream: np.ndarray

    def __post_init__(self):
        n = len(self.time_samples)
        if len(self.tx_grid) != n or len(self.phase_stream) != n:
            raise WaveformError(
                f"inconsistent symbol lengths: grid {len(self.tx_grid)}, "
                f"samples {n}, phase {len(self.phase_stream)}"
            )

    @property
    def fft_size(self) -> int:
        return len(self.time_samples)
