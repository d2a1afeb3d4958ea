from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

# 3GPP Extended Typical Urban tapped-delay line
ETU_TAP_DELAYS_NS = (0.0, 50.0, 120.0, 200.0, 230.0, 500.0, 1600.0, 2300.0, 5000.0)
ETU_TAP_POWERS_DB = (-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0)
NB_IOT_SUBCARRIER_SPACING_HZ = 15e3
NB_IOT_NUM_SUBCARRIERS = 12


class ChannelModelVariant(Enum):
    """Frequency-domain correlation structure of the channel vector."""
    IID_FLAT = "iid_flat"
    FULLY_CORRELATED = "fully_correlated"
    ETU_PROFILE = "etu"


@dataclass(frozen=True)
class ChannelModelSpec:
    """Channel model description; the ETU fields are ignored by the other variants."""
    variant: ChannelModelVariant = ChannelModelVariant.IID_FLAT
    tap_delays_ns: Tuple[float, ...] = ETU_TAP_DELAYS_NS
    tap_powers_db: Tuple[float, ...] = ETU_TAP_POWERS_DB
    subcarrier_spacing_hz: float = NB_IOT_SUBCARRIER_SPACING_HZ
    subcarrier_indices: Optional[Tuple[int, ...]] = None  # None means 0..K-1

    @classmethod
    def iid_flat(cls) -> "ChannelModelSpec":
        return cls(variant=ChannelModelVariant.IID_FLAT)

    @classmethod
    def fully_correlated(cls) -> "ChannelModelSpec":
        return cls(variant=ChannelModelVariant.FULLY_CORRELATED)

    @classmethod
    def etu(cls, subcarrier_indices: Optional[Tuple[int, ...]] = None) -> "ChannelModelSpec":
        """Standard ETU profile at 15 kHz spacing."""
        indices = tuple(int(i) for i in subcarrier_indices) if subcarrier_indices is not None else None
        return cls(variant=ChannelModelVariant.ETU_PROFILE, subcarrier_indices=indices)

    @property
    def tap_delays_s(self) -> np.ndarray:
        return np.asarray(self.tap_delays_ns, dtype=float) * 1e-9


@dataclass
class RepetitionCopy:
    """
    One LS observation r_m = e^{j phi_m} h + v_m.

    `true_phase` is ground truth kept for scoring only; estimators never read it.
    """
    r: np.ndarray
    true_phase: float = 0.0
    copy_index: int = 0

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=complex)

    @property
    def num_observations(self) -> int:
        return self.r.shape[-1]

    def __repr__(self):
        return f"<RepetitionCopy m={self.copy_index} K={self.num_observations}>"
