"""
Channel Service
Correlation matrices, channel draws, per-copy phase rotations and noisy LS
observations for repetition-coded reception.

Every generator takes an explicit numpy Generator so that a realization owns its
random stream and results do not depend on execution order.
"""

import logging

import numpy as np

from ..errors import ChannelModelError
from ..models.channel import ChannelModelSpec, ChannelModelVariant, RepetitionCopy
from ..utils.linalg import MAX_DIMENSION, psd_factor, validate_correlation

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def build_correlation(spec: ChannelModelSpec, K: int) -> np.ndarray:
    """
    Correlation matrix R = E[h h^H] for K reference observations.

    IID_FLAT gives I, FULLY_CORRELATED gives the all-ones matrix and ETU_PROFILE
    gives R[k, l] = sum_p P_p exp(-j 2 pi df (idx_k - idx_l) tau_p) with the tap
    powers normalized to unit total power.
    """
    if not isinstance(K, (int, np.integer)) or K < 1 or K > MAX_DIMENSION:
        raise ChannelModelError(f"K must be an integer in [1, {MAX_DIMENSION}], got {K!r}")

    if spec.variant is ChannelModelVariant.IID_FLAT:
        return np.eye(K, dtype=complex)
    if spec.variant is ChannelModelVariant.FULLY_CORRELATED:
        return np.ones((K, K), dtype=complex)

    delays = spec.tap_delays_s
    powers_db = np.asarray(spec.tap_powers_db, dtype=float)
    if delays.size == 0 or delays.shape != powers_db.shape:
        raise ChannelModelError(
            f"ETU profile needs matching delays and powers, got {delays.size} and {powers_db.size}"
        )
    if not np.all(np.isfinite(delays)) or delays[0] < 0.0 or np.any(np.diff(delays) <= 0.0):
        raise ChannelModelError("tap delays must be nonnegative and strictly increasing")
    powers = 10.0 ** (powers_db / 10.0)
    total = powers.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ChannelModelError("tap powers cannot be normalized")
    powers = powers / total

    if not np.isfinite(spec.subcarrier_spacing_hz) or spec.subcarrier_spacing_hz <= 0.0:
        raise ChannelModelError("subcarrier spacing must be positive")
    if spec.subcarrier_indices is None:
        indices = np.arange(K)
    else:
        indices = np.asarray(spec.subcarrier_indices, dtype=int)
        if indices.size != K:
            raise ChannelModelError(f"expected {K} subcarrier indices, got {indices.size}")
        if np.unique(indices).size != K:
            raise ChannelModelError("duplicate subcarrier indices")

    offsets = indices[:, None] - indices[None, :]
    phases = -TWO_PI * spec.subcarrier_spacing_hz * offsets[..., None] * delays
    R = np.sum(powers * np.exp(1j * phases), axis=-1)
    logger.debug(
        f"ETU correlation for K={K}: {delays.size} taps, spacing {spec.subcarrier_spacing_hz:g} Hz, "
        f"|R[0, K-1]| = {abs(R[0, -1]):.4f}"
    )
    return validate_correlation(R)


def sample_channel(R: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw h = L z with L L^H = R and z IID CN(0, 1)."""
    L = psd_factor(np.asarray(R, dtype=complex))
    size = L.shape[0]
    z = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
    return L @ z


def sample_phase(rng: np.random.Generator) -> float:
    """Uniform phase on [0, 2 pi)."""
    phi = float(rng.uniform(0.0, TWO_PI))
    # uniform() can round up to the excluded endpoint
    return phi if phi < TWO_PI else 0.0


def make_repetition_copy(
    h: np.ndarray,
    phi: float,
    gamma: float,
    m: int,
    rng: np.random.Generator,
    noise: bool = True,
) -> RepetitionCopy:
    """
    r = e^{j phi} h + v with v IID CN(0, gamma).

    The unit-variance noise is drawn even when `gamma` changes so that the same
    stream yields the same noise shape at every SNR.
    """
    if not np.isfinite(gamma) or gamma <= 0.0:
        raise ChannelModelError(f"noise variance must be positive, got {gamma}")
    h = np.asarray(h, dtype=complex)
    r = np.exp(1j * phi) * h
    if noise:
        size = h.shape[-1]
        v = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
        r = r + np.sqrt(gamma) * v
    return RepetitionCopy(r=r, true_phase=float(phi), copy_index=int(m))
