"""
Waveform Service
Time-domain OFDM path used to check that oscillator phase noise and residual
frequency offset act on a narrow band as one common phase rotation per symbol.

Sample and subcarrier indices are centered (n, k in [-N/2, N/2-1]); arrays
store index i at position i + N/2.
"""

import logging
from typing import Optional, Tuple, Union

import numpy as np

from ..errors import WaveformError
from ..models.channel import RepetitionCopy
from ..models.waveform import OfdmSymbol, WaveformConfig

logger = logging.getLogger(__name__)


def _centered_dft(samples: np.ndarray) -> np.ndarray:
    """(1/sqrt N) sum_n s[n] e^{-j 2 pi n k/N} over centered n and k."""
    return np.fft.fftshift(np.fft.fft(np.fft.ifftshift(samples), norm="ortho"))


def _centered_idft(grid: np.ndarray) -> np.ndarray:
    """(1/sqrt N) sum_k S[k] e^{j 2 pi n k/N} over centered n and k."""
    return np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(grid), norm="ortho"))


def sample_phase_stream(cfg: WaveformConfig, rng: np.random.Generator) -> np.ndarray:
    """Wiener phase process phi[n] starting at cfg.initial_phase."""
    increments = np.zeros(cfg.fft_size)
    if cfg.phase_noise_std > 0.0:
        increments[1:] = cfg.phase_noise_std * rng.standard_normal(cfg.fft_size - 1)
    return cfg.initial_phase + np.cumsum(increments)


def generate_ofdm_symbol(
    cfg: WaveformConfig,
    grid: np.ndarray,
    h_taps: np.ndarray,
    rng: np.random.Generator,
) -> OfdmSymbol:
    """
    s[n] = e^{j phi[n]} ((1/sqrt N) sum_k S[k] e^{j 2 pi n (f_e + k)/N} * h)[n] + w[n]

    `*` is a linear convolution truncated to the N symbol samples (no cyclic
    prefix). The noise has variance cfg.noise_var per complex sample.
    """
    grid = np.asarray(grid, dtype=complex)
    if grid.shape != (cfg.fft_size,):
        raise WaveformError(f"grid must have {cfg.fft_size} bins, got shape {grid.shape}")
    inactive = np.ones(cfg.fft_size, dtype=bool)
    inactive[cfg.active_positions] = False
    if np.any(grid[inactive] != 0.0):
        raise WaveformError("grid has energy on inactive subcarriers")
    h_taps = np.atleast_1d(np.asarray(h_taps, dtype=complex))
    if h_taps.ndim != 1 or h_taps.size == 0:
        raise WaveformError("channel taps must be a non-empty 1-D sequence")

    n = cfg.sample_indices
    baseband = _centered_idft(grid) * np.exp(2j * np.pi * n * cfg.residual_fo / cfg.fft_size)
    faded = np.convolve(baseband, h_taps)[: cfg.fft_size]

    phase_stream = sample_phase_stream(cfg, rng)
    samples = np.exp(1j * phase_stream) * faded
    if cfg.noise_var > 0.0:
        noise = rng.standard_normal(cfg.fft_size) + 1j * rng.standard_normal(cfg.fft_size)
        samples = samples + np.sqrt(cfg.noise_var / 2.0) * noise
    return OfdmSymbol(tx_grid=grid, time_samples=samples, phase_stream=phase_stream)


def demodulate(sym: Union[OfdmSymbol, np.ndarray], fft_size: Optional[int] = None) -> np.ndarray:
    """Unitary centered DFT of the received samples."""
    samples = sym.time_samples if isinstance(sym, OfdmSymbol) else np.asarray(sym, dtype=complex)
    if samples.ndim != 1:
        raise WaveformError("expected a 1-D sample sequence")
    if fft_size is not None and samples.size != fft_size:
        raise WaveformError(f"expected {fft_size} samples, got {samples.size}")
    return _centered_dft(samples)


def compute_cpe_term(phase_stream: np.ndarray, f_e: float, N: int) -> complex:
    """(1/N) sum_n e^{j(phi[n] + 2 pi n f_e/N)}; exactly 1 without impairments."""
    phase_stream = np.asarray(phase_stream, dtype=float)
    if phase_stream.shape != (N,):
        raise WaveformError(f"phase stream must have {N} samples, got shape {phase_stream.shape}")
    n = np.arange(-N // 2, N // 2)
    return complex(np.mean(np.exp(1j * (phase_stream + 2.0 * np.pi * n * f_e / N))))


def ls_extract(
    received_grid: np.ndarray,
    tx_refs: np.ndarray,
    ref_positions: Optional[np.ndarray] = None,
    copy_index: int = 0,
    true_phase: float = 0.0,
) -> RepetitionCopy:
    """
    r[k] = received[k]/S[k] on the K reference subcarriers.

    Without `ref_positions` the received grid must already hold the K reference
    bins in the order of `tx_refs`.
    """
    received = np.asarray(received_grid, dtype=complex)
    refs = np.asarray(tx_refs, dtype=complex)
    if ref_positions is not None:
        received = received[np.asarray(ref_positions, dtype=int)]
    if received.shape != refs.shape:
        raise WaveformError(f"{received.size} received bins for {refs.size} reference symbols")
    if np.any(refs == 0.0):
        raise WaveformError("reference symbols must be nonzero")
    return RepetitionCopy(r=received / refs, true_phase=float(true_phase), copy_index=int(copy_index))


def qpsk_references(count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus QPSK pilots."""
    bits = rng.integers(0, 4, size=count)
    return np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * bits))


def observe_reference_symbol(
    cfg: WaveformConfig,
    h_taps: np.ndarray,
    tx_refs: np.ndarray,
    rng: np.random.Generator,
    copy_index: int = 0,
) -> RepetitionCopy:
    """Generate, demodulate and LS-extract one symbol carrying pilots on every active subcarrier."""
    tx_refs = np.asarray(tx_refs, dtype=complex)
    if tx_refs.size != len(cfg.active_subcarriers):
        raise WaveformError(
            f"{tx_refs.size} pilots for {len(cfg.active_subcarriers)} active subcarriers"
        )
    grid = np.zeros(cfg.fft_size, dtype=complex)
    grid[cfg.active_positions] = tx_refs
    sym = generate_ofdm_symbol(cfg, grid, h_taps, rng)
    received = demodulate(sym, cfg.fft_size)
    return ls_extract(
        received,
        tx_refs,
        ref_positions=cfg.active_positions,
        copy_index=copy_index,
        true_phase=float(np.angle(compute_cpe_term(sym.phase_stream, cfg.residual_fo, cfg.fft_size))),
    )


def simulate_cpe_trials(
    cfg: WaveformConfig, num_trials: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Moduli and phases of the common phase error term over independent symbols."""
    moduli = np.empty(num_trials)
    phases = np.empty(num_trials)
    for trial in range(num_trials):
        cpe = compute_cpe_term(sample_phase_stream(cfg, rng), cfg.residual_fo, cfg.fft_size)
        moduli[trial] = abs(cpe)
        phases[trial] = np.angle(cpe)
    logger.info(
        f"CPE over {num_trials} trials: mean modulus {moduli.mean():.6f}, "
        f"1st percentile {np.percentile(moduli, 1):.6f}"
    )
    return moduli, phases
