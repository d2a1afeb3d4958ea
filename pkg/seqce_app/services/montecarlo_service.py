"""
Monte-Carlo Service
Drives the estimator variants in lockstep over independent channel
realizations and reduces per-copy squared errors into MSE curves.

Realization i at SNR index s draws from its own stream seeded by
(seed, s, i). Realizations are processed in fixed blocks of Config.BLOCK_SIZE;
threads only decide how many blocks run at once, and errors are summed over
the full realization axis in index order, so results are bit-identical for any
thread count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import Config
from ..errors import ConfigError, DimensionError
from ..models.simulation import EstimatorKind, MseCurve, R0Init, RatioEvaluation, SimConfig, to_db
from ..utils.bessel import BesselRatioTable, bessel_ratio_i1_i0
from .channel_service import build_correlation, make_repetition_copy, sample_channel, sample_phase
from .estimator_service import (
    estimate_phase,
    init_state,
    update_ideal,
    update_proposed,
    update_traditional,
)

logger = logging.getLogger(__name__)


def squared_errors(h_hat: np.ndarray, phi_hat: np.ndarray, h: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Per-realization ||h_hat e^{j phi_hat} - h e^{j phi}||^2."""
    h_hat = np.atleast_2d(np.asarray(h_hat, dtype=complex))
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    phi_hat = np.atleast_1d(np.asarray(phi_hat, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if h_hat.shape != h.shape:
        raise DimensionError(f"estimates have shape {h_hat.shape}, truths have shape {h.shape}")
    if phi_hat.shape != (h.shape[0],) or phi.shape != (h.shape[0],):
        raise DimensionError("one phase per realization is required")
    diff = h_hat * np.exp(1j * phi_hat)[:, None] - h * np.exp(1j * phi)[:, None]
    return np.sum(np.abs(diff) ** 2, axis=-1)


def mse_metric(h_hat: np.ndarray, phi_hat: np.ndarray, h: np.ndarray, phi: np.ndarray, K: int) -> float:
    """(1/NK) sum_n ||h_hat_n e^{j phi_hat_n} - h_n e^{j phi_n}||^2 at one copy index."""
    errors = squared_errors(h_hat, phi_hat, h, phi)
    if np.atleast_2d(h).shape[-1] != K:
        raise DimensionError(f"vectors have {np.atleast_2d(h).shape[-1]} entries, expected K={K}")
    return float(np.sum(errors) / (errors.size * K))


@dataclass
class _Block:
    """Draws for a contiguous range of realizations at one SNR."""
    start: int
    h: np.ndarray  # (B, K)
    phases: np.ndarray  # (M, B)
    copies: np.ndarray  # (M, B, K), rotated by phases
    plain_copies: np.ndarray  # (M, B, K), same noise without rotation


def _realization_rng(seed: int, snr_index: int, realization: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(snr_index, realization)))


def _draw_block(cfg: SimConfig, R: np.ndarray, gamma: float, snr_index: int, start: int, stop: int) -> _Block:
    K, M = cfg.num_subcarriers, cfg.num_copies
    size = stop - start
    h = np.empty((size, K), dtype=complex)
    phases = np.zeros((M, size))
    copies = np.empty((M, size, K), dtype=complex)
    plain = np.empty((M, size, K), dtype=complex)

    for b, realization in enumerate(range(start, stop)):
        rng = _realization_rng(cfg.seed, snr_index, realization)
        # coherent-time assumption: one channel draw per realization
        h[b] = sample_channel(R, rng)
        for m in range(M):
            phi = sample_phase(rng) if cfg.phase_noise and m > 0 else 0.0
            copy = make_repetition_copy(h[b], phi, gamma, m, rng)
            phases[m, b] = phi
            copies[m, b] = copy.r
            plain[m, b] = copy.r + (1.0 - np.exp(1j * phi)) * h[b]
    return _Block(start=start, h=h, phases=phases, copies=copies, plain_copies=plain)


def _ratio_function(cfg: SimConfig):
    if cfg.ratio_evaluation is RatioEvaluation.TABLE:
        return BesselRatioTable(Config.RATIO_TABLE_MAX, Config.RATIO_TABLE_SIZE)
    return bessel_ratio_i1_i0


def _run_block(
    cfg: SimConfig,
    block: _Block,
    R0: np.ndarray,
    gamma: float,
    ratio_fn,
) -> Dict[EstimatorKind, np.ndarray]:
    """Squared errors of shape (M, B) per estimator."""
    size = block.h.shape[0]
    errors: Dict[EstimatorKind, np.ndarray] = {}
    for kind in cfg.estimators:
        state = init_state(R0, gamma, batch_size=size)
        out = np.empty((cfg.num_copies, size))
        for m in range(cfg.num_copies):
            if kind is EstimatorKind.IDEAL:
                # genie reference: phase-free copies, nothing to estimate
                state = update_ideal(state, block.plain_copies[m])
                out[m] = squared_errors(state.h_hat, np.zeros(size), block.h, np.zeros(size))
                continue
            if kind is EstimatorKind.PROPOSED:
                state, _ = update_proposed(state, block.copies[m], ratio_fn=ratio_fn)
            else:
                state, _ = update_traditional(state, block.copies[m])
            phi_hat = np.zeros(size) if m == 0 else estimate_phase(state.h_hat, block.copies[m])
            out[m] = squared_errors(state.h_hat, phi_hat, block.h, block.phases[m])
        errors[kind] = out
    return errors


def _initial_correlation(cfg: SimConfig, R_true: np.ndarray) -> np.ndarray:
    if cfg.r0_init is R0Init.IDEAL_MODEL:
        return R_true
    return np.eye(cfg.num_subcarriers, dtype=complex)


def run_experiment(cfg: SimConfig, threads: Optional[int] = None) -> MseCurve:
    """MSE(m), m = 1..M, for every selected estimator and SNR."""
    threads = max(1, int(threads or Config.DEFAULT_THREADS))
    K, N_r = cfg.num_subcarriers, cfg.num_realizations
    R_true = build_correlation(cfg.channel, K)
    R0 = _initial_correlation(cfg, R_true)
    ratio_fn = _ratio_function(cfg)
    block_size = max(1, Config.BLOCK_SIZE)
    bounds: List[Tuple[int, int]] = [
        (start, min(start + block_size, N_r)) for start in range(0, N_r, block_size)
    ]

    logger.info(
        f"Running {N_r} realizations x {cfg.num_copies} copies, K={K}, "
        f"channel={cfg.channel.variant.value}, R0={cfg.r0_init.value}, "
        f"SNRs={list(cfg.snr_db_list)}, threads={threads}"
    )
    totals: Dict[Tuple[EstimatorKind, float], np.ndarray] = {}

    for snr_index, snr_db in enumerate(cfg.snr_db_list):
        gamma = SimConfig.gamma_from_snr_db(snr_db)

        def work(bound: Tuple[int, int]) -> Dict[EstimatorKind, np.ndarray]:
            block = _draw_block(cfg, R_true, gamma, snr_index, *bound)
            logger.debug(f"SNR {snr_db} dB: realizations {bound[0]}..{bound[1] - 1}")
            return _run_block(cfg, block, R0, gamma, ratio_fn)

        if threads == 1:
            results = [work(bound) for bound in bounds]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(work, bounds))

        for kind in cfg.estimators:
            errors = np.concatenate([result[kind] for result in results], axis=1)
            totals[(kind, snr_db)] = np.sum(errors, axis=1) / (N_r * K)
        logger.info(
            f"SNR {snr_db} dB done: "
            + ", ".join(
                f"{kind.value} MSE({cfg.num_copies}) = {to_db(totals[(kind, snr_db)][-1]):.2f} dB"
                for kind in cfg.estimators
            )
        )

    curve = MseCurve(num_copies=cfg.num_copies, r0_init=cfg.r0_init)
    for kind in cfg.estimators:
        for snr_db in cfg.snr_db_list:
            curve.add(kind, snr_db, totals[(kind, snr_db)])
    return curve


def run_sweep(cfg: SimConfig, copy_index: int, threads: Optional[int] = None) -> List[Tuple[str, str, float, float]]:
    """
    MSE in dB at one copy index for every SNR, estimator and R0 initialization.

    Rows are (estimator, r0_init, snr_db, mse_db). Every initialization reuses
    the same seed, so the modes are compared on common random numbers.
    """
    if not 1 <= copy_index <= cfg.num_copies:
        raise ConfigError(f"copy index {copy_index} outside 1..{cfg.num_copies}", field="--copy-index")
    rows = []
    for r0_init in cfg.r0_inits:
        curve = run_experiment(replace(cfg, r0_inits=(r0_init,)), threads=threads)
        for kind in cfg.estimators:
            for snr_db in cfg.snr_db_list:
                mse = curve.mse(kind, snr_db)[copy_index - 1]
                rows.append((kind.value, r0_init.value, float(snr_db), float(to_db(mse))))
    return rows
