"""
Estimator Service
Sequential MMSE channel estimation over repetition copies with random phase
rotations, together with the phase-compensating baseline, the phase-free
update and the closed-form special cases used as references.

One update with a new copy r and prior (h_hat, R):

    R~     = (I + R/gamma)^-1
    h_new  = R~ (h_hat + (zeta/gamma) R r)
    R_new  = R (I + R/gamma)^-1
    zeta   = I1(x)/I0(x) * u,   x = 2|r^H R~ h_hat|/gamma,   u = r^H R~ h_hat / |r^H R~ h_hat|

States may carry a batch of estimates h_hat of shape (B, K) that share R.
"""

from typing import Callable, Optional, Tuple, Union

import numpy as np

from ..errors import CorrelationError, DimensionError, PhaseUndefinedError
from ..models.channel import RepetitionCopy
from ..models.estimator import EstimatorState, UpdateDiagnostics
from ..utils.bessel import bessel_ratio_i1_i0
from ..utils.linalg import factor_solve, factor_solve_matrix, shifted_factor, validate_correlation

RatioFunction = Callable[[np.ndarray], np.ndarray]
Observation = Union[RepetitionCopy, np.ndarray]


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not np.isfinite(gamma) or gamma <= 0.0:
        raise ValueError(f"noise variance gamma must be positive and finite, got {gamma}")
    return gamma


def _observation(r: Observation, size: int) -> np.ndarray:
    values = r.r if isinstance(r, RepetitionCopy) else np.asarray(r, dtype=complex)
    if values.shape[-1] != size:
        raise DimensionError(f"observation has {values.shape[-1]} entries, expected {size}")
    return values


def _wrap_phase(phase):
    """Map angles from [-pi, pi] onto (-pi, pi]."""
    return np.where(phase <= -np.pi, phase + 2.0 * np.pi, phase)


def init_state(R0: np.ndarray, gamma: float, batch_size: Optional[int] = None) -> EstimatorState:
    """Start of the recursion: h_hat = 0, R = R0, no copies processed."""
    gamma = _check_gamma(gamma)
    corr = validate_correlation(R0)
    size = corr.shape[0]
    shape = (size,) if batch_size is None else (batch_size, size)
    return EstimatorState(h_hat=np.zeros(shape, dtype=complex), corr=corr, gamma=gamma)


def update_correlation(R: np.ndarray, gamma: float) -> np.ndarray:
    """R_{m+1} = R_m (I + R_m/gamma)^-1, eigenvalues map lambda -> lambda/(1 + lambda/gamma)."""
    gamma = _check_gamma(gamma)
    R = np.asarray(R, dtype=complex)
    return _next_correlation(R, shifted_factor(R, gamma))


def _next_correlation(R: np.ndarray, factor) -> np.ndarray:
    # R and (I + R/gamma)^-1 commute, so solving from the left gives the same product
    updated = factor_solve_matrix(factor, R)
    return 0.5 * (updated + updated.conj().T)


def _inner_product(r: np.ndarray, mmse_h: np.ndarray) -> np.ndarray:
    """r^H R~ h_hat along the last axis."""
    return np.sum(r.conj() * mmse_h, axis=-1)


def _diagnostics(inner: np.ndarray, gamma: float, ratio_fn: RatioFunction) -> UpdateDiagnostics:
    magnitude = np.abs(inner)
    ratio = np.asarray(ratio_fn(2.0 * magnitude / gamma), dtype=float)
    defined = magnitude > 0.0
    unit = np.where(defined, inner / np.where(defined, magnitude, 1.0), 0.0)
    phase = np.where(defined, _wrap_phase(np.angle(inner.conj())), 0.0)
    return UpdateDiagnostics(
        zeta=_squeeze(ratio * unit),
        bessel_ratio=_squeeze(ratio),
        inner_product=_squeeze(inner),
        phase_estimate=_squeeze(phase),
    )


def _squeeze(values: np.ndarray):
    values = np.asarray(values)
    return values.item() if values.ndim == 0 else values


def compute_zeta(
    r: Observation,
    state: EstimatorState,
    ratio_fn: RatioFunction = bessel_ratio_i1_i0,
) -> UpdateDiagnostics:
    """
    The zeta factor for copy r given the current state.

    A zero inner product gives zeta = 0, the limit of the Bessel ratio at zero.
    The reported phase estimate is in the sense of estimate_phase (about +phi_m).
    """
    observation = _observation(r, state.num_observations)
    factor = shifted_factor(state.corr, state.gamma)
    inner = _inner_product(observation, factor_solve(factor, state.h_hat))
    return _diagnostics(inner, state.gamma, ratio_fn)


def _apply(state: EstimatorState, observation: np.ndarray, zeta, factor) -> EstimatorState:
    R = state.corr
    zeta = np.asarray(zeta)
    rhs = state.h_hat + (zeta[..., None] if zeta.ndim else zeta) / state.gamma * (observation @ R.T)
    h_new = factor_solve(factor, rhs)
    return state.advance(h_hat=h_new, corr=_next_correlation(R, factor))


def _first_copy(state: EstimatorState, observation: np.ndarray, factor) -> Tuple[EstimatorState, UpdateDiagnostics]:
    # phi_0 = 0 by convention, so the first copy is a standard MMSE step
    batch = state.h_hat.shape[:-1]
    ones = np.ones(batch, dtype=complex)
    diagnostics = UpdateDiagnostics(
        zeta=_squeeze(ones),
        bessel_ratio=_squeeze(np.ones(batch)),
        inner_product=_squeeze(np.zeros(batch, dtype=complex)),
        phase_estimate=_squeeze(np.zeros(batch)),
    )
    return _apply(state, observation, ones if batch else 1.0, factor), diagnostics


def update_proposed(
    state: EstimatorState,
    r: Observation,
    ratio_fn: RatioFunction = bessel_ratio_i1_i0,
) -> Tuple[EstimatorState, UpdateDiagnostics]:
    """Sequential MMSE update accounting for the unknown uniform phase of r."""
    observation = _observation(r, state.num_observations)
    factor = shifted_factor(state.corr, state.gamma)
    if state.copies_processed == 0:
        return _first_copy(state, observation, factor)

    inner = _inner_product(observation, factor_solve(factor, state.h_hat))
    diagnostics = _diagnostics(inner, state.gamma, ratio_fn)
    return _apply(state, observation, diagnostics.zeta, factor), diagnostics


def update_traditional(state: EstimatorState, r: Observation) -> Tuple[EstimatorState, UpdateDiagnostics]:
    """Phase-compensating baseline: zeta is the unit phasor, I1/I0 taken as 1."""
    observation = _observation(r, state.num_observations)
    factor = shifted_factor(state.corr, state.gamma)
    if state.copies_processed == 0:
        return _first_copy(state, observation, factor)

    inner = _inner_product(observation, factor_solve(factor, state.h_hat))
    diagnostics = _diagnostics(inner, state.gamma, np.ones_like)
    # an undefined phase falls back to zeta = 1
    zeta = np.where(np.abs(inner) > 0.0, diagnostics.zeta, 1.0)
    diagnostics = UpdateDiagnostics(
        zeta=_squeeze(zeta),
        bessel_ratio=diagnostics.bessel_ratio,
        inner_product=diagnostics.inner_product,
        phase_estimate=diagnostics.phase_estimate,
    )
    return _apply(state, observation, diagnostics.zeta, factor), diagnostics


def update_ideal(state: EstimatorState, r: Observation) -> EstimatorState:
    """Standard sequential MMSE update (zeta = 1) for copies without phase rotation."""
    observation = _observation(r, state.num_observations)
    factor = shifted_factor(state.corr, state.gamma)
    return _apply(state, observation, 1.0, factor)


def estimate_phase(h_hat: np.ndarray, r: Observation):
    """phi_hat = angle(h_hat^H r) in (-pi, pi]; arrays give one angle per row."""
    h_hat = np.asarray(h_hat, dtype=complex)
    observation = _observation(r, h_hat.shape[-1])
    inner = np.sum(h_hat.conj() * observation, axis=-1)
    if np.any(inner == 0.0):
        raise PhaseUndefinedError("phase is undefined because h_hat^H r = 0")
    return _squeeze(_wrap_phase(np.angle(inner)))


def scalar_update_fully_correlated(
    h_hat: complex,
    variance: float,
    gamma: float,
    r: Observation,
    first_copy: bool = False,
    ratio_fn: RatioFunction = bessel_ratio_i1_i0,
) -> Tuple[complex, float]:
    """
    Scalar form of the update for R = variance * ones(K, K).

    Only the common gain is estimated from the mean r~ of the K entries:

        h_new = gamma/(gamma + K s) h_hat + zeta2 K s/(gamma + K s) r~
        zeta2 = I1(x)/I0(x) * u,   x = 2K|r~ h_hat|/(gamma + K s)
        s_new = gamma s/(gamma + K s)

    Returns (h_new, s_new). With variance = 1/K this is the gamma + 1 form.
    """
    gamma = _check_gamma(gamma)
    variance = float(variance)
    if not np.isfinite(variance) or variance < 0.0:
        raise CorrelationError(f"variance must be nonnegative, got {variance}")
    observation = r.r if isinstance(r, RepetitionCopy) else np.asarray(r, dtype=complex)
    K = observation.shape[-1]
    r_mean = complex(np.mean(observation))
    h_hat = complex(h_hat)
    denom = gamma + K * variance

    if first_copy:
        zeta = 1.0 + 0.0j
    else:
        inner = r_mean.conjugate() * h_hat
        magnitude = abs(inner)
        zeta = 0.0j if magnitude == 0.0 else ratio_fn(2.0 * K * magnitude / denom) * inner / magnitude

    h_new = gamma / denom * h_hat + zeta * K * variance / denom * r_mean
    return h_new, gamma * variance / denom


def theoretical_mse(R0: np.ndarray, gamma: float, num_copies: int) -> np.ndarray:
    """trace(R_m)/K for m = 1..num_copies, the MSE with perfectly known phases."""
    gamma = _check_gamma(gamma)
    R = validate_correlation(R0)
    size = R.shape[0]
    values = np.empty(num_copies)
    for m in range(num_copies):
        R = update_correlation(R, gamma)
        values[m] = np.trace(R).real / size
    return values
