import numpy as np
import pytest
from scipy import special

from seqce_app.errors import CorrelationError, DimensionError, PhaseUndefinedError
from seqce_app.models.channel import RepetitionCopy
from seqce_app.models.estimator import EstimatorState
from seqce_app.services.estimator_service import (
    compute_zeta,
    estimate_phase,
    init_state,
    scalar_update_fully_correlated,
    theoretical_mse,
    update_correlation,
    update_ideal,
    update_proposed,
    update_traditional,
)
from seqce_app.utils.bessel import BesselRatioTable

RATIO_1 = 0.44638996589653457
RATIO_4 = 0.86352261102455063


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def scalar_state(h_hat=1.0, corr=1.0, gamma=1.0, copies=1):
    return EstimatorState(
        h_hat=np.array([h_hat], dtype=complex),
        corr=np.array([[corr]], dtype=complex),
        gamma=gamma,
        copies_processed=copies,
    )


# Test: initial state
def test_init_state():
    state = init_state(np.eye(3), 1.0)
    np.testing.assert_array_equal(state.h_hat, np.zeros(3))
    np.testing.assert_array_equal(state.corr, np.eye(3))
    assert state.copies_processed == 0
    assert init_state(np.ones((4, 4)), 0.5).gamma == 0.5
    assert init_state(np.eye(2), 1.0, batch_size=6).h_hat.shape == (6, 2)


def test_init_state_rejects_invalid_inputs():
    with pytest.raises(CorrelationError):
        init_state(np.array([[1.0, 0.5], [0.0, 1.0]]), 1.0)
    with pytest.raises(CorrelationError):
        init_state(np.array([[1.0, 2.0], [2.0, 1.0]]), 1.0)
    with pytest.raises(ValueError):
        init_state(np.eye(2), 0.0)


# Test: zeta
def test_zeta_is_zero_for_zero_estimate():
    diag = compute_zeta(np.array([1.0 + 1.0j]), scalar_state(h_hat=0.0))
    assert diag.zeta == 0.0
    assert diag.bessel_ratio == 0.0


def test_zeta_scalar_example():
    diag = compute_zeta(np.array([1.0]), scalar_state())
    assert diag.inner_product == pytest.approx(0.5)
    assert diag.zeta == pytest.approx(RATIO_1, abs=1e-12)
    assert diag.bessel_ratio == pytest.approx(RATIO_1, abs=1e-12)


def test_zeta_carries_conjugate_phase_of_observation():
    diag = compute_zeta(RepetitionCopy(r=np.array([1j])), scalar_state())
    assert abs(diag.zeta) == pytest.approx(RATIO_1, abs=1e-12)
    assert diag.zeta == pytest.approx(-1j * RATIO_1, abs=1e-12)
    assert diag.phase_estimate == pytest.approx(np.pi / 2)


def test_phase_estimate_follows_copy_rotation(rng):
    h = cn(rng, 5, 4)
    phi = np.array([0.3, -2.0, 1.5, 3.0, -0.7])
    state = EstimatorState(h_hat=h, corr=np.eye(4, dtype=complex), gamma=0.5, copies_processed=1)
    diag = compute_zeta(h * np.exp(1j * phi)[:, None], state)
    np.testing.assert_allclose(diag.phase_estimate, phi, atol=1e-12)
    np.testing.assert_allclose(diag.phase_estimate, -np.angle(diag.inner_product), atol=1e-12)


def test_zeta_modulus_equals_ratio(rng):
    state = EstimatorState(h_hat=cn(rng, 20, 6), corr=np.eye(6, dtype=complex), gamma=0.7, copies_processed=2)
    diag = compute_zeta(cn(rng, 20, 6), state)
    np.testing.assert_allclose(np.abs(diag.zeta), diag.bessel_ratio, atol=1e-12)
    assert np.all((diag.bessel_ratio >= 0.0) & (diag.bessel_ratio < 1.0))


# Test: proposed update
def test_proposed_scalar_example():
    state, diag = update_proposed(scalar_state(), np.array([1.0]))
    assert state.h_hat[0] == pytest.approx(0.5 * (1.0 + RATIO_1), abs=1e-12)
    assert state.corr[0, 0] == pytest.approx(0.5)
    assert state.copies_processed == 2
    assert diag.zeta == pytest.approx(RATIO_1, abs=1e-12)


def test_proposed_first_copy_is_standard_mmse():
    state, diag = update_proposed(init_state(np.eye(1), 1.0), np.array([1.0]))
    assert state.h_hat[0] == pytest.approx(0.5)
    assert diag.zeta == 1.0
    assert state.copies_processed == 1


def test_proposed_barely_moves_at_vanishing_snr(rng):
    h = cn(rng, 4)
    state = EstimatorState(h_hat=h, corr=np.eye(4, dtype=complex), gamma=1e8, copies_processed=3)
    updated, _ = update_proposed(state, h)
    np.testing.assert_allclose(updated.h_hat, h, atol=1e-6)


# Test: traditional update
def test_traditional_scalar_examples():
    state, diag = update_traditional(scalar_state(), np.array([1.0]))
    assert state.h_hat[0] == pytest.approx(1.0)
    assert diag.bessel_ratio == 1.0

    state, diag = update_traditional(scalar_state(), np.array([1j]))
    assert diag.zeta == pytest.approx(-1j)
    assert state.h_hat[0] == pytest.approx(1.0)


def test_traditional_falls_back_to_unit_zeta():
    _, diag = update_traditional(scalar_state(h_hat=0.0), np.array([1.0]))
    assert diag.zeta == 1.0
    state, _ = update_traditional(init_state(np.eye(2), 1.0), np.array([2.0, 4.0]))
    np.testing.assert_allclose(state.h_hat, [1.0, 2.0])


def test_proposed_zeta_never_exceeds_traditional(rng):
    for _ in range(50):
        gamma = rng.uniform(0.1, 10.0)
        state = EstimatorState(h_hat=cn(rng, 5), corr=np.eye(5, dtype=complex), gamma=gamma, copies_processed=1)
        r = cn(rng, 5)
        _, proposed = update_proposed(state, r)
        _, traditional = update_traditional(state, r)
        assert abs(proposed.zeta) < abs(traditional.zeta) == pytest.approx(1.0)


# Test: ideal update and correlation recursion
def test_ideal_two_copies():
    state = init_state(np.eye(1), 1.0)
    for _ in range(2):
        state = update_ideal(state, np.array([1.0]))
    assert state.h_hat[0] == pytest.approx(2.0 / 3.0)


def test_ideal_matches_batch_mmse(rng):
    K, gamma = 6, 0.8
    state = init_state(np.eye(K), gamma)
    copies = cn(rng, 12, K)
    for m in range(1, 13):
        state = update_ideal(state, copies[m - 1])
        np.testing.assert_allclose(state.h_hat, copies[:m].sum(axis=0) / (m + gamma), atol=1e-10)
        np.testing.assert_allclose(state.corr, gamma / (gamma + m) * np.eye(K), atol=1e-10)


def test_ideal_without_copies_is_zero():
    np.testing.assert_array_equal(init_state(np.eye(3), 2.0).h_hat, np.zeros(3))


@pytest.mark.parametrize("R, gamma, expected", [
    (np.eye(3), 1.0, 0.5 * np.eye(3)),
    (np.ones((2, 2)), 1.0, np.ones((2, 2)) / 3.0),
    (np.zeros((2, 2)), 0.3, np.zeros((2, 2))),
])
def test_update_correlation_examples(R, gamma, expected):
    np.testing.assert_allclose(update_correlation(R, gamma), expected, atol=1e-14)


def test_update_correlation_maps_eigenvalues(rng):
    A = cn(rng, 5, 5)
    R = A @ A.conj().T
    gamma = 0.6
    updated = update_correlation(R, gamma)
    np.testing.assert_allclose(updated, updated.conj().T, atol=1e-14)
    np.testing.assert_allclose(updated @ R, R @ updated, atol=1e-10)
    eigenvalues = np.linalg.eigvalsh(R)
    np.testing.assert_allclose(np.linalg.eigvalsh(updated), eigenvalues / (1.0 + eigenvalues / gamma), atol=1e-10)


def test_trace_shrinks_every_copy():
    R = np.eye(4, dtype=complex) + 0.5 * np.ones((4, 4))
    for _ in range(20):
        updated = update_correlation(R, 1.0)
        assert np.trace(updated).real < np.trace(R).real
        R = updated


# Test: phase estimate
@pytest.mark.parametrize("r, expected", [
    ([1.0], 0.0),
    ([1j], np.pi / 2),
    ([complex(-1.0, -0.0)], np.pi),
])
def test_estimate_phase_examples(r, expected):
    assert estimate_phase(np.array([1.0 + 0j]), np.array(r)) == pytest.approx(expected)


def test_estimate_phase_recovers_rotation(rng):
    h = cn(rng, 8)
    for phi in np.linspace(-3.0, 3.0, 13):
        assert estimate_phase(h, np.exp(1j * phi) * h) == pytest.approx(phi, abs=1e-12)


def test_estimate_phase_batch(rng):
    h = cn(rng, 4, 3)
    phases = np.array([0.1, -0.2, 2.0, -3.0])
    np.testing.assert_allclose(estimate_phase(h, np.exp(1j * phases)[:, None] * h), phases, atol=1e-12)


def test_estimate_phase_undefined():
    with pytest.raises(PhaseUndefinedError):
        estimate_phase(np.zeros(2), np.ones(2))


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        update_proposed(init_state(np.eye(2), 1.0), np.ones(3))
    with pytest.raises(DimensionError):
        compute_zeta(np.ones(1), init_state(np.eye(2), 1.0))


# Test: closed-form special cases
def test_iid_reduction(rng):
    for _ in range(1000):
        K = int(rng.integers(1, 13))
        gamma = float(rng.uniform(0.05, 20.0))
        h_hat, r = cn(rng, K), cn(rng, K)
        state = EstimatorState(h_hat=h_hat, corr=np.eye(K, dtype=complex), gamma=gamma, copies_processed=1)
        updated, _ = update_proposed(state, r)

        inner = np.vdot(r, h_hat)
        x = 2.0 * abs(inner) / (gamma + 1.0)
        zeta1 = special.i1e(x) / special.i0e(x) * inner / abs(inner)
        expected = gamma / (gamma + 1.0) * h_hat + zeta1 / (gamma + 1.0) * r
        np.testing.assert_allclose(updated.h_hat, expected, atol=1e-10)


@pytest.mark.parametrize("K", [1, 2, 4, 12])
def test_fully_correlated_reduction(rng, K):
    for _ in range(250):
        gamma = float(rng.uniform(0.05, 20.0))
        variance = float(rng.uniform(0.05, 2.0))
        c = complex(cn(rng, 1)[0])
        r = cn(rng, K) + 0.7 * c
        state = EstimatorState(
            h_hat=np.full(K, c),
            corr=variance * np.ones((K, K), dtype=complex),
            gamma=gamma,
            copies_processed=1,
        )
        updated, _ = update_proposed(state, r)
        h_new, variance_new = scalar_update_fully_correlated(c, variance, gamma, r)
        np.testing.assert_allclose(updated.h_hat, np.full(K, h_new), atol=1e-8)
        np.testing.assert_allclose(updated.corr, variance_new * np.ones((K, K)), atol=1e-8)


def test_scalar_update_examples():
    # one observation: identical to the vector update with R = [1]
    h_new, variance = scalar_update_fully_correlated(1.0, 1.0, 1.0, np.array([1.0]))
    assert h_new == pytest.approx(0.5 * (1.0 + RATIO_1), abs=1e-12)
    assert variance == pytest.approx(0.5)

    # variance 1/K gives the gamma + 1 normalization
    h_first, _ = scalar_update_fully_correlated(0.0, 0.25, 1.0, np.array([2.0, 2.0, 2.0, 2.0]), first_copy=True)
    assert h_first == pytest.approx(1.0)

    h_new, variance = scalar_update_fully_correlated(1.0, 0.25, 1.0, np.ones(4))
    assert h_new == pytest.approx(0.5 + 0.5 * RATIO_4, abs=1e-9)
    assert variance == pytest.approx(0.125)


def test_scalar_update_rejects_bad_inputs():
    with pytest.raises(ValueError):
        scalar_update_fully_correlated(1.0, 1.0, 0.0, np.ones(2))
    with pytest.raises(CorrelationError):
        scalar_update_fully_correlated(1.0, -1.0, 1.0, np.ones(2))


# Test: structural properties
def test_proposed_is_phase_equivariant(rng):
    for _ in range(100):
        K = int(rng.integers(1, 9))
        A = cn(rng, K, K)
        state = EstimatorState(
            h_hat=cn(rng, K), corr=A @ A.conj().T + np.eye(K), gamma=float(rng.uniform(0.1, 5.0)), copies_processed=2,
        )
        r = cn(rng, K)
        theta = rng.uniform(0.0, 2 * np.pi)
        plain, _ = update_proposed(state, r)
        rotated, _ = update_proposed(state, np.exp(1j * theta) * r)
        np.testing.assert_allclose(rotated.h_hat, plain.h_hat, atol=1e-10)


def test_batched_state_matches_single_updates(rng):
    R = np.eye(3) + 0.3 * np.ones((3, 3))
    batch = init_state(R, 0.9, batch_size=4)
    singles = [init_state(R, 0.9) for _ in range(4)]
    for _ in range(5):
        copies = cn(rng, 4, 3)
        batch, diag = update_proposed(batch, copies)
        singles = [update_proposed(state, copy)[0] for state, copy in zip(singles, copies)]
        np.testing.assert_allclose(batch.h_hat, np.array([s.h_hat for s in singles]), atol=1e-12)
    assert np.shape(diag.zeta) == (4,)


def test_ratio_table_tracks_exact_update(rng):
    state = EstimatorState(h_hat=cn(rng, 6), corr=np.eye(6, dtype=complex), gamma=0.5, copies_processed=1)
    r = cn(rng, 6)
    exact, _ = update_proposed(state, r)
    approx, _ = update_proposed(state, r, ratio_fn=BesselRatioTable())
    np.testing.assert_allclose(approx.h_hat, exact.h_hat, atol=1e-5)


def test_theoretical_mse():
    gamma = 0.5
    m = np.arange(1, 21)
    np.testing.assert_allclose(theoretical_mse(np.eye(12), gamma, 20), gamma / (gamma + m), rtol=1e-12)
    np.testing.assert_allclose(theoretical_mse(np.ones((4, 4)), gamma, 20), gamma / (gamma + 4 * m), rtol=1e-12)
