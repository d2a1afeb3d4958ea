from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class EstimatorState:
    """
    Running state of a sequential estimator.

    `h_hat` has shape (K,) for a single realization or (B, K) for a batch of
    realizations sharing the same correlation matrix `corr`.
    """
    h_hat: np.ndarray
    corr: np.ndarray
    gamma: float
    copies_processed: int = 0

    @property
    def num_observations(self) -> int:
        return self.corr.shape[0]

    def advance(self, h_hat: np.ndarray, corr: np.ndarray) -> "EstimatorState":
        return replace(self, h_hat=h_hat, corr=corr, copies_processed=self.copies_processed + 1)

    def __repr__(self):
        return (
            f"<EstimatorState K={self.num_observations} m={self.copies_processed} "
            f"gamma={self.gamma:.4g}>"
        )


@dataclass(frozen=True)
class UpdateDiagnostics:
    """
    Quantities computed while applying one copy; arrays for batched states.

    `phase_estimate` is arg(conj(inner_product)), the rotation of the copy
    relative to the prior. It has the sign of estimate_phase, not of the inner
    product itself.
    """
    zeta: complex
    bessel_ratio: float
    inner_product: complex
    phase_estimate: float
