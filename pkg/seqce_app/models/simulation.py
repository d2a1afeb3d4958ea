from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, Tuple, Union

import numpy as np

from ..errors import ConfigError
from .channel import ChannelModelSpec, NB_IOT_NUM_SUBCARRIERS


class EstimatorKind(Enum):
    """Sequential estimator variants driven in lockstep by the simulator."""
    PROPOSED = "proposed"
    TRADITIONAL = "traditional"
    IDEAL = "ideal"


class R0Init(Enum):
    """Initial correlation matrix handed to the estimators."""
    IDENTITY = "identity"
    IDEAL_MODEL = "ideal_model"


class RatioEvaluation(Enum):
    EXACT = "exact"
    TABLE = "table"


@dataclass(frozen=True)
class SimConfig:
    """Monte-Carlo experiment description."""
    snr_db_list: Tuple[float, ...] = (-4.0, -2.0, 0.0)
    num_subcarriers: int = NB_IOT_NUM_SUBCARRIERS
    num_copies: int = 20
    num_realizations: int = 2000
    seed: int = 2024
    channel: ChannelModelSpec = field(default_factory=ChannelModelSpec)
    phase_noise: bool = True
    estimators: Tuple[EstimatorKind, ...] = (
        EstimatorKind.PROPOSED,
        EstimatorKind.TRADITIONAL,
        EstimatorKind.IDEAL,
    )
    r0_inits: Tuple[R0Init, ...] = (R0Init.IDENTITY,)
    ratio_evaluation: RatioEvaluation = RatioEvaluation.EXACT

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.snr_db_list:
            raise ConfigError("at least one SNR value is required", field="SNR_DB_LIST")
        if not all(np.isfinite(s) for s in self.snr_db_list):
            raise ConfigError("SNR values must be finite", field="SNR_DB_LIST")
        if len(set(self.snr_db_list)) != len(self.snr_db_list):
            raise ConfigError("SNR values must be distinct", field="SNR_DB_LIST")
        if self.num_subcarriers < 1:
            raise ConfigError("K must be at least 1", field="NUM_SUBCARRIERS")
        if self.num_copies < 1:
            raise ConfigError("at least one repetition copy is required", field="NUM_COPIES")
        if self.num_realizations < 1:
            raise ConfigError("at least one realization is required", field="NUM_REALIZATIONS")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", field="SEED")
        if not self.estimators:
            raise ConfigError("at least one estimator is required", field="ESTIMATORS")
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigError("estimators must not repeat", field="ESTIMATORS")
        if not self.r0_inits or len(set(self.r0_inits)) != len(self.r0_inits):
            raise ConfigError("R0 initializations must be non-empty and distinct", field="R0_INIT")

    @property
    def r0_init(self) -> R0Init:
        return self.r0_inits[0]

    @staticmethod
    def gamma_from_snr_db(snr_db: float) -> float:
        """Per-entry noise variance for unit-variance channel entries."""
        return float(10.0 ** (-snr_db / 10.0))


def to_db(values: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    return 10.0 * np.log10(values)


@dataclass
class MseCurve:
    """MSE(m) for m = 1..M, per (estimator, snr_db)."""
    num_copies: int
    r0_init: R0Init = R0Init.IDENTITY
    values: Dict[Tuple[EstimatorKind, float], np.ndarray] = field(default_factory=dict)

    def add(self, estimator: EstimatorKind, snr_db: float, mse: np.ndarray) -> None:
        mse = np.asarray(mse, dtype=float)
        if mse.shape != (self.num_copies,):
            raise ValueError(f"Expected {self.num_copies} MSE values, got shape {mse.shape}")
        if not np.all(np.isfinite(mse)) or np.any(mse < 0.0):
            raise ValueError(f"MSE values must be finite and nonnegative for {estimator.value} at {snr_db} dB")
        self.values[(estimator, float(snr_db))] = mse

    def mse(self, estimator: EstimatorKind, snr_db: float) -> np.ndarray:
        return self.values[(estimator, float(snr_db))]

    def mse_db(self, estimator: EstimatorKind, snr_db: float) -> np.ndarray:
        return to_db(self.mse(estimator, snr_db))

    def rows(self) -> Iterator[Tuple[str, float, int, float, float]]:
        """(estimator, snr_db, copy_index, mse, mse_db) with copy_index starting at 1."""
        for (estimator, snr_db), mse in self.values.items():
            for m, value in enumerate(mse, start=1):
                yield estimator.value, snr_db, m, float(value), float(to_db(value))


@dataclass(frozen=True)
class RunManifest:
    """What was run, where it was written and with which tool version."""
    config_path: Path
    output_dir: Path
    config: object
    version: str
