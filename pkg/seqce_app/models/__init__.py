from .channel import ChannelModelSpec, ChannelModelVariant, RepetitionCopy
from .estimator import EstimatorState, UpdateDiagnostics
from .simulation import EstimatorKind, MseCurve, R0Init, RunManifest, SimConfig
from .waveform import OfdmSymbol, WaveformConfig

__all__ = [
    "ChannelModelSpec",
    "ChannelModelVariant",
    "RepetitionCopy",
    "EstimatorState",
    "UpdateDiagnostics",
    "EstimatorKind",
    "MseCurve",
    "R0Init",
    "RunManifest",
    "SimConfig",
    "OfdmSymbol",
    "WaveformConfig",
]
