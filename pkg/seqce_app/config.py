import logging
import os
import re
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from .errors import ChannelModelError, ConfigError, WaveformError
from .models.channel import ChannelModelSpec, ChannelModelVariant
from .models.simulation import EstimatorKind, R0Init, RatioEvaluation, RunManifest, SimConfig
from .models.waveform import WaveformConfig

logger = logging.getLogger(__name__)

# Get the project root directory
basedir = os.path.abspath(os.path.dirname(os.path.dirname(__file__)))

# Load .env file FIRST so it can override the defaults below
env_path = Path(basedir) / ".env"
if env_path.exists():
    load_dotenv(env_path)
    logger.debug(f"Loaded environment from {env_path}")


class Config:
    LOG_LEVEL = os.getenv("SEQCE_LOG_LEVEL", "INFO").upper()
    OUTPUT_DIR = os.getenv("SEQCE_OUTPUT_DIR", "results")
    DEFAULT_THREADS = int(os.getenv("SEQCE_THREADS", "1"))

    # Realizations per Monte-Carlo work unit. Every realization owns its random
    # stream, so neither this value nor the thread count changes the results.
    BLOCK_SIZE = int(os.getenv("SEQCE_BLOCK_SIZE", "250"))

    RATIO_TABLE_MAX = float(os.getenv("SEQCE_RATIO_TABLE_MAX", "50.0"))
    RATIO_TABLE_SIZE = int(os.getenv("SEQCE_RATIO_TABLE_SIZE", "8193"))

    # Output file names
    MSE_VS_COPY_FILE = "mse_vs_copy.csv"
    MSE_VS_SNR_FILE = "mse_vs_snr.csv"
    CPE_STATS_FILE = "cpe_stats.csv"
    CPE_SUMMARY_FILE = "cpe_summary.csv"
    MANIFEST_FILE = "manifest.env"


_KEY_LINE = re.compile(r"^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=")


# --- Value parsers ---

def _parse_int(raw: str) -> int:
    return int(raw.strip())


def _parse_float(raw: str) -> float:
    return float(raw.strip())


def _parse_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got '{raw}'")


def _parse_list(item_parser: Callable) -> Callable:
    def parse(raw: str):
        items = [item.strip() for item in raw.split(",") if item.strip()]
        if not items:
            raise ValueError("expected a comma separated list")
        return tuple(item_parser(item) for item in items)
    return parse


def _parse_enum(enum_cls) -> Callable:
    def parse(raw: str):
        value = raw.strip().lower()
        try:
            return enum_cls(value)
        except ValueError:
            allowed = ", ".join(member.value for member in enum_cls)
            raise ValueError(f"'{raw}' is not one of: {allowed}")
    return parse


SIM_FIELDS: Dict[str, Tuple[str, Callable]] = {
    "SNR_DB_LIST": ("snr_db_list", _parse_list(_parse_float)),
    "NUM_SUBCARRIERS": ("num_subcarriers", _parse_int),
    "NUM_COPIES": ("num_copies", _parse_int),
    "NUM_REALIZATIONS": ("num_realizations", _parse_int),
    "SEED": ("seed", _parse_int),
    "CHANNEL": ("variant", _parse_enum(ChannelModelVariant)),
    "TAP_DELAYS_NS": ("tap_delays_ns", _parse_list(_parse_float)),
    "TAP_POWERS_DB": ("tap_powers_db", _parse_list(_parse_float)),
    "SUBCARRIER_SPACING_HZ": ("subcarrier_spacing_hz", _parse_float),
    "SUBCARRIER_INDICES": ("subcarrier_indices", _parse_list(_parse_int)),
    "PHASE_NOISE": ("phase_noise", _parse_bool),
    "ESTIMATORS": ("estimators", _parse_list(_parse_enum(EstimatorKind))),
    "R0_INIT": ("r0_inits", _parse_list(_parse_enum(R0Init))),
    "RATIO_EVALUATION": ("ratio_evaluation", _parse_enum(RatioEvaluation)),
}

CHANNEL_KEYS = ("variant", "tap_delays_ns", "tap_powers_db", "subcarrier_spacing_hz", "subcarrier_indices")

# message keyword -> config key reported for channel model errors
_CHANNEL_ERROR_FIELDS = (
    ("K must", "NUM_SUBCARRIERS"),
    ("spacing", "SUBCARRIER_SPACING_HZ"),
    ("subcarrier indices", "SUBCARRIER_INDICES"),
    ("delays", "TAP_DELAYS_NS"),
    ("powers", "TAP_POWERS_DB"),
)

WAVEFORM_FIELDS: Dict[str, Tuple[str, Callable]] = {
    "FFT_SIZE": ("fft_size", _parse_int),
    "ACTIVE_SUBCARRIERS": ("active_subcarriers", _parse_list(_parse_int)),
    "RESIDUAL_FO": ("residual_fo", _parse_float),
    "PHASE_NOISE_STD": ("phase_noise_std", _parse_float),
    "NOISE_VAR": ("noise_var", _parse_float),
    "INITIAL_PHASE": ("initial_phase", _parse_float),
    "NUM_TRIALS": ("num_trials", _parse_int),
    "SEED": ("seed", _parse_int),
}


def _read_key_values(path: Path, fields: Dict[str, Tuple[str, Callable]]):
    """Parse a KEY=VALUE file into {attribute: value} and {KEY: line number}."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e

    lines: Dict[str, int] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = _KEY_LINE.match(line)
        if not match:
            raise ConfigError(f"expected KEY=VALUE, got '{stripped}'", line=number)
        key = match.group(1)
        if key in lines:
            raise ConfigError("key given twice", field=key, line=number)
        if key not in fields:
            raise ConfigError(f"unknown key; expected one of {', '.join(fields)}", field=key, line=number)
        lines[key] = number

    raw_values = dotenv_values(path, interpolate=False)
    parsed = {}
    for key, raw in raw_values.items():
        attribute, parser = fields[key]
        if raw is None or not raw.strip():
            raise ConfigError("missing value", field=key, line=lines.get(key))
        try:
            parsed[attribute] = parser(raw)
        except ValueError as e:
            raise ConfigError(str(e), field=key, line=lines.get(key)) from e
    return parsed, lines


def _with_line(error: ConfigError, lines: Dict[str, int]) -> ConfigError:
    if error.line is None and error.field in lines:
        return ConfigError(error.message, field=error.field, line=lines[error.field])
    return error


def load_sim_config(path: Path, seed: Optional[int] = None) -> SimConfig:
    """Read an experiment file; `seed` overrides the file's SEED."""
    from .services.channel_service import build_correlation

    parsed, lines = _read_key_values(path, SIM_FIELDS)
    channel_args = {key: parsed.pop(key) for key in CHANNEL_KEYS if key in parsed}
    channel = ChannelModelSpec(**channel_args)
    if seed is not None:
        parsed["seed"] = seed

    try:
        cfg = SimConfig(channel=channel, **parsed)
    except ConfigError as e:
        raise _with_line(e, lines) from e

    try:
        build_correlation(cfg.channel, cfg.num_subcarriers)
    except ChannelModelError as e:
        field = next((key for word, key in _CHANNEL_ERROR_FIELDS if word in str(e)), "CHANNEL")
        raise ConfigError(str(e), field=field, line=lines.get(field)) from e

    logger.info(f"Loaded experiment config from {path}")
    return cfg


def load_waveform_config(path: Path, seed: Optional[int] = None) -> WaveformConfig:
    parsed, lines = _read_key_values(path, WAVEFORM_FIELDS)
    if seed is not None:
        parsed["seed"] = seed
    try:
        cfg = WaveformConfig(**parsed)
    except WaveformError as e:
        field = next((key for key, (attribute, _) in WAVEFORM_FIELDS.items() if attribute == e.attribute), None)
        raise ConfigError(str(e), field=field, line=lines.get(field)) from e
    logger.info(f"Loaded waveform config from {path}")
    return cfg


# --- Serialization ---

def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_format_value(item) for item in value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _dump(values: Iterable[Tuple[str, object]]) -> str:
    return "".join(f"{key}={_format_value(value)}\n" for key, value in values if value is not None)


def dump_sim_config(cfg: SimConfig) -> str:
    channel = cfg.channel
    return _dump([
        ("SNR_DB_LIST", tuple(float(s) for s in cfg.snr_db_list)),
        ("NUM_SUBCARRIERS", cfg.num_subcarriers),
        ("NUM_COPIES", cfg.num_copies),
        ("NUM_REALIZATIONS", cfg.num_realizations),
        ("SEED", cfg.seed),
        ("CHANNEL", channel.variant),
        ("TAP_DELAYS_NS", tuple(float(d) for d in channel.tap_delays_ns)),
        ("TAP_POWERS_DB", tuple(float(p) for p in channel.tap_powers_db)),
        ("SUBCARRIER_SPACING_HZ", float(channel.subcarrier_spacing_hz)),
        ("SUBCARRIER_INDICES", channel.subcarrier_indices),
        ("PHASE_NOISE", cfg.phase_noise),
        ("ESTIMATORS", cfg.estimators),
        ("R0_INIT", cfg.r0_inits),
        ("RATIO_EVALUATION", cfg.ratio_evaluation),
    ])


def dump_waveform_config(cfg: WaveformConfig) -> str:
    return _dump([
        ("FFT_SIZE", cfg.fft_size),
        ("ACTIVE_SUBCARRIERS", cfg.active_subcarriers),
        ("RESIDUAL_FO", float(cfg.residual_fo)),
        ("PHASE_NOISE_STD", float(cfg.phase_noise_std)),
        ("NOISE_VAR", float(cfg.noise_var)),
        ("INITIAL_PHASE", float(cfg.initial_phase)),
        ("NUM_TRIALS", cfg.num_trials),
        ("SEED", cfg.seed),
    ])


def dump_manifest(manifest: RunManifest) -> str:
    """Manifest text; the metadata lines are comments so the file re-parses as a config."""
    if isinstance(manifest.config, SimConfig):
        body = dump_sim_config(manifest.config)
    else:
        body = dump_waveform_config(manifest.config)
    header: List[str] = [
        "# seqce run manifest",
        f"# tool_version: {manifest.version}",
        f"# config_path: {manifest.config_path}",
        f"# output_dir: {manifest.output_dir}",
    ]
    return "\n".join(header) + "\n" + body
