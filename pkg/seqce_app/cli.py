"""
Command line interface: simulate, sweep and validate-waveform.

Each command reads a KEY=VALUE experiment file, writes CSV results plus a
manifest into the output directory and exits non-zero on any error.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence

import click
import numpy as np

from . import __version__, setup_logging
from .config import (
    Config,
    dump_manifest,
    load_sim_config,
    load_waveform_config,
)
from .errors import ConfigError, SeqCEError
from .models.simulation import RunManifest
from .services.montecarlo_service import run_experiment, run_sweep
from .services.waveform_service import simulate_cpe_trials

logger = logging.getLogger(__name__)

CPE_TOLERANCE = 0.05


def _format_number(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(value)
    return f"{float(value):.12g}"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write rows with LF endings and '.' decimals; returns the number of data rows."""
    count = 0
    with open(path, "w", encoding="utf8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([item if isinstance(item, str) else _format_number(item) for item in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return count


def _prepare_output(out: Path) -> Path:
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory {out}: {e}", field="--out") from e
    return out


def _write_manifest(config_path: Path, out: Path, cfg) -> None:
    manifest = RunManifest(config_path=Path(config_path), output_dir=out, config=cfg, version=__version__)
    path = out / Config.MANIFEST_FILE
    path.write_text(dump_manifest(manifest), encoding="utf8")
    logger.info(f"Wrote manifest to {path}")


def _run(action):
    try:
        action()
    except SeqCEError as e:
        raise click.ClickException(str(e)) from e
    except OSError as e:
        raise click.ClickException(f"I/O error: {e}") from e


config_option = click.option(
    "--config", "config_path", required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Experiment file with KEY=VALUE lines.",
)
out_option = click.option(
    "--out", "out", default=lambda: Config.OUTPUT_DIR, show_default="results",
    type=click.Path(file_okay=False, path_type=Path), help="Output directory.",
)
seed_option = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Overrides SEED.")
threads_option = click.option(
    "--threads", type=click.IntRange(min=1), default=lambda: Config.DEFAULT_THREADS,
    help="Parallel work units; results do not depend on it.",
)


@click.group()
@click.version_option(__version__, prog_name="seqce")
@click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
def cli(verbose):
    """Sequential MMSE channel estimation under random phase noise."""
    setup_logging(logging.DEBUG if verbose else None)


@cli.command()
@config_option
@out_option
@seed_option
@threads_option
def simulate(config_path, out, seed, threads):
    """MSE versus repetition copy for every estimator and SNR."""

    def action():
        cfg = load_sim_config(config_path, seed=seed)
        if len(cfg.r0_inits) != 1:
            raise ConfigError("simulate takes a single R0 initialization; use sweep to compare", field="R0_INIT")
        directory = _prepare_output(out)
        curve = run_experiment(cfg, threads=threads)
        write_csv(
            directory / Config.MSE_VS_COPY_FILE,
            ("estimator", "snr_db", "copy_index", "mse", "mse_db"),
            curve.rows(),
        )
        _write_manifest(config_path, directory, cfg)

    _run(action)


@cli.command()
@config_option
@out_option
@seed_option
@threads_option
@click.option("--copy-index", "copy_index", type=int, default=20, show_default=True,
              help="Repetition copy at which the MSE is reported.")
def sweep(config_path, out, seed, threads, copy_index):
    """MSE versus SNR at a fixed copy index for each R0 initialization."""

    def action():
        cfg = load_sim_config(config_path, seed=seed)
        directory = _prepare_output(out)
        rows = run_sweep(cfg, copy_index, threads=threads)
        write_csv(directory / Config.MSE_VS_SNR_FILE, ("estimator", "r0_init", "snr_db", "mse_db"), rows)
        _write_manifest(config_path, directory, cfg)

    _run(action)


@cli.command("validate-waveform")
@config_option
@out_option
@seed_option
def validate_waveform(config_path, out, seed):
    """Statistics of the common phase error term over independent symbols."""

    def action():
        cfg = load_waveform_config(config_path, seed=seed)
        directory = _prepare_output(out)
        rng = np.random.default_rng(cfg.seed)
        moduli, phases = simulate_cpe_trials(cfg, cfg.num_trials, rng)
        write_csv(
            directory / Config.CPE_STATS_FILE,
            ("trial", "cpe_modulus", "cpe_phase"),
            ((trial, modulus, phase) for trial, (modulus, phase) in enumerate(zip(moduli, phases))),
        )
        within = float(np.mean(np.abs(moduli - 1.0) < CPE_TOLERANCE))
        write_csv(
            directory / Config.CPE_SUMMARY_FILE,
            ("mean_modulus", "p01_modulus", "fraction_within_tolerance"),
            [(float(np.mean(moduli)), float(np.percentile(moduli, 1)), within)],
        )
        _write_manifest(config_path, directory, cfg)

    _run(action)


def main():
    cli(prog_name="seqce")


if __name__ == "__main__":
    main()
