"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import functools
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import __version__
from .analysis import (
    CountTable,
    chsh_S,
    fit_all_fringes,
    ideal_scan_curve,
    loglog_slope,
    scan_S,
)
from .config import RunConfig, config_to_dict, dumps_config, load_config
from .datafiles import (
    FRINGE_HEADER,
    SCAN_HEADER,
    DataFormatError,
    atomic_write_text,
    counts_to_csv,
    format_table,
    fringe_rows,
    read_counts_csv,
    rows_to_csv,
    rows_to_json,
    scan_rows,
)
from .errors import (
    ConfigError,
    InsufficientData,
    MissingSetting,
    OamOverflow,
    SettingMismatch,
    ZeroCounts,
    ZeroNorm,
)
from .experiments import ExperimentConfig, Mode, expected_counts, pair_rate_for_peak, simulate_counts
from .fieldmap import export_maps, render_mode, stokes
from .hilbert import SinglePhotonState, normalize

log = logging.getLogger("spinorbit")

EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4

FIGURE_THETAS = tuple(k * math.pi / 4 for k in range(4))
FIGURE_CHIS = tuple(k * math.pi / 128 for k in range(64))
FIGURE_RATES = {Mode.SINGLE_PHOTON: 2000.0, Mode.TWO_PHOTON: 700.0, Mode.CLASSICAL: 1.0e6}
SIGNIFICANCE_RATES = (200.0, 2000.0, 20000.0)
SIGNIFICANCE_SEEDS = 100


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            _fail(EXIT_CONFIG, f"config: {exc}")
        except (DataFormatError, MissingSetting, SettingMismatch, ZeroCounts, InsufficientData) as exc:
            _fail(EXIT_DATA, str(exc))
        except FileNotFoundError as exc:
            _fail(EXIT_DATA, f"no such file: {exc.filename}")
        except (ZeroNorm, OamOverflow, FloatingPointError) as exc:
            _fail(EXIT_NUMERIC, f"numerical failure: {exc}")

    return wrapper


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, cfg: RunConfig | None, outputs: list[Path], started: float) -> Path:
    """Atomic run manifest. Wall-clock duration goes to stderr so reruns stay byte-identical."""
    entries = [{"path": p.relative_to(out).as_posix(), "sha256": _sha256(p)} for p in sorted(outputs)]
    manifest = {
        "tool": "spinorbit",
        "version": __version__,
        "command": command,
        "seed": None if cfg is None else int(cfg.experiment.seed),
        "config": None if cfg is None else config_to_dict(cfg),
        "outputs": entries,
    }
    path = out / "manifest.json"
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    click.echo(f"wrote {len(entries)} file(s) + manifest to {out} in {time.perf_counter() - started:.2f} s", err=True)
    return path


def _load(config_path, seed) -> RunConfig:
    cfg = load_config(config_path) if config_path else RunConfig()
    return cfg.with_seed(seed)


def _write(out: Path, name: str, text: str, written: list[Path]) -> Path:
    path = out / name
    atomic_write_text(path, text)
    written.append(path)
    return path


@click.group()
@click.version_option(__version__, prog_name="spinorbit")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def cli(verbose):
    """Spin-orbit hybrid entanglement simulator."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="TOML run configuration.")
@click.option("--seed", type=int, help="Override the config seed.")
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
@handle_errors
def simulate(config_path, seed, out):
    """Simulate coincidence counts (or classical power) over the theta x chi grid."""
    started = time.perf_counter()
    cfg = _load(config_path, seed)
    out = Path(out)
    written: list[Path] = []
    records = simulate_counts(cfg.experiment)
    _write(out, "counts.csv", counts_to_csv(records), written)
    _write(out, "config.toml", dumps_config(cfg), written)
    write_manifest(out, "simulate", cfg, written, started)
    click.echo(f"{len(records)} settings, mode {cfg.experiment.mode.value}")


def _emit(out, stem, rows, header, fmt, written, **meta):
    text = rows_to_json(rows, **meta) if fmt == "json" else rows_to_csv(rows, header)
    if out is not None:
        _write(Path(out), f"{stem}.{fmt}", text, written)


@cli.command()
@click.argument("counts", type=click.Path(dir_okay=False))
@click.option("--theta-deg", default=0.0, show_default=True, help="theta of the CHSH combination.")
@click.option("--theta-prime-deg", default=45.0, show_default=True)
@click.option("--offset-deg", default=22.5, show_default=True, help="chi' - chi.")
@click.option("--chi-deg", multiple=True, type=float, help="Evaluate only these chi (repeatable).")
@click.option("--out", type=click.Path(file_okay=False), help="Write the report here.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@handle_errors
def chsh(counts, theta_deg, theta_prime_deg, offset_deg, chi_deg, out, fmt):
    """CHSH S(chi) scan with Poisson errors and violation significance."""
    started = time.perf_counter()
    records = read_counts_csv(counts)
    chis = [math.radians(c) for c in chi_deg] or None
    scan = scan_S(records, chis, math.radians(theta_deg), math.radians(theta_prime_deg), math.radians(offset_deg))
    rows = scan_rows(scan)
    click.echo(format_table([{**r, "violates": r["S"] > 2} for r in rows], SCAN_HEADER + ("violates",)))
    if out:
        written: list[Path] = []
        _emit(out, "chsh_scan", rows, SCAN_HEADER, fmt, written,
              theta_rad=math.radians(theta_deg), theta_prime_rad=math.radians(theta_prime_deg),
              offset_rad=math.radians(offset_deg))
        write_manifest(Path(out), "chsh", None, written, started)


@cli.command()
@click.argument("counts", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), help="Write the report here.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@handle_errors
def fringes(counts, out, fmt):
    """Fit C(chi) = B + A cos(4 chi - phi) per theta and report visibilities."""
    started = time.perf_counter()
    rows = fringe_rows(fit_all_fringes(read_counts_csv(counts)))
    click.echo(format_table(rows, FRINGE_HEADER))
    if out:
        written: list[Path] = []
        _emit(out, "fringes", rows, FRINGE_HEADER, fmt, written)
        write_manifest(Path(out), "fringes", None, written, started)


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Input beam, stages and grid.")
@click.option("--state", "state_path", type=click.Path(dir_okay=False),
              help="State file ('spin oam re im' lines); bypasses the config's input beam and stages.")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "png", "both"]), default="csv", show_default=True)
@handle_errors
def render(config_path, state_path, out, fmt):
    """Intensity and polarization maps of a mode (default: H beam through a q = 1 plate)."""
    started = time.perf_counter()
    cfg = _load(config_path, None)
    if state_path:
        try:
            state = SinglePhotonState.from_text(Path(state_path).read_text(encoding="utf-8"))
        except (ValueError, KeyError) as exc:
            raise DataFormatError(f"{state_path}: bad state file ({exc})") from exc
    else:
        state = cfg.render_state()
    out = Path(out)
    written = _render_into(out, normalize(state), cfg, fmt)
    write_manifest(out, "render", cfg, written, started)


def _render_into(out: Path, state: SinglePhotonState, cfg: RunConfig, fmt: str, prefix: str = "") -> list[Path]:
    r = cfg.render
    smap = stokes(render_mode(state, r.size, r.half_extent, r.w0))
    formats = ("csv-grid", "png") if fmt == "both" else ("csv-grid" if fmt == "csv" else "png",)
    written = []
    for f in formats:
        written += export_maps(smap, out, f, prefix)
    return written


# ---------------------------------------------------------- reproduce-paper

def _mode_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def significance_study(seed: int, visibility: float = 0.9, rates=SIGNIFICANCE_RATES, n_seeds=SIGNIFICANCE_SEEDS):
    """Violation significance at chi = pi/16 versus mean peak counts per setting."""
    chi = math.pi / 16
    chis = (chi, chi + math.pi / 8, chi + math.pi / 4, chi + 3 * math.pi / 8)
    rows = []
    for k, rate in enumerate(rates):
        sig = []
        for s in range(n_seeds):
            cfg = ExperimentConfig(
                mode=Mode.SINGLE_PHOTON, theta_list=FIGURE_THETAS, chi_list=chis,
                pair_rate=pair_rate_for_peak(rate, visibility),
                visibility=visibility, seed=_mode_seed(seed, 1000 * (k + 1) + s),
            )
            sig.append(chsh_S(simulate_counts(cfg), 0.0, math.pi / 4, chi, chi + math.pi / 8).violation_sigmas)
        sig = np.array(sig)
        rows.append({
            "peak_counts": rate,
            "mean_violation_sigmas": float(sig.mean()),
            "std_violation_sigmas": float(sig.std(ddof=1)),
            "fraction_ge_10": float(np.mean(sig >= 10.0)),
        })
    slope = loglog_slope([r["peak_counts"] for r in rows], [r["mean_violation_sigmas"] for r in rows])
    return rows, slope


def reproduce(out: Path, seed: int, visibility: float = 0.9) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    base = RunConfig().with_seed(seed)
    _write(out, "config.toml", dumps_config(base), written)

    for index, (mode, sub) in enumerate(
        ((Mode.SINGLE_PHOTON, "single_photon"), (Mode.TWO_PHOTON, "two_photon"), (Mode.CLASSICAL, "classical")),
        start=1,
    ):
        exp = ExperimentConfig(
            mode=mode, theta_list=FIGURE_THETAS, chi_list=FIGURE_CHIS, pair_rate=FIGURE_RATES[mode],
            visibility=visibility, seed=_mode_seed(seed, index),
        )
        records = simulate_counts(exp)
        d = out / sub
        _write(d, "counts.csv", counts_to_csv(records), written)
        _write(d, "fringes.csv", rows_to_csv(fringe_rows(fit_all_fringes(records)), FRINGE_HEADER), written)
        _write(d, "chsh_scan.csv", rows_to_csv(scan_rows(scan_S(CountTable(records))), SCAN_HEADER), written)

    ideal = ExperimentConfig(theta_list=FIGURE_THETAS, chi_list=FIGURE_CHIS, visibility=1.0)
    ideal_scan = scan_S(expected_counts(ideal))
    curve = ideal_scan_curve([c for c, _ in ideal_scan])
    rows = [{"chi_rad": c, "S": r.S, "S_formula": float(f)} for (c, r), f in zip(ideal_scan, curve)]
    _write(out, "ideal_scan.csv", rows_to_csv(rows, ("chi_rad", "S", "S_formula")), written)

    sig_rows, slope = significance_study(seed, visibility)
    header = ("peak_counts", "mean_violation_sigmas", "std_violation_sigmas", "fraction_ge_10")
    _write(out, "significance.csv", rows_to_csv(sig_rows, header), written)
    _write(out, "significance.json", rows_to_json(sig_rows, loglog_slope=slope, chi_rad=math.pi / 16,
                                                  visibility=visibility, seeds_per_rate=SIGNIFICANCE_SEEDS), written)

    written += _render_into(out / "fieldmap", normalize(base.render_state()), base, "both")
    return written


@cli.command("reproduce-paper")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, default=2010, show_default=True)
@click.option("--visibility", type=click.FloatRange(0.0, 1.0), default=0.9, show_default=True)
@handle_errors
def reproduce_paper(out, seed, visibility):
    """Fringes, S(chi) scans, significance study and field maps for all three experiments."""
    started = time.perf_counter()
    if seed < 0:
        raise ConfigError("must be >= 0", key="seed")
    out = Path(out)
    written = reproduce(out, seed, visibility)
    cfg = RunConfig(replace(RunConfig().experiment, seed=seed, visibility=visibility))
    write_manifest(out, "reproduce-paper", cfg, written, started)


def main(argv=None):
    cli.main(args=argv, prog_name="spinorbit")


if __name__ == "__main__":
    main()
