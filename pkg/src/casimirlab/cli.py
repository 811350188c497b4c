"""Command-line surface for the theory engine and analysis pipeline.

One subcommand per pipeline stage: epsilon, theory, electro, calibrate-k,
fit-z0, analyze, synth, compare. All outputs are written atomically and
carry a metadata header (version, config hash, seed) so identical inputs
reproduce identical bytes. Exit codes: 2 input/parse, 3 numerical
non-convergence, 4 fit failure.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, assemble
from .analysis import (analyze_campaign, calibrate_spring_constant,
                       compare_to_theory, fit_contact_separation, _pfa_force_pn)
from .config import RunConfig, load_config
from .corrections import TheoryCurve
from .electrostatics import sphere_plane_force_exact, sphere_plane_force_pfa
from .errors import (CalibrationError, CasimirLabError, ConvergenceError,
                     DataError, FitError, ParseError, SegmentationError,
                     ValidityError)
from .forcecurve import ForceCurve, load_scan, signal_to_force
from .synth import load_campaign, write_campaign

EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_FIT = 4


def guarded(fn):
    """Map package exceptions onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConvergenceError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except (FitError, CalibrationError, SegmentationError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_FIT)
        except (ParseError, DataError, ValidityError, CasimirLabError,
                ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)

    return wrapper


def parse_grid(spec: str) -> np.ndarray:
    """Parse 'lo:hi:n' (nm) into a linear grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ParseError(f"expected lo:hi:n, got {spec!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(f"malformed grid spec {spec!r}") from None
    if not (lo < hi and n >= 2):
        raise ParseError(f"need lo < hi and n >= 2 in {spec!r}")
    return np.linspace(lo, hi, n)


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def meta_header(cfg: RunConfig, seed=None) -> str:
    lines = [f"# version={__version__}", f"# config_hash={cfg.digest()}"]
    if seed is not None:
        lines.append(f"# seed={seed}")
    return "\n".join(lines) + "\n"


def csv_text(cfg: RunConfig, header_cols, rows, seed=None) -> str:
    out = [meta_header(cfg, seed), ",".join(header_cols), "\n"]
    body = "\n".join(",".join(f"{v:.9g}" for v in row) for row in rows)
    return "".join(out) + body + "\n"


def json_text(cfg: RunConfig, payload: dict, seed=None) -> str:
    doc = {"meta": {"version": __version__, "config_hash": cfg.digest()}}
    if seed is not None:
        doc["meta"]["seed"] = seed
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _load_cfg(config_path) -> RunConfig:
    return load_config(config_path) if config_path else RunConfig()


config_option = click.option("--config", "config_path", type=click.Path(exists=True),
                             default=None, help="key=value run configuration file")
material_option = click.option("--material", "material", type=click.Path(exists=True),
                               default=None, help="optical table CSV")
drude_option = click.option("--drude-only", is_flag=True,
                            help="force the Drude closed form")
out_option = click.option("--out", "out", required=True, type=click.Path(),
                          help="output path")


@click.group()
@click.version_option(__version__)
def main():
    """Casimir-force theory engine and AFM force-curve analysis pipeline."""


@main.command()
@click.option("--xi-ev", "xi_spec", default="0.01:100:61", show_default=True,
              help="imaginary-frequency grid lo:hi:n in eV")
@material_option
@drude_option
@config_option
@out_option
@guarded
def epsilon(xi_spec, material, drude_only, config_path, out):
    """Tabulate eps(i*xi) for the configured dielectric model."""
    from .constants import energy_ev_to_angular_frequency

    cfg = _load_cfg(config_path)
    model = assemble.dielectric_model(cfg, drude_only, material)
    grid = parse_grid(xi_spec)
    rows = [(e, model.eps(energy_ev_to_angular_frequency(e))) for e in grid]
    atomic_write(out, csv_text(cfg, ["xi_ev", "eps"], rows))


@main.command()
@click.option("--z", "z_spec", default="100:500:441", show_default=True,
              help="metal-to-metal separation grid lo:hi:n in nm")
@material_option
@drude_option
@config_option
@out_option
@guarded
def theory(z_spec, material, drude_only, config_path, out):
    """Tabulate the corrected theory force versus separation."""
    cfg = _load_cfg(config_path)
    model = assemble.dielectric_model(cfg, drude_only, material)
    params = assemble.theory_params(cfg, model)
    grid = parse_grid(z_spec)
    curve = TheoryCurve(params, grid[0] * 1e-9 / 1.001, grid[-1] * 1e-9 * 1.001,
                        cfg.theory_cache_points)
    rows = [(z, curve(z * 1e-9) * 1e12) for z in grid]
    atomic_write(out, csv_text(cfg, ["separation_nm", "force_pn"], rows))


@main.command()
@click.option("--z", "z_spec", default="100:500:41", show_default=True)
@click.option("--voltage", type=float, default=0.31, show_default=True,
              help="plate voltage V1 in volts")
@config_option
@out_option
@guarded
def electro(z_spec, voltage, config_path, out):
    """Tabulate the exact and proximity electrostatic forces."""
    cfg = _load_cfg(config_path)
    e_cfg = assemble.electrostatic_config(cfg, V1=voltage)
    grid = parse_grid(z_spec)
    rows = [(z,
             sphere_plane_force_exact(z * 1e-9, e_cfg) * 1e12,
             sphere_plane_force_pfa(z * 1e-9, e_cfg) * 1e12)
            for z in grid]
    atomic_write(out, csv_text(cfg, ["separation_nm", "force_exact_pn",
                                     "force_pfa_pn"], rows))


@main.command("calibrate-k")
@click.option("--scans", "scans_dir", required=True, type=click.Path(exists=True),
              help="directory of raw stiffness scans")
@config_option
@out_option
@guarded
def calibrate_k(scans_dir, config_path, out):
    """Fit the cantilever spring constant from large-separation scans."""
    cfg = _load_cfg(config_path)
    curves = [load_scan(p) for p in sorted(Path(scans_dir).glob("*.csv"))]
    curves = [c for c in curves if not c.has_force]
    if not curves:
        raise DataError(f"no raw-signal scans in {scans_dir}")
    e_cfg = assemble.electrostatic_config(cfg)
    cal = assemble.calibration_params(cfg)
    k, k_sigma = calibrate_spring_constant(curves, e_cfg, cal)
    atomic_write(out, json_text(cfg, {
        "spring_constant_n_per_m": k,
        "spring_constant_sigma_n_per_m": k_sigma,
        "n_scans": len(curves),
    }))


@main.command("fit-z0")
@click.option("--scan", "scan_path", required=True, type=click.Path(exists=True))
@click.option("--emit-curve", is_flag=True,
              help="also write the data-vs-model curve CSV")
@config_option
@out_option
@guarded
def fit_z0(scan_path, emit_curve, config_path, out):
    """Fit the separation on contact from one applied-voltage scan."""
    cfg = _load_cfg(config_path)
    curve = load_scan(scan_path)
    if not curve.has_force:
        curve = signal_to_force(curve, assemble.calibration_params(cfg))
    model = assemble.dielectric_model(cfg)
    params = assemble.theory_params(cfg, model)
    th = assemble.theory_curve(cfg, params)
    e_cfg = assemble.electrostatic_config(cfg)
    fit = fit_contact_separation(curve, th, e_cfg, cfg.cap_offset_nm,
                                 cfg.pooled_noise_pn)
    atomic_write(out, json_text(cfg, {
        "z0_nm": fit.z0_nm,
        "z0_sigma_nm": fit.z0_sigma_nm,
        "chi2": fit.chi2,
        "n_points": fit.n_points,
        "voltage_v": fit.voltage,
    }))
    if emit_curve:
        sep = curve.piezo_nm + fit.z0_nm
        model_pn = (_pfa_force_pn(sep, e_cfg, fit.voltage - e_cfg.V2)
                    + th((sep + cfg.cap_offset_nm) * 1e-9) * 1e12)
        rows = list(zip(sep, curve.force_pn, model_pn))
        atomic_write(Path(out).with_suffix(".curve.csv"),
                     csv_text(cfg, ["separation_nm", "force_pn", "model_pn"], rows))


@main.command()
@click.option("--seed", type=int, default=None, help="override the config seed")
@click.option("--out", "out_dir", required=True, type=click.Path())
@config_option
@guarded
def synth(seed, out_dir, config_path):
    """Generate a deterministic synthetic campaign directory."""
    cfg = _load_cfg(config_path)
    truth = assemble.synth_truth(cfg, seed)
    model = assemble.dielectric_model(cfg)
    params = assemble.theory_params(cfg, model)
    th = assemble.theory_curve(cfg, params)
    e_cfg = assemble.electrostatic_config(cfg)
    write_campaign(out_dir, truth, th, e_cfg)
    manifest = meta_header(cfg, seed=truth.seed)
    atomic_write(Path(out_dir) / "manifest.txt", manifest)


@main.command()
@click.option("--scans", "scans_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@config_option
@guarded
def analyze(scans_dir, out_dir, config_path):
    """Run the full pipeline on a campaign directory."""
    cfg = _load_cfg(config_path)
    grounded, voltage_scans, stiffness, _ = load_campaign(scans_dir)
    cal = assemble.calibration_params(cfg)
    e_cfg = assemble.electrostatic_config(cfg)
    spring = None
    if stiffness:
        spring, _sigma = calibrate_spring_constant(stiffness, e_cfg, cal)
    model = assemble.dielectric_model(cfg)
    params = assemble.theory_params(cfg, model)
    th = assemble.theory_curve(cfg, params)
    results, mean_curve, std = analyze_campaign(
        voltage_scans, grounded, th, e_cfg, cfg.cap_offset_nm,
        (cfg.window_lo_nm, cfg.window_hi_nm), cfg.window_points,
        cfg.pooled_noise_pn, spring_constant=spring)
    out_dir = Path(out_dir)
    atomic_write(out_dir / "results.json", json_text(cfg, results))
    rows = list(zip(mean_curve.piezo_nm, mean_curve.force_pn, std))
    atomic_write(out_dir / "mean_curve.csv",
                 csv_text(cfg, ["separation_nm", "force_pn", "std_pn"], rows))


@main.command()
@click.option("--curve", "curve_path", required=True, type=click.Path(exists=True),
              help="mean-curve CSV (separation_nm,force_pn,std_pn)")
@click.option("--n-scans", type=int, default=27, show_default=True)
@click.option("--emit-curve", is_flag=True,
              help="also write experiment-vs-theory plot data")
@config_option
@out_option
@guarded
def compare(curve_path, n_scans, emit_curve, config_path, out):
    """Compare an extracted mean force curve against the theory."""
    cfg = _load_cfg(config_path)
    axis, force, std = _read_mean_curve(curve_path)
    mean_curve = ForceCurve("mean", 0.0, axis, force_pn=force)
    model = assemble.dielectric_model(cfg)
    params = assemble.theory_params(cfg, model)
    th = assemble.theory_curve(cfg, params)
    stats = compare_to_theory(mean_curve, std, n_scans, th,
                              (cfg.window_lo_nm, cfg.window_hi_nm),
                              cfg.window_points, cfg.pooled_noise_pn)
    atomic_write(out, json_text(cfg, {
        "sigma_rms_pn": stats.sigma_rms_pn,
        "reduced_chi2": stats.reduced_chi2,
        "n_points": stats.n_points,
        "variants": stats.variants,
        "window_nm": [cfg.window_lo_nm, cfg.window_hi_nm],
    }))
    if emit_curve:
        theory_pn = th(axis * 1e-9) * 1e12
        rows = list(zip(axis, force, theory_pn))
        atomic_write(Path(out).with_suffix(".curve.csv"),
                     csv_text(cfg, ["separation_nm", "force_exp_pn",
                                    "force_theory_pn"], rows))


def _read_mean_curve(path):
    axis, force, std = [], [], []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                if [c.strip() for c in line.split(",")] != \
                        ["separation_nm", "force_pn", "std_pn"]:
                    raise ParseError("expected header separation_nm,force_pn,std_pn",
                                     line=lineno)
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError("expected three columns", line=lineno)
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise ParseError(f"malformed number in {line!r}",
                                 line=lineno) from None
            axis.append(values[0])
            force.append(values[1])
            std.append(values[2])
    if not header_seen:
        raise ParseError("missing mean-curve header")
    return np.array(axis), np.array(force), np.array(std)


if __name__ == "__main__":
    main()
