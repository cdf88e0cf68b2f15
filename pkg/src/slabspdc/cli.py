"""Command-line batch front-end.

Subcommands::

    slabspdc modes    --config c.json --out dir   # dispersion tables
    slabspdc spectrum --config c.json --out dir   # spectra only
    slabspdc analyze  --config c.json --out dir   # spectra + reports
    slabspdc sweep    --config c.json --out dir [--parameter N --values 1,2,3]
    slabspdc validate --config c.json [--out dir] # three-way agreement check

Exit codes: 0 success, 2 config error, 3 physics error, 4 oracle disagreement.
"""

import argparse
import csv
import datetime
import json
import logging
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import detect_peaks, discreteness_criterion, entanglement_overlap
from .config import SWEEP_PARAMETERS, RunConfig, load_config
from .errors import (ChannelForbidden, ConfigError, CutoffError, DomainError, GridTooCoarse,
                     InvalidLayerLength, PhysicsError)
from .modes import SlabGeometry, dispersion_curve, solve_mode, taylor_coefficients
from .numerics import omega_from_wavelength
from .spectrum import (TriModeChannel, closed_form_spectrum, default_grid, normalize,
                       oracle_direct_integration, total_spectrum)
from .structures import (ChirpParameters, build_aperiodic, build_chirped_pc,
                         default_qpm_offset)

log = logging.getLogger("slabspdc")

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_ORACLE = 0, 2, 3, 4
ORACLE_TOLERANCE = 1e-8


@dataclass
class OutputRecord:
    config: RunConfig
    version: str = __version__
    timestamp: str = ""
    curves: dict = field(default_factory=dict)
    spectra: list = field(default_factory=list)
    coefficients: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    structure: object = None


def _geometry(cfg):
    g = cfg.geometry
    return SlabGeometry(H=g["H_um"], n_c=g["n_c"], n_cl=g["n_cl"], L_y=g.get("L_y_um", 1.0))


def _structure(cfg, geometry, wavelength_pump):
    st = cfg.structure
    if st["kind"] == "aperiodic":
        return build_aperiodic(l0=st.get("l0_um"), varsigma=st.get("varsigma_um", 0.0), N=st["N"],
                               total_length=st.get("total_length_um"), geometry=geometry)
    if "alpha_rad_per_um2" in st:
        chirp = ChirpParameters.from_alpha(st["alpha_rad_per_um2"], wavelength_pump)
    else:
        chirp = ChirpParameters(st.get("varsigma_p_per_um", 0.0), st.get("varsigma_s_per_um", 0.0),
                                st.get("varsigma_i_per_um", 0.0)).derived(wavelength_pump)
    return build_chirped_pc(l=st.get("l_um"), N=st["N"], base=geometry, chirp=chirp,
                            total_length=st.get("total_length_um"))


def _grid(cfg, structure, items, wavelength_pump):
    grid = cfg.raw.get("grid", {})
    n = grid.get("n_points", 2001)
    if "omega_min_rad_per_fs" in grid:
        return np.linspace(grid["omega_min_rad_per_fs"], grid["omega_max_rad_per_fs"], n)
    if "lambda_s_min_um" in grid:
        half = 0.5 * omega_from_wavelength(wavelength_pump)
        a = omega_from_wavelength(grid["lambda_s_max_um"]) - half
        b = omega_from_wavelength(grid["lambda_s_min_um"]) - half
        return np.linspace(a, b, n)
    quadratic = cfg.raw.get("expansion", "quadratic") == "quadratic"
    bounds = []
    for channel, coeffs, offset in items:
        if channel.allowed:
            g = default_grid(structure, coeffs, offset, n_points=2, quadratic=quadratic)
            bounds += [g[0], g[-1]]
    if not bounds:
        raise ConfigError("no parity-allowed channel to size the default grid; give grid bounds")
    return np.linspace(min(bounds), max(bounds), n)


def run(cfg):
    """Evaluate one configuration end to end and return its OutputRecord."""
    record = OutputRecord(config=cfg,
                          timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat())
    geometry = _geometry(cfg)

    if "modes" in cfg.raw:
        m = cfg.raw["modes"]
        for mu in m.get("mu", [0, 1]):
            record.curves[mu] = dispersion_curve(geometry, mu, m["lambda_min_um"],
                                                 m["lambda_max_um"], m.get("n_samples", 200))

    if cfg.structure is None:
        return record

    lam_p = cfg.raw["pump"]["wavelength_um"]
    quadratic = cfg.raw.get("expansion", "quadratic") == "quadratic"
    channels = [TriModeChannel(*ch) for ch in cfg.raw["channels"]]
    for ch in channels:
        solve_mode(geometry, ch.mu_p, lam_p)
        solve_mode(geometry, ch.mu_s, 2 * lam_p)
        solve_mode(geometry, ch.mu_i, 2 * lam_p)
    curves = {mu: dispersion_curve(geometry, mu, 0.8 * lam_p, 2.4 * lam_p, 321)
              for mu in sorted({mu for ch in channels for mu in ch.modes})}
    structure = _structure(cfg, geometry, lam_p)
    record.structure = structure
    tuned = cfg.structure.get("tuned_layer", 1)

    items = []
    for ch in channels:
        coeffs = taylor_coefficients(curves[ch.mu_p], curves[ch.mu_s], curves[ch.mu_i], lam_p)
        offset = cfg.raw.get("qpm_offset_rad_per_um")
        if offset is None:
            offset = default_qpm_offset(structure, coeffs, tuned)
        items.append((ch, coeffs, offset))
        record.coefficients[ch.name] = {
            "delta_beta0_rad_per_um": coeffs.delta_beta0, "D_fs_per_um": coeffs.D,
            "B_fs2_per_um": coeffs.B, "kz_rad_per_um": list(coeffs.kz),
            "qpm_offset_rad_per_um": offset,
        }

    omega = _grid(cfg, structure, items, lam_p)
    spectra = []
    for ch, coeffs, offset in items:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ChannelForbidden)
            spectra.append(total_spectrum(structure, ch, coeffs, omega, geometry, offset,
                                          quadratic=quadratic))
        for w in caught:
            if issubclass(w.category, ChannelForbidden):
                record.warnings.append({"kind": "ChannelForbidden", "channel": list(ch.modes),
                                        "message": str(w.message)})
    if cfg.raw.get("normalize", False):
        spectra = normalize(spectra)
    for r in spectra:
        record.coefficients[r.channel.name]["spatial_amplitude"] = r.spatial
    record.spectra = spectra
    record.reports = _analyses(cfg, structure, spectra)
    return record


def _analyses(cfg, structure, spectra):
    an = cfg.analyses
    margin = an.get("margin", 3.0)
    reports = {}
    if an.get("discreteness", False) and structure.kind == "photonic_crystal":
        discrete, ratio = discreteness_criterion(structure.alpha, structure.base_length, margin)
        reports["discreteness"] = {"discrete": discrete, "criterion_ratio": ratio,
                                   "margin": margin}
    if an.get("peaks", False):
        reports["peaks"] = {}
        for r in spectra:
            if r.forbidden:
                continue
            try:
                reports["peaks"][r.channel.name] = detect_peaks(
                    r, an.get("prominence", 0.1), margin).to_dict()
            except GridTooCoarse as exc:
                reports["peaks"][r.channel.name] = {"error": str(exc)}
    if an.get("entanglement", False):
        reports["entanglement"] = []
        by_modes = {r.channel.modes: r for r in spectra}
        for r in spectra:
            other = by_modes.get(r.channel.swapped().modes)
            if other is None or other is r or r.channel.mu_s > r.channel.mu_i:
                continue
            reports["entanglement"].append(
                entanglement_overlap(r, other, an.get("threshold", 0.1)).to_dict())
    return reports


# output -------------------------------------------------------------------


def _fmt(x):
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dump_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _bins(omega, y, n_bins=200):
    edges = np.linspace(omega[0], omega[-1], n_bins + 1)
    idx = np.clip(np.searchsorted(edges, omega, side="right") - 1, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    sums = np.bincount(idx, weights=y, minlength=n_bins)
    keep = counts > 0
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers[keep], sums[keep] / counts[keep]


def write_outputs(record, out, fmt="csv", plot_data=False):
    """Write a record's files into directory ``out``; returns the paths written."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    echo = out / "config_echo.json"
    echo.write_text(record.config.to_json(), encoding="utf-8")
    written.append(echo)
    meta = out / "run.json"
    _dump_json(meta, {"tool": "slabspdc", "version": record.version,
                      "timestamp": record.timestamp})
    written.append(meta)

    for mu, curve in record.curves.items():
        rows = [(lam, s.n_eff) for lam, s in zip(curve.wavelengths, curve.samples) if s is not None]
        if fmt == "csv":
            path = out / f"dispersion_mu{mu}.csv"
            _write_csv(path, ["lambda_um", "n_eff"], rows)
        else:
            path = out / f"dispersion_mu{mu}.json"
            _dump_json(path, {"mu": mu, "lambda_um": [r[0] for r in rows],
                              "n_eff": [r[1] for r in rows]})
        written.append(path)

    for r in record.spectra:
        cols = [r.omega, r.wavelength_signal, r.amplitude.real, r.amplitude.imag, r.abs2]
        header = ["Omega_rad_per_fs", "lambda_s_um", "re_phi", "im_phi", "abs2_phi"]
        if fmt == "csv":
            path = out / f"spectrum_{r.channel.name}.csv"
            _write_csv(path, header, zip(*cols))
        else:
            path = out / f"spectrum_{r.channel.name}.json"
            _dump_json(path, dict(zip(header, [c.tolist() for c in cols])))
        written.append(path)
        if plot_data:
            y = r.abs2
            top = y.max()
            centers, vals = _bins(r.omega, y / top if top > 0 else y)
            path = out / f"plot_{r.channel.name}.csv"
            _write_csv(path, ["Omega_rad_per_fs", "abs2_phi_normalized"], zip(centers, vals))
            written.append(path)

    if record.structure is not None or record.reports:
        report = out / "report.json"
        payload = {"coefficients": record.coefficients, "analyses": record.reports,
                   "warnings": record.warnings}
        if record.structure is not None:
            st = record.structure.to_dict()
            payload["structure"] = {k: st[k] for k in
                                    ("kind", "N", "base_length_um", "total_length_um", "chirp")}
            payload["structure"]["layer_lengths_um"] = [x["length_um"] for x in st["layers"]]
        _dump_json(report, payload)
        written.append(report)
    return written


# sweep --------------------------------------------------------------------


def _bandwidth(result):
    y = result.abs2
    if y.max() <= 0:
        return 0.0
    above = np.flatnonzero(y >= y.max() / math.e)
    return float(result.omega[above[-1]] - result.omega[above[0]])


def sweep(cfg, parameter, values, workers=4):
    """Run one configuration per value of ``parameter``.

    Returns ``(records, summary)``; a failing point contributes ``None`` to
    ``records`` and an ``error`` entry to its summary row.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"cannot sweep {parameter!r}; choose from {sorted(SWEEP_PARAMETERS)}")

    def point(value):
        try:
            rec = run(cfg.with_value(parameter, value))
        except (ConfigError, PhysicsError, DomainError, InvalidLayerLength) as exc:
            return None, {"value": value, "error": f"{type(exc).__name__}: {exc}"}
        row = {"value": value}
        allowed = [r for r in rec.spectra if not r.forbidden]
        if allowed:
            first = allowed[0]
            row["bandwidth_rad_per_fs"] = _bandwidth(first)
            pk = rec.reports.get("peaks", {}).get(first.channel.name)
            if pk is not None and "count" in pk:
                row["peak_count"] = pk["count"]
        ent = rec.reports.get("entanglement")
        if ent:
            row["overlap_metric"] = ent[0]["overlap_metric"]
        return rec, row

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(point, values))
    return [r for r, _ in results], [row for _, row in results]


def write_sweep(records, summary, parameter, out, fmt="csv", plot_data=False):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for k, rec in enumerate(records):
        if rec is not None:
            write_outputs(rec, out / f"point_{k:03d}", fmt, plot_data)
    columns = ["value", "bandwidth_rad_per_fs", "peak_count", "overlap_metric", "error"]
    with open(out / "sweep_summary.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([parameter if c == "value" else c for c in columns])
        for row in summary:
            cells = []
            for c in columns:
                v = row.get(c, "")
                cells.append(_fmt(v) if isinstance(v, float) else v)
            w.writerow(cells)
    _dump_json(out / "sweep.json", {"parameter": parameter, "points": summary})


# validate -----------------------------------------------------------------


def validate(record, n_oracle=25):
    """Three-way agreement of layer sum, closed form and quadrature.

    Deviations are measured relative to each spectrum's peak |Phi|^2.
    """
    out = {}
    for r in record.spectra:
        if r.forbidden:
            continue
        layer = r.abs2
        scale = max(layer.max(), np.finfo(float).tiny)
        closed = closed_form_spectrum(r)
        pick = np.unique(np.linspace(0, len(r.omega) - 1, min(n_oracle, len(r.omega))).astype(int))
        prof = r.mismatch(r.omega[pick])
        quad = np.array([abs(oracle_direct_integration(r.structure, p, r.spatial * r.scale)) ** 2
                         for p in prof])
        dev = {
            "layer_vs_closed": float(np.max(np.abs(layer - closed)) / scale),
            "layer_vs_quadrature": float(np.max(np.abs(layer[pick] - quad)) / scale),
            "closed_vs_quadrature": float(np.max(np.abs(closed[pick] - quad)) / scale),
        }
        dev["max"] = max(dev.values())
        out[r.channel.name] = dev
    worst = max((d["max"] for d in out.values()), default=0.0)
    return {"channels": out, "max_deviation": worst, "tolerance": ORACLE_TOLERANCE,
            "passed": worst <= ORACLE_TOLERANCE}


# entry point --------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="slabspdc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("modes", "spectrum", "analyze", "sweep", "validate"):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default=None)
        s.add_argument("--format", choices=("csv", "json"), default="csv")
        s.add_argument("--plot-data", action="store_true")
        s.add_argument("--margin", type=float, default=None)
        s.add_argument("--threshold", type=float, default=None)
        if name == "sweep":
            s.add_argument("--parameter", choices=sorted(SWEEP_PARAMETERS))
            s.add_argument("--values", help="comma-separated values")
    return p


def _apply_overrides(cfg, args, command):
    doc = cfg.to_dict()
    an = doc.setdefault("analyses", {}) if "structure" in doc else None
    if an is not None:
        if command == "analyze":
            for k in ("peaks", "entanglement", "discreteness"):
                an.setdefault(k, True)
        if args.margin is not None:
            an["margin"] = args.margin
        if args.threshold is not None:
            an["threshold"] = args.threshold
    return RunConfig.from_dict(doc)


def _parse_values(text, parameter):
    cast = int if parameter in ("N", "n") else float
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values for {parameter}: {exc}") from exc


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = _apply_overrides(load_config(args.config), args, args.command)
        out = Path(args.out or ".")
        if args.command == "modes":
            if "modes" not in cfg.raw:
                raise ConfigError("the modes subcommand needs a 'modes' section")
            doc = cfg.to_dict()
            for k in ("structure", "channels", "grid", "analyses", "pump", "sweep"):
                doc.pop(k, None)
            rec = run(RunConfig.from_dict(doc))
            write_outputs(rec, out, args.format, args.plot_data)
        elif args.command in ("spectrum", "analyze"):
            if cfg.structure is None:
                raise ConfigError(f"the {args.command} subcommand needs a structure")
            if args.command == "spectrum":
                doc = cfg.to_dict()
                doc["analyses"] = {}
                cfg = RunConfig.from_dict(doc)
            write_outputs(run(cfg), out, args.format, args.plot_data)
        elif args.command == "sweep":
            parameter = args.parameter or cfg.raw.get("sweep", {}).get("parameter")
            if parameter is None:
                raise ConfigError("sweep needs --parameter or a sweep section")
            if args.values is not None:
                values = _parse_values(args.values, parameter)
            else:
                values = cfg.raw.get("sweep", {}).get("values")
            if not values:
                raise ConfigError("sweep needs --values or sweep.values")
            records, summary = sweep(cfg, parameter, values)
            write_sweep(records, summary, parameter, out, args.format, args.plot_data)
            for row in summary:
                if "error" in row:
                    log.warning("sweep point %s failed: %s", row["value"], row["error"])
        elif args.command == "validate":
            report = validate(run(cfg))
            if args.out:
                out.mkdir(parents=True, exist_ok=True)
                _dump_json(out / "validate.json", report)
            print(json.dumps(_jsonable(report), indent=2, sort_keys=True))
            if not report["passed"]:
                return EXIT_ORACLE
    except (ConfigError, InvalidLayerLength) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except CutoffError as exc:
        log.error("physics error: mode %s cut off at %s um", exc.mu, exc.wavelength)
        return EXIT_PHYSICS
    except PhysicsError as exc:
        log.error("physics error: %s", exc)
        return EXIT_PHYSICS
    except DomainError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
