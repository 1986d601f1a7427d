"""Command-line interface: pattern synthesis, decomposition, Kerker scans,
collection efficiency, decay rates, photon statistics, and config-driven
sweeps with reproducible manifests.

Exit codes: 0 success, 1 usage or config error, 2 compute failure,
3 partial sweep failure (some points failed, at most half).

I/O units are nm for lengths and degrees for angles; CSV files use '.'
decimals and carry complex values as paired _re/_im columns.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .emitter import (TwoLevelModel, fit_antibunching, g2, g2_enhanced,
                      hbt_montecarlo, photon_budget, relative_decay_rate)
from .farfield import (collection_efficiency, kerker_metrics, kerker_search,
                       mix_emission, pattern)
from .fields import (AntennaGeometry, FieldGrid, PlaneWave, PointDipole,
                     load_grid, solve, voxelize)
from .mie import MieCoefficients, internal_field, mie_coefficients
from .multipole import decompose, efficiencies, to_mie_moments


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _moments_from_args(args) -> MieCoefficients:
    return MieCoefficients.from_amplitudes(
        [complex(args.a1), complex(args.a2)],
        [complex(args.b1), complex(args.b2)])


def _write_pattern_files(p, out: Path, stem: str = "pattern") -> list[Path]:
    files = []
    theta_deg = np.degrees(p.theta)
    grid_file = out / f"{stem}.csv"
    with open(grid_file, "w") as fh:
        fh.write("theta_deg,phi_deg,intensity\n")
        for i, th in enumerate(theta_deg):
            for j, ph in enumerate(np.degrees(p.phi)):
                fh.write(f"{_fmt(th)},{_fmt(ph)},{_fmt(float(p.intensity[i, j]))}\n")
    files.append(grid_file)
    peak = float(p.intensity.max())
    scale = 1.0 / peak if peak > 0 else 1.0
    for label, phi in (("inplane", 0.0), ("outplane", np.pi / 2)):
        f = out / f"{stem}_cut_{label}.csv"
        _write_csv(f, ["theta_deg", "intensity_normalized"],
                   zip(theta_deg, (p.cut(phi) * scale).tolist()))
        files.append(f)
    return files


# ---------------------------------------------------------------------------
# subcommands

def _cmd_pattern(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    c = _moments_from_args(args)
    p = pattern(c, n_theta=args.n_theta, n_phi=args.n_phi, k0=args.k0)
    if args.mix != "none":
        p = mix_emission(p, args.mix)
    files = _write_pattern_files(p, out)
    m = kerker_metrics(p)
    print(f"forward={_fmt(m.forward_intensity)} backward={_fmt(m.backward_intensity)} "
          f"front_back_ratio={_fmt(m.front_back_ratio)} directivity={_fmt(m.directivity)}")
    for f in files:
        print(f"wrote {f}")
    return 0


def _oracle_sphere_grid(args) -> FieldGrid:
    x = args.x
    m = complex(args.m)
    k0 = 2.0 * np.pi / args.wavelength
    radius = x / k0
    res = radius / args.voxels_per_radius
    n1d = int(np.ceil(2 * radius / res))
    xs = (np.arange(n1d) - (n1d - 1) / 2) * res
    gx, gy, gz = np.meshgrid(xs, xs, xs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    pts = pts[np.linalg.norm(pts, axis=1) <= radius]
    coeffs = mie_coefficients(x, m)
    e = internal_field(coeffs, pts, radius, e0=1.0)
    return FieldGrid(points=pts, cell_volume=res**3, epsilon_r=m**2,
                     wavelength=args.wavelength, source=PlaneWave(), E=e,
                     lattice_spacing=res)


def _cmd_decompose(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.oracle == "sphere":
        grid = _oracle_sphere_grid(args)
        geom_cs = np.pi * (args.x / (2.0 * np.pi / args.wavelength)) ** 2
    elif args.grid:
        grid = load_grid(args.grid)
        if grid.E is None:
            grid = solve(grid)
        half = (grid.points.max(axis=0) - grid.points.min(axis=0)) / 2.0
        geom_cs = np.pi * float(max(half[0], half[1])) ** 2
    else:
        raise ConfigError("need --grid FILE or --oracle sphere")

    origin = None
    if args.origin:
        origin = [float(v) for v in args.origin.split(",")]
    mp = decompose(grid, origin=origin, long_wavelength=args.long_wavelength)
    e0 = grid.source.amplitude if isinstance(grid.source, PlaneWave) else 1.0
    eff = efficiencies(mp, grid.k0, e0, geom_cs)
    coeffs = to_mie_moments(mp, grid.k0, e0)

    payload = {
        "wavelength_nm": grid.wavelength,
        "origin_nm": [float(v) for v in mp.origin],
        "p_Cm": _cplx_list(mp.p),
        "m_Am2": _cplx_list(mp.m),
        "Qe_Cm2": _cplx_list(mp.qe.ravel()),
        "Qm_Am3": _cplx_list(mp.qm.ravel()),
        "efficiencies": {"C_p": eff.c_p, "C_m": eff.c_m, "C_qe": eff.c_qe,
                         "C_qm": eff.c_qm, "C_total": eff.c_total,
                         "residual": eff.residual},
        "mie_moments": {"a1": _cplx(coeffs.a[0]), "b1": _cplx(coeffs.b[0]),
                        "a2": _cplx(coeffs.a[1]), "b2": _cplx(coeffs.b[1])},
    }
    jf = out / "moments.json"
    jf.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    row_header = ["wavelength_nm",
                  "a1_re", "a1_im", "b1_re", "b1_im",
                  "a2_re", "a2_im", "b2_re", "b2_im",
                  "C_p", "C_m", "C_qe", "C_qm", "C_total"]
    row = [grid.wavelength,
           coeffs.a[0].real, coeffs.a[0].imag, coeffs.b[0].real, coeffs.b[0].imag,
           coeffs.a[1].real, coeffs.a[1].imag, coeffs.b[1].real, coeffs.b[1].imag,
           eff.c_p, eff.c_m, eff.c_qe, eff.c_qm, eff.c_total]
    cf = out / "moments_row.csv"
    _write_csv(cf, row_header, [row])
    print(f"wrote {jf}\nwrote {cf}")
    return 0


def _finite(v: float):
    return float(v) if np.isfinite(v) else None


def _cplx(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _cplx_list(arr) -> list[list[float]]:
    return [_cplx(z) for z in np.asarray(arr).ravel()]


def _cmd_kerker_scan(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bounds = {}
    for part in args.bounds.split(","):
        key, _, rng = part.partition("=")
        lo, _, hi = rng.partition(":")
        bounds[key.strip()] = (float(lo), float(hi))
    result = kerker_search(args.objective.replace("-", "_"), bounds,
                           points_per_axis=args.points, rounds=args.rounds)
    m = result["metrics"]
    payload = {
        "objective": args.objective,
        "best": result["best"],
        "objective_value": result["objective_value"],
        "metrics": {"forward": m.forward_intensity, "backward": m.backward_intensity,
                    "front_back_ratio": _finite(m.front_back_ratio),
                    "directivity": m.directivity},
    }
    f = out / "kerker_scan.json"
    f.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(json.dumps(payload["best"]), "->", _fmt(result["objective_value"]))
    print(f"wrote {f}")
    return 0


def _cmd_ce(args) -> int:
    c = _moments_from_args(args)
    p = pattern(c, n_theta=args.n_theta, n_phi=args.n_phi)
    if args.mix != "none":
        p = mix_emission(p, args.mix)
    value = collection_efficiency(p, args.na, args.direction)
    print(f"collection_efficiency={_fmt(value)}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        f = out / "ce.json"
        f.write_text(json.dumps({"na": args.na, "direction": args.direction,
                                 "collection_efficiency": value}, sort_keys=True) + "\n")
        print(f"wrote {f}")
    return 0


def _cmd_decay(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lam = args.wavelength
    moment = {"z": (0, 0, 1e-30), "x": (1e-30, 0, 0)}[args.orientation]
    if args.mirror_distance is not None:
        src = PointDipole(position=(0.0, 0.0, args.mirror_distance), moment=moment)
        antenna = solve(_empty_grid(lam, src, mirror_z=0.0))
        reference = solve(_empty_grid(lam, src))
        label = {"kind": "mirror", "distance_nm": args.mirror_distance}
    else:
        geom = AntennaGeometry(length=args.length, diameter=args.diameter,
                               gap=args.gap,
                               reflector_standoff=args.reflector_standoff)
        src = PointDipole(position=(0.0, 0.0, 0.0), moment=moment)
        grid = voxelize(geom, args.resolution, lam, source=src)
        antenna = solve(grid, max_voxels=args.max_voxels)
        reference = solve(_empty_grid(lam, src, host_index=args.reference_index))
        label = {"kind": "antenna", "L_nm": args.length, "D_nm": args.diameter}
    r = relative_decay_rate(antenna, reference)
    payload = dict(label, wavelength_nm=lam, orientation=args.orientation,
                   p_antenna_W=r.p_antenna, p_reference_W=r.p_reference,
                   relative_rate=r.relative_rate)
    f = out / "decay.json"
    f.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"relative_rate={_fmt(r.relative_rate)}")
    print(f"wrote {f}")
    return 0


def _empty_grid(lam, src, host_index: float = 1.0, mirror_z=None) -> FieldGrid:
    return FieldGrid(points=np.zeros((0, 3)), cell_volume=np.zeros(0),
                     epsilon_r=np.zeros(0), wavelength=lam, source=src,
                     host_index=host_index, mirror_z=mirror_z)


def _cmd_g2(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    k21 = 1.0 / (args.tau0_ns * 1e-9)
    model = TwoLevelModel(k12=args.pump_ratio * k21, k21=k21)
    if args.enhancement != 1.0:
        model = g2_enhanced(model, args.enhancement)
    tau_max = args.tau_max_ns * 1e-9 if args.tau_max_ns else 5.0 * model.tau1
    tau = np.linspace(0.0, tau_max, args.points)
    closed = g2(model, tau, n_emitters=args.emitters)

    rows = []
    if args.mc:
        duration = args.duration_ns * 1e-9 if args.duration_ns else 2e6 * model.tau1
        hist = hbt_montecarlo(model, duration=duration,
                              bin_width=tau_max / args.points, seed=args.seed,
                              tau_max=tau_max, n_emitters=args.emitters)
        fit = fit_antibunching(hist)
        print(f"fit: tau1={fit.tau1 * 1e9:.4g} ns g2(0)={fit.g2_zero:.4f} "
              f"(model tau1={model.tau1 * 1e9:.4g} ns)")
        mc_closed = g2(model, hist.tau, n_emitters=args.emitters)
        for t, gc, gm, err in zip(hist.tau, mc_closed, hist.g2, hist.err):
            rows.append([t * 1e9, float(gc), float(gm), float(err)])
    else:
        for t, gc in zip(tau, closed):
            rows.append([t * 1e9, float(gc), "", ""])
    f = out / "g2.csv"
    _write_csv(f, ["tau_ns", "g2_closed", "g2_mc", "mc_err"], rows)
    print(f"wrote {f}")
    return 0


def _cmd_budget(args) -> int:
    b = photon_budget(args.qe, args.tau0_ns * 1e-9, args.enhancement, args.ce)
    print(f"base rate      QE/tau0              = {b.base_rate / 1e6:.6g} MHz")
    print(f"emission rate  base x enhancement   = {b.emission_rate / 1e9:.6g} GHz")
    print(f"collection     emission x CE        = {b.collection_rate / 1e9:.6g} GHz")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        f = out / "budget.json"
        f.write_text(json.dumps({
            "quantum_efficiency": b.quantum_efficiency, "tau0_s": b.tau0,
            "enhancement": b.enhancement, "collection_efficiency": b.collection_efficiency,
            "base_rate_hz": b.base_rate, "emission_rate_hz": b.emission_rate,
            "collection_rate_hz": b.collection_rate}, indent=2, sort_keys=True) + "\n")
        print(f"wrote {f}")
    return 0


# ---------------------------------------------------------------------------
# sweeps

_SWEEP_SCHEMA = {
    "sweep": {"kind", "name", "na", "direction", "mix", "n_theta", "n_phi",
              "emit_patterns", "decay"},
    "geometry": {"lengths", "diameter", "gap", "emitter_size", "gap_index",
                 "emitter_index", "metal_permittivity_re",
                 "metal_permittivity_im", "wavelength", "resolution"},
    "solver": {"max_voxels", "rtol", "max_iterations"},
}
_POINT_KEYS = {"a1", "b1", "a2", "b2"}


def _load_config(path: str) -> dict:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if data.get("manifest"):
            return data["config"]
        return data
    cp = configparser.ConfigParser()
    cp.read_string(text)
    return {s: dict(cp.items(s)) for s in cp.sections()}


def _validate_config(cfg: dict) -> None:
    if "sweep" not in cfg:
        raise ConfigError("config needs a [sweep] section")
    for section, keys in cfg.items():
        if section.startswith("point:"):
            allowed = _POINT_KEYS
        elif section in _SWEEP_SCHEMA:
            allowed = _SWEEP_SCHEMA[section]
        else:
            raise ConfigError(f"unknown config section [{section}]")
        unknown = set(keys) - allowed
        if unknown:
            raise ConfigError(
                f"unknown key(s) {sorted(unknown)} in section [{section}]")
    kind = cfg["sweep"].get("kind")
    if kind not in ("moments", "geometry"):
        raise ConfigError("sweep.kind must be 'moments' or 'geometry'")
    if kind == "moments" and not any(s.startswith("point:") for s in cfg):
        raise ConfigError("empty domain: moments sweep needs [point:*] sections")
    if kind == "geometry":
        if "geometry" not in cfg or not str(cfg["geometry"].get("lengths", "")).strip():
            raise ConfigError("empty domain: geometry sweep needs geometry.lengths")


def _config_hash(cfg: dict) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _moment_point(name: str, keys: dict, sweep: dict, out: Path):
    c = MieCoefficients.from_amplitudes(
        [complex(str(keys.get("a1", 0))), complex(str(keys.get("a2", 0)))],
        [complex(str(keys.get("b1", 0))), complex(str(keys.get("b2", 0)))])
    p = pattern(c, n_theta=int(sweep.get("n_theta", 721)),
                n_phi=int(sweep.get("n_phi", 72)))
    mix = sweep.get("mix", "none")
    if mix != "none":
        p = mix_emission(p, mix)
    m = kerker_metrics(p)
    ce = collection_efficiency(p, float(sweep.get("na", 0.9)),
                               sweep.get("direction", "top"))
    files = []
    if str(sweep.get("emit_patterns", "false")).lower() in ("1", "true", "yes"):
        files = _write_pattern_files(p, out, stem=f"pattern_{name}")
    row = {
        "label": name,
        "a1": complex(str(keys.get("a1", 0))), "b1": complex(str(keys.get("b1", 0))),
        "a2": complex(str(keys.get("a2", 0))), "b2": complex(str(keys.get("b2", 0))),
        "forward": m.forward_intensity, "backward": m.backward_intensity,
        "front_back_ratio": m.front_back_ratio, "directivity": m.directivity,
        "ce": ce,
    }
    return row, files


def _geometry_point(length: float, cfg: dict, out: Path):
    geo = cfg["geometry"]
    sweep = cfg["sweep"]
    solver = cfg.get("solver", {})
    lam = float(geo.get("wavelength", 680.0))
    metal = None
    if "metal_permittivity_re" in geo:
        metal = complex(float(geo["metal_permittivity_re"]),
                        float(geo.get("metal_permittivity_im", 0.0)))
    g = AntennaGeometry(
        length=length, diameter=float(geo.get("diameter", 310.0)),
        gap=float(geo.get("gap", 40.0)),
        emitter_size=float(geo.get("emitter_size", 30.0)),
        gap_index=float(geo.get("gap_index", 1.5)),
        emitter_index=float(geo.get("emitter_index", 2.4)),
        metal_permittivity=metal)
    grid = voxelize(g, float(geo.get("resolution", 20.0)), lam, source=PlaneWave())
    solved = solve(grid,
                   rtol=float(solver.get("rtol", 1e-6)),
                   max_iterations=int(solver.get("max_iterations", 2000)),
                   max_voxels=int(solver.get("max_voxels", 60000)))
    mp = decompose(solved, origin=(0.0, 0.0, 0.0))
    geom_cs = np.pi * (g.diameter / 2.0) ** 2
    eff = efficiencies(mp, solved.k0, 1.0, geom_cs)
    coeffs = to_mie_moments(mp, solved.k0, 1.0)
    p = pattern(coeffs, n_theta=int(sweep.get("n_theta", 361)),
                n_phi=int(sweep.get("n_phi", 72)))
    m = kerker_metrics(p)
    ce = collection_efficiency(mix_emission(p, "symmetrize_updown"),
                               float(sweep.get("na", 0.9)),
                               sweep.get("direction", "top"))
    row = {
        "label": f"L={length:g}", "L_nm": length, "n_voxels": solved.n_points,
        "a1": complex(coeffs.a[0]), "b1": complex(coeffs.b[0]),
        "a2": complex(coeffs.a[1]), "b2": complex(coeffs.b[1]),
        "C_p": eff.c_p, "C_m": eff.c_m, "C_qe": eff.c_qe, "C_qm": eff.c_qm,
        "forward": m.forward_intensity, "backward": m.backward_intensity,
        "front_back_ratio": m.front_back_ratio, "directivity": m.directivity,
        "ce": ce,
    }
    return row, []


def emit_plotdata(rows: list[dict], out: Path) -> list[Path]:
    """Write per-figure xy data files from sweep result rows."""
    files = []
    if rows and "L_nm" in rows[0]:
        f = out / "sweep_moments_vs_length.csv"
        _write_csv(f, ["L_nm", "C_p", "C_m", "C_qe", "C_qm"],
                   [[r["L_nm"], r["C_p"], r["C_m"], r["C_qe"], r["C_qm"]]
                    for r in rows])
        files.append(f)
        f = out / "sweep_directivity_ce_vs_length.csv"
        _write_csv(f, ["L_nm", "directivity", "ce"],
                   [[r["L_nm"], r["directivity"], r["ce"]] for r in rows])
        files.append(f)
    return files


def _cmd_sweep(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = _load_config(args.config)
        _validate_config(cfg)
    except (ConfigError, OSError, json.JSONDecodeError, configparser.Error) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    kind = cfg["sweep"]["kind"]
    if kind == "moments":
        points = sorted((name.split(":", 1)[1], keys)
                        for name, keys in cfg.items() if name.startswith("point:"))
        tasks = [(label, lambda k=keys, n=label: _moment_point(n, k, cfg["sweep"], out))
                 for label, keys in points]
    else:
        lengths = sorted(float(v) for v in str(cfg["geometry"]["lengths"]).split())
        tasks = [(f"L={length:g}", lambda L=length: _geometry_point(L, cfg, out))
                 for length in lengths]

    rows, failures, files = [], [], []
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        futures = [(label, pool.submit(fn)) for label, fn in tasks]
        for label, fut in futures:
            try:
                row, extra = fut.result()
                rows.append(row)
                files.extend(extra)
            except Exception as exc:  # noqa: BLE001 - per-point isolation
                print(f"point {label} failed: {exc}", file=sys.stderr)
                failures.append({"label": label, "reason": str(exc)})

    rows.sort(key=lambda r: r["label"])
    if rows:
        header, csv_rows = _rows_to_table(rows)
        results = out / "results.csv"
        _write_csv(results, header, csv_rows)
        files.append(results)
        files.extend(emit_plotdata(rows, out))

    manifest = {
        "manifest": True,
        "version": __version__,
        "config": cfg,
        "config_hash": _config_hash(cfg),
        "seed": args.seed,
        "outputs": sorted(str(f.name) for f in files),
        "points_total": len(tasks),
        "points_failed": failures,
    }
    mf = out / "sweep_manifest.json"
    mf.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {mf} ({len(rows)}/{len(tasks)} points)")

    if failures and len(failures) > len(tasks) / 2:
        return 2
    if failures:
        return 3
    return 0


def _rows_to_table(rows: list[dict]):
    header = []
    for key in rows[0]:
        if isinstance(rows[0][key], complex):
            header += [f"{key}_re", f"{key}_im"]
        else:
            header.append(key)
    csv_rows = []
    for r in rows:
        out_row = []
        for key, v in r.items():
            if isinstance(v, complex):
                out_row += [v.real, v.imag]
            elif isinstance(v, (int, np.integer)):
                out_row.append(str(v))
            elif isinstance(v, str):
                out_row.append(v)
            else:
                out_row.append(float(v))
        csv_rows.append(out_row)
    return header, csv_rows


# ---------------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)


def _add_moments(sp):
    for name in ("a1", "b1", "a2", "b2"):
        sp.add_argument(f"--{name}", default="0", help=f"complex {name}, e.g. '1' or '0.5+0.2j'")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="miekerker", description=__doc__.split("\n", 1)[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("pattern", help="far-field pattern from Mie moments")
    _add_moments(sp)
    sp.add_argument("--n-theta", type=int, default=721)
    sp.add_argument("--n-phi", type=int, default=72)
    sp.add_argument("--k0", type=float, default=1.0, help="wavenumber (1/nm)")
    sp.add_argument("--mix", choices=["none", "average_cuts", "symmetrize_updown"],
                    default="none")
    _add_common(sp)
    sp.set_defaults(func=_cmd_pattern)

    sp = sub.add_parser("decompose", help="multipole decomposition of a field grid")
    sp.add_argument("--grid", help="FieldGrid CSV file")
    sp.add_argument("--oracle", choices=["sphere"], help="use the analytic sphere field")
    sp.add_argument("--x", type=float, default=0.8, help="oracle size parameter")
    sp.add_argument("--m", default="2.0", help="oracle relative index")
    sp.add_argument("--voxels-per-radius", type=int, default=10)
    sp.add_argument("--wavelength", type=float, default=680.0)
    sp.add_argument("--origin", help="expansion origin 'x,y,z' in nm")
    sp.add_argument("--long-wavelength", action="store_true")
    _add_common(sp)
    sp.set_defaults(func=_cmd_decompose)

    sp = sub.add_parser("kerker-scan", help="grid-refine search over moment magnitudes")
    sp.add_argument("--objective", choices=["min-backscatter", "max-directivity"],
                    required=True)
    sp.add_argument("--bounds", required=True, help="e.g. 'a1=0:2,b1=0:2'")
    sp.add_argument("--points", type=int, default=11)
    sp.add_argument("--rounds", type=int, default=3)
    _add_common(sp)
    sp.set_defaults(func=_cmd_kerker_scan)

    sp = sub.add_parser("ce", help="collection efficiency of a moment pattern")
    _add_moments(sp)
    sp.add_argument("--na", type=float, default=0.9)
    sp.add_argument("--direction", choices=["top", "bottom"], default="top")
    sp.add_argument("--mix", choices=["none", "average_cuts", "symmetrize_updown"],
                    default="none")
    sp.add_argument("--n-theta", type=int, default=721)
    sp.add_argument("--n-phi", type=int, default=72)
    sp.add_argument("--out", default="")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=_cmd_ce)

    sp = sub.add_parser("decay", help="relative decay rate (paired dipole solves)")
    sp.add_argument("--wavelength", type=float, default=680.0)
    sp.add_argument("--orientation", choices=["z", "x"], default="z")
    sp.add_argument("--mirror-distance", type=float,
                    help="dipole height above a perfect mirror (nm)")
    sp.add_argument("--length", type=float, default=340.0)
    sp.add_argument("--diameter", type=float, default=310.0)
    sp.add_argument("--gap", type=float, default=40.0)
    sp.add_argument("--resolution", type=float, default=10.0)
    sp.add_argument("--reflector-standoff", type=float, default=None)
    sp.add_argument("--reference-index", type=float, default=1.0,
                    help="reference medium index (1.0 or 1.05)")
    sp.add_argument("--max-voxels", type=int, default=60000)
    _add_common(sp)
    sp.set_defaults(func=_cmd_decay)

    sp = sub.add_parser("g2", help="two-level g2 curve and optional HBT Monte Carlo")
    sp.add_argument("--tau0-ns", type=float, default=31.0)
    sp.add_argument("--pump-ratio", type=float, default=0.1, help="k12/k21")
    sp.add_argument("--enhancement", type=float, default=1.0)
    sp.add_argument("--emitters", type=int, default=1)
    sp.add_argument("--tau-max-ns", type=float, default=None)
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--mc", action="store_true")
    sp.add_argument("--duration-ns", type=float, default=None)
    _add_common(sp)
    sp.set_defaults(func=_cmd_g2)

    sp = sub.add_parser("budget", help="photon-rate budget arithmetic")
    sp.add_argument("--qe", type=float, default=0.7)
    sp.add_argument("--tau0-ns", type=float, default=31.0)
    sp.add_argument("--enhancement", type=float, default=300.0)
    sp.add_argument("--ce", type=float, default=0.75)
    sp.add_argument("--out", default="")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=_cmd_budget)

    sp = sub.add_parser("sweep", help="config-driven sweep with manifest")
    sp.add_argument("--config", required=True)
    _add_common(sp)
    sp.set_defaults(func=_cmd_sweep)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
