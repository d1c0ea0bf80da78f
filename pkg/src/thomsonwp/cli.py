"""Command-line front end: ``thomsonwp <subcommand> CONFIG [options]``."""
from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time

import numpy as np
import scipy

from . import __version__, _backend
from .config import load_config
from .errors import ConfigError, ThomsonError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
SUBCOMMANDS = ("trajectory", "radiate", "thomson-scan", "wigner", "ensemble", "compare")


def _write_csv(path, header, rows, fmt, comments=()):
    with open(path, "w", newline="\n") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, np.atleast_2d(np.asarray(rows, dtype=float)), fmt=fmt, delimiter=",")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _hdr(cfg, what):
    return [f"thomsonwp {what}", f"config_sha256 {cfg.content_hash()}",
            f"seed {cfg.seed}"]


def run_trajectory(cfg, out, threads):
    from .dynamics import drift_momentum, simulate_electron
    beam = cfg.beam()
    traj = simulate_electron(beam, cfg.electron())
    k = cfg.get("output", "trajectory_stride")
    idx = np.arange(0, len(traj), k)
    if idx[-1] != len(traj) - 1:
        idx = np.append(idx, len(traj) - 1)
    rows = np.column_stack([traj.t[idx], traj.r[idx], traj.p[idx], traj.gamma[idx]])
    _write_csv(os.path.join(out, "trajectory.csv"),
               ["t", "x", "y", "z", "px", "py", "pz", "gamma"], rows,
               cfg.get("output", "float_format"),
               _hdr(cfg, "trajectory") + ["units: t in 1/omega0, positions in 1/k0 = lambda/2pi,"
                                          " momenta in m_e c"])
    summary = {
        "n_samples": len(traj),
        "birth_time_fs": beam.units.norm_to_fs(traj.t[0]),
        "end_time_fs": beam.units.norm_to_fs(traj.t[-1]),
        "gamma_max": float(traj.gamma.max()),
        "final_momentum_mec": traj.p[-1].tolist(),
        "integrator": traj.metadata,
    }
    try:
        summary["drift_momentum_mec"] = drift_momentum(traj).tolist()
    except ThomsonError as exc:
        summary["drift_momentum_mec"] = None
        summary["drift_note"] = str(exc)
    _write_json(os.path.join(out, "trajectory_summary.json"), summary)
    return ["trajectory.csv", "trajectory_summary.json"], {"trajectory": summary}


def run_radiate(cfg, out, threads):
    from .dynamics import simulate_electron
    from .radiation import (band_energy, larmor_total, photon_count_estimate, radiation_map,
                            total_energy, write_map_csv)
    beam = cfg.beam()
    g = cfg.values["grids"]
    traj = simulate_electron(beam, cfg.electron())
    grid = cfg.grid()
    if not grid.is_sphere:
        raise ConfigError("radiate needs grids.kind = sphere", key="grids.kind")
    rmap = radiation_map(traj, grid, wavelength_nm=beam.wavelength_nm, window=g["window"],
                         samples_per_period=g["samples_per_period"],
                         observation_radius_um=g["observation_radius_um"], threads=threads)
    write_map_csv(rmap, os.path.join(out, "radiation_map.csv"), _hdr(cfg, "radiation map"))
    spectrum = rmap.spectrum()
    fmt = cfg.get("output", "float_format")
    _write_csv(os.path.join(out, "spectrum.csv"),
               ["omega_over_omega0", "wavelength_nm", "de_domega_eV"],
               np.column_stack([spectrum.omegas, beam.wavelength_nm / spectrum.omegas, spectrum.values]), fmt,
               _hdr(cfg, "solid-angle integrated spectrum")
               + ["units: energy per unit omega/omega0 in eV"])
    th, ph = np.meshgrid(grid.thetas, grid.phis, indexing="ij")
    _write_csv(os.path.join(out, "angular.csv"),
               ["theta_rad", "phi_rad", "de_dOmega_eV", "fluence_eV_um2"],
               np.column_stack([th.ravel(), ph.ravel(), rmap.angular_distribution().ravel(),
                                rmap.fluence_at_radius().ravel()]), fmt,
               _hdr(cfg, "angular distribution")
               + [f"fluence at {rmap.observation_radius_um:g} um"])
    totals = {
        "total_eV": total_energy(rmap),
        "larmor_eV": larmor_total(traj, beam.wavelength_nm),
        "photons_total": photon_count_estimate(rmap),
        "peak_wavelength_nm": spectrum.peak_wavelength_nm(),
        "collection_efficiency": g["collection_efficiency"],
    }
    for lo, hi in g["bands_nm"]:
        tag = f"band_{lo:g}_{hi:g}"
        totals[f"{tag}_eV"] = band_energy(rmap, lo, hi)
        totals[f"{tag}_fraction"] = totals[f"{tag}_eV"] / totals["total_eV"]
        totals[f"{tag}_photons_collected"] = photon_count_estimate(
            rmap, lo, hi, g["collection_efficiency"])
    _write_json(os.path.join(out, "totals.json"), totals)
    return ["radiation_map.csv", "spectrum.csv", "angular.csv", "totals.json"], {"totals": totals}


def run_thomson_scan(cfg, out, threads):
    from .extended import efficiency_scan
    g = cfg.values["grids"]
    r0 = np.linspace(0.0, g["scan_r0_max_over_lambda"], g["scan_n_r0"])
    table = efficiency_scan(r0)
    table.write_csv(os.path.join(out, "thomson_scan.csv"), _hdr(cfg, "coherent cloud efficiency"))
    return ["thomson_scan.csv"], {}


def run_wigner(cfg, out, threads):
    from .units import C, LAMBDA_C_BAR
    from .wigner import (PhaseSpaceBox, free_evolve, marginal_position, negativity_report,
                         spread_width, wigner_eval)
    w = cfg.values["wavepacket"]
    beam = cfg.beam()
    state = cfg.wavepacket()
    t_s = w["evolve_fs"] * 1e-15
    evolved = free_evolve(state, t_s) if t_s > 0 else state
    fmt = cfg.get("output", "float_format")
    sigma = cfg.sigma_r_m()
    lam = beam.wavelength_nm * 1e-9
    report = {"sigma0_m": sigma, "evolve_fs": w["evolve_fs"],
              "hbar_t_over_2m_sigma0_sq": LAMBDA_C_BAR * C * t_s / (2 * sigma**2)}
    s_t = float(spread_width(sigma, t_s))
    report["sigma_t_m"] = s_t
    report["sigma_t_over_lambda"] = s_t / lam
    report["periods"] = t_s / (lam / C)
    # grid dump along z: rho_w(z, p_z) with the other axes at the packet center
    n = w["dump_points"]
    comps = [p for _, p in state.components]
    pz = np.array([p.center_p[2] for p in comps])
    sp = comps[0].sigma_p[2]
    zk = pz * C * t_s
    zspan = 5 * max(s_t, sigma)
    z = np.linspace(zk.min() - zspan, zk.max() + zspan, n)
    p = np.linspace(pz.min() - 5 * sp, pz.max() + 5 * sp, n)
    Z, P = np.meshgrid(z, p, indexing="ij")
    r = np.zeros(Z.shape + (3,))
    q = np.zeros(Z.shape + (3,))
    r[..., 2] = Z
    q[..., 2] = P
    q[..., :2] = comps[0].center_p[:2]
    rho = wigner_eval(evolved, r, q)
    _write_csv(os.path.join(out, "wigner_zpz.csv"), ["z_m", "pz_mec", "rho_w"],
               np.column_stack([Z.ravel(), P.ravel(), rho.ravel()]), fmt,
               _hdr(cfg, "Wigner slice") + ["x, y, px, py at the packet center;"
                                            " rho_w in 1/(m m_e c)^3"])
    rz = np.zeros((n, 3))
    rz[:, 2] = z
    _write_csv(os.path.join(out, "position_marginal_z.csv"), ["z_m", "density_m3"],
               np.column_stack([z, marginal_position(evolved, rz)]), fmt,
               _hdr(cfg, "position marginal along z at x = y = 0"))
    # free flight shears phase space without changing Wigner values, so the
    # initial state carries the same negativity on a grid that resolves it
    neg = negativity_report(state, PhaseSpaceBox.around(state), w["negativity_resolution"])
    report["negativity"] = neg.as_dict()
    _write_json(os.path.join(out, "wigner_report.json"), report)
    return ["wigner_zpz.csv", "position_marginal_z.csv", "wigner_report.json"], {"wigner": report}


def _need_seed(cfg):
    if cfg.seed is None:
        raise ConfigError("ensemble.seed is required (or pass --seed)", key="ensemble.seed")
    return cfg.seed


def _write_band_csv(path, cfg, grid, bands, fmt):
    th, ph = np.meshgrid(grid.thetas, grid.phis, indexing="ij")
    header = ["band", "theta_rad", "phi_rad", "incoherent_eV_sr", "incoherent_se",
              "coherent_eV_sr", "coherent_se", "coherent_unbiased_eV_sr", "coherent_unbiased_se"]
    rows = []
    names = list(bands)
    for k, name in enumerate(names):
        b = bands[name]
        rows.append(np.column_stack([np.full(th.size, k), th.ravel(), ph.ravel(),
                                     b.incoherent.ravel(), b.incoherent_se.ravel(),
                                     b.coherent.ravel(), b.coherent_se.ravel(),
                                     b.coherent_unbiased.ravel(), b.coherent_unbiased_se.ravel()]))
    _write_csv(path, header, np.vstack(rows), fmt,
               _hdr(cfg, "ensemble band energies")
               + ["band index: " + ", ".join(f"{i}={n}" for i, n in enumerate(names)),
                  "energies in eV/sr integrated over the band"])


def run_ensemble(cfg, out, threads):
    from .ensemble import ensemble_radiation, sample_phase_space
    from .radiation import write_map_csv
    seed = _need_seed(cfg)
    e = cfg.values["ensemble"]
    beam = cfg.beam()
    grid = cfg.grid()
    samples = sample_phase_space(cfg.wavepacket(), e["n_samples"], seed)
    res = ensemble_radiation(samples, beam, grid, settings=cfg.ensemble_settings(), seed=seed,
                             threads=threads)
    files = []
    if e["model"] in ("incoherent", "both"):
        write_map_csv(res.incoherent_map, os.path.join(out, "incoherent_map.csv"),
                      _hdr(cfg, "incoherent ensemble map"))
        files.append("incoherent_map.csv")
    if e["model"] in ("coherent", "both"):
        write_map_csv(res.coherent_map, os.path.join(out, "coherent_map.csv"),
                      _hdr(cfg, "coherent ensemble map"))
        files.append("coherent_map.csv")
    _write_band_csv(os.path.join(out, "ensemble_bands.csv"), cfg, grid, res.bands,
                    cfg.get("output", "float_format"))
    report = {"n_samples": res.n_samples, "seed": seed,
              "bands": {k: v.as_dict() for k, v in res.bands.items()}}
    _write_json(os.path.join(out, "ensemble_report.json"), report)
    return files + ["ensemble_bands.csv", "ensemble_report.json"], {}


def run_compare(cfg, out, threads):
    from .ensemble import compare_models
    seed = _need_seed(cfg)
    beam = cfg.beam()
    grid = cfg.grid()
    rep = compare_models(cfg.wavepacket(), beam, cfg.values["ensemble"]["n_samples"], seed,
                         grid=grid, settings=cfg.ensemble_settings(), threads=threads)
    rows = rep.ratio_table()
    keys = [k for k in rows[0] if k != "direction"]
    _write_csv(os.path.join(out, "compare.csv"), ["direction_index", *keys],
               [[i, *[r[k] for k in keys]] for i, r in enumerate(rows)],
               cfg.get("output", "float_format"),
               _hdr(cfg, "model comparison")
               + ["directions: " + ", ".join(f"{i}={r['direction']}" for i, r in enumerate(rows)),
                  "energies in eV/sr over the grid band; analytic_ratio uses r0 = sqrt(2) sigma_r"])
    _write_json(os.path.join(out, "compare_report.json"), rep.as_dict())
    return ["compare.csv", "compare_report.json"], {"compare": rep.as_dict()}


RUNNERS = {
    "trajectory": run_trajectory,
    "radiate": run_radiate,
    "thomson-scan": run_thomson_scan,
    "wigner": run_wigner,
    "ensemble": run_ensemble,
    "compare": run_compare,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thomsonwp",
                                 description="Thomson scattering by single-electron wave packets")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("config", help="INI configuration file")
    ap.add_argument("--out", default="runs/out", help="output directory (created if missing)")
    ap.add_argument("--seed", type=int, default=None, help="overrides ensemble.seed")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads (default: all cores); results do not depend on it")
    ap.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="SECTION.KEY=VALUE", help="override one configuration entry")
    return ap


def run(subcommand, config_path, overrides=(), out="runs/out", seed=None, threads=None) -> int:
    t0 = time.perf_counter()
    overrides = list(overrides)
    if seed is not None:
        overrides.append(f"ensemble.seed={seed}")
    try:
        cfg = load_config(config_path, overrides)
    except ConfigError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"thomsonwp: configuration error{key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"thomsonwp: cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if threads is not None and threads < 1:
        print("thomsonwp: configuration error [--threads]: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(out, exist_ok=True)
    try:
        files, extra = RUNNERS[subcommand](cfg, out, threads)
    except ConfigError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"thomsonwp: configuration error{key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ThomsonError, ArithmeticError, ValueError) as exc:
        print(f"thomsonwp: {subcommand} failed ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {
        "subcommand": subcommand,
        "config_path": os.path.abspath(config_path),
        "config": cfg.as_dict(),
        "config_sha256": cfg.content_hash(),
        "seed": cfg.seed,
        "threads": threads,
        "outputs": files,
        "versions": {"thomsonwp": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version(),
                     "kernels": _backend.NAME},
        "wall_time_s": time.perf_counter() - t0,
    }
    manifest.update(extra)
    _write_json(os.path.join(out, "manifest.json"), manifest)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.subcommand, args.config, args.overrides, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
