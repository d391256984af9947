"""Command-line pipelines: portrait, spectrum, dos, ladder, otoc, scaling.

    bosecrit <command> [--config FILE] [--set key=value]... [--threads n] [--out DIR]

Exit status: 0 on success, 1 when a solver fails, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import classical as cl
from . import dynamics as dyn
from . import quantum as qm
from . import semiclassical as sc
from .config import COMMANDS, ConfigError, ExperimentConfig, load_config, parse_config
from .io import write_csv, write_report
from .linalg import ConvergenceError, PropagationError
from .model import ModelParams, build_basis
from .quadrature import QuadratureError

__all__ = ["main", "run", "SOLVER_ERRORS"]

SOLVER_ERRORS = (ConvergenceError, PropagationError, QuadratureError, sc.RootBracketError,
                 dyn.LeakageError)


def _map(fn, items, threads):
    """Ordered map; results are collected in input order whatever the scheduling."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _tag(x: float) -> str:
    return f"{x:.6g}"


def _meta(cfg: ExperimentConfig, **extra):
    return [*cfg.items(), *extra.items()]


def _exact_levels(params: ModelParams, count: int) -> np.ndarray:
    h = qm.build_hamiltonian(build_basis(params), params)
    k = min(count, h.dimension)
    return qm.diagonalize(h, qm.SpectralRequest("lowest", k=k)).eigenvalues


def _exact_gap(params: ModelParams, m: int) -> float:
    ev = _exact_levels(params, m + 2)
    return float(ev[m + 1] - ev[m])


# -- commands ---------------------------------------------------------------

def cmd_portrait(cfg: ExperimentConfig, out: Path, threads: int = 1) -> list[Path]:
    n = cfg.n_particles
    files = []

    def one(a):
        z, phi, w = cl.phase_portrait_grid(a, cfg.n_z, cfg.n_phi)
        zz, pp = np.meshgrid(z, phi, indexing="ij")
        rows = {"m": [], "omega": [], "kind": [], "phi": [], "z": []}
        params = ModelParams.from_alpha(n, a)
        ms = np.arange(n // 2 + 1)
        omegas = sc.ebk_levels(params, ms, tol=cfg.quad_tol)
        for m, om in zip(ms, omegas):
            kind = cl.classify_orbit(om, a).value
            ph, zs = cl.orbit_polyline(om, a, cfg.orbit_points)
            rows["m"] += [int(m)] * ph.size
            rows["omega"] += [float(om)] * ph.size
            rows["kind"] += [kind] * ph.size
            rows["phi"] += ph.tolist()
            rows["z"] += zs.tolist()
        fp = cl.fixed_points(a)
        extra = {"alpha_value": a, "contours": len(ms)}
        if fp.minimum is not None:
            extra.update(minimum_z=fp.minimum[0].z, minimum_phi=fp.minimum[0].phi,
                         omega_min=fp.minimum[1])
        if fp.hyperbolic:
            extra.update(saddle_phi=[p.phi for p, _ in fp.hyperbolic], lambda_s=fp.hyperbolic[0][1])
        meta = _meta(cfg, **extra)
        return [
            write_csv(out / f"portrait_alpha{_tag(a)}.csv",
                      {"z": zz.ravel(), "phi": pp.ravel(), "omega": w.ravel()}, meta),
            write_csv(out / f"orbits_alpha{_tag(a)}.csv", rows, meta),
        ]

    for pair in _map(one, cfg.alphas, threads):
        files += pair
    return files


def cmd_spectrum(cfg: ExperimentConfig, out: Path, threads: int = 1) -> list[Path]:
    n, levels = cfg.n_particles, cfg.levels
    alphas = np.linspace(cfg.alpha_min, cfg.alpha_max, cfg.alpha_steps)
    with_ebk = cfg.mode_cutoff == 1

    def one(a):
        params = ModelParams.from_alpha(n, float(a), cfg.mode_cutoff)
        exact = _exact_levels(params, levels + 1)
        m = np.arange(exact.size)
        if with_ebk and a <= sc.ALPHA_MAX:
            w = sc.ebk_levels(params, m, tol=cfg.quad_tol)
            e = cl.energy_from_omega(w, params)
        else:
            w = e = np.full(m.size, np.nan)
        return m, exact, w, e

    res = _map(one, alphas, threads)
    cols = {k: [] for k in ("alpha", "m", "E_exact", "Ex_exact", "E_ebk", "Ex_ebk", "omega_ebk")}
    for a, (m, ex, w, e) in zip(alphas, res):
        cols["alpha"] += [float(a)] * m.size
        cols["m"] += m.tolist()
        cols["E_exact"] += ex.tolist()
        cols["Ex_exact"] += (ex - ex[0]).tolist()
        cols["E_ebk"] += e.tolist()
        cols["Ex_ebk"] += (e - e[0]).tolist()
        cols["omega_ebk"] += w.tolist()
    meta = _meta(cfg)
    files = [write_csv(out / "spectrum.csv", cols, meta)]

    if not with_ebk:
        return files

    # avoided crossings of the two lowest gaps, located on the sweep grid and refined
    gap_rows = {"m": [], "alpha_exact": [], "gap_exact": [], "alpha_ebk": [], "gap_ebk": []}
    for mm in (0, 1):
        gap_rows["m"].append(mm)
        for label, fn in (("exact", _exact_gap), ("ebk", None)):
            try:
                a_min, g = sc.minimal_gap(n, alphas, m=mm, gap_fn=fn)
            except ValueError:
                a_min, g = math.nan, math.nan
            gap_rows[f"alpha_{label}"].append(a_min)
            gap_rows[f"gap_{label}"].append(g)
    files.append(write_csv(out / "gaps.csv", gap_rows, meta))

    # where each quantized orbit drops through the separatrix energy omega = 0
    w_all = np.array([r[2] for r in res])
    cross = {"m": [], "alpha": []}
    for mm in range(w_all.shape[1]):
        w = w_all[:, mm]
        for i in np.flatnonzero((w[:-1] >= 0) & (w[1:] < 0)):
            t = w[i] / (w[i] - w[i + 1])
            cross["m"].append(mm)
            cross["alpha"].append(float(alphas[i] + t * (alphas[i + 1] - alphas[i])))
    files.append(write_csv(out / "separatrix_crossings.csv", cross, meta))
    return files


def cmd_dos(cfg: ExperimentConfig, out: Path, threads: int = 1) -> list[Path]:
    params = ModelParams.from_alpha(cfg.n_particles, cfg.alpha)
    _, e_sep = cl.separatrix_energy(params)
    h = qm.build_hamiltonian(build_basis(params), params)
    w = cfg.energy_window
    dec = qm.diagonalize(h, qm.SpectralRequest("window", window=(e_sep - w, e_sep + w)))
    lv = dec.eigenvalues
    fit = sc.inverse_gap_regression(lv, params)
    mid = 0.5 * (lv[1:] + lv[:-1])
    lam = math.sqrt(params.alpha - 1.0)
    meta = _meta(cfg)
    files = [
        write_csv(out / "dos.csv", {
            "E_minus_Esep": mid - e_sep,
            "inverse_gap": 1.0 / np.diff(lv),
            "dos_asymptotic": sc.dos_asymptotic(mid, params, cfg.dos_offset),
        }, meta),
        write_report(out / "dos_fit.txt", {
            "slope": fit.slope,
            "expected_slope": 1.0 / (2.0 * math.pi * lam),
            "relative_error": fit.slope * 2.0 * math.pi * lam - 1.0,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "offset": fit.offset,
            "levels": lv.size,
        }, meta),
    ]
    return files


def cmd_ladder(cfg: ExperimentConfig, out: Path, threads: int = 1) -> list[Path]:
    def one(n):
        p = ModelParams.from_alpha(n, cfg.alpha)
        return sc.separatrix_ladder(p, cfg.ladder_window, method=cfg.ladder_method,
                                    dos_offset=cfg.dos_offset)

    ladders = _map(one, cfg.n_list, threads)
    # tau_offset = 0 means fit one offset jointly over the N list
    offset = cfg.tau_offset or sc.fit_tau_offset(ladders)
    files = []
    summary = {"N": [], "tau": [], "delta_E": [], "max_central_deviation": []}
    for n, lad in zip(cfg.n_list, ladders):
        tau = math.log(lad.n_tilde) / lad.lam + offset
        de = 2.0 * math.pi / tau
        sp = np.append(lad.spacings, np.nan)
        dev = np.max(np.abs(sc.central_spacings(lad) / de - 1.0))
        meta = _meta(cfg, n_value=n, method=lad.method, tau_offset_fit=offset)
        files.append(write_csv(out / f"ladder_N{n}.csv", {
            "k": lad.k,
            "E_minus_Esep": lad.energies,
            "spacing": sp,
            "spacing_over_deltaE": sp / de,
            "deltaE_times_tau": np.full(lad.k.size, de * tau),
        }, meta))
        summary["N"].append(n)
        summary["tau"].append(tau)
        summary["delta_E"].append(de)
        summary["max_central_deviation"].append(float(dev))
    files.append(write_csv(out / "ladder_summary.csv", summary, _meta(cfg, tau_offset_fit=offset)))
    return files


def _near_spacing(h, dec, psi, params, n_levels):
    if params.mode_cutoff == 1 and params.alpha > 1.0:
        return dyn.separatrix_spacing(h, n_levels)
    # five modes: the condensate sits on the unstable point, so measure around its energy
    e_q = float(psi @ h.matvec(psi))
    return dyn.level_spacing_near(dec.eigenvalues, e_q, n_levels)


def cmd_otoc(cfg: ExperimentConfig, out: Path, threads: int = 1) -> list[Path]:
    times = np.linspace(0.0, cfg.t_max, cfg.n_steps + 1)

    def one(n):
        params = ModelParams.from_alpha(n, cfg.alpha, cfg.mode_cutoff)
        basis = build_basis(params)
        h = qm.build_hamiltonian(basis, params)
        psi = dyn.quench_state(basis).amplitudes
        dec, _ = dyn.spectral_decomposition(h, psi, leak_tol=cfg.leak_tol)
        series = dyn.otoc_series(params, basis, h, times, decomposition=dec, entropy=cfg.entropy,
                                 leak_tol=cfg.leak_tol)
        report = {"dimension": basis.dimension, "leakage": series.leakage}
        if params.mode_cutoff == 1 and params.alpha > 1.0:
            g = dyn.fit_growth_rate(series)
            report.update(rate=g.rate, r_squared=g.r_squared, fit_t0=g.window[0], fit_t1=g.window[1],
                          expected_rate=2.0 * cl.stability_exponent(params.alpha))
        try:
            r = dyn.fit_revival_period(series, smoothing=cfg.peak_smoothing,
                                       threshold=cfg.peak_threshold)
            report.update(period=r.period, fft_period=r.fft_period, peak_times=r.peak_times)
        except ValueError:
            report.update(period=math.nan, fft_period=math.nan, peak_times=[])
        n_levels = max(2, round(math.log(params.n_tilde)))
        de = _near_spacing(h, dec, psi, params, n_levels)
        report.update(level_spacing=de, heisenberg_period=2.0 * math.pi / de)
        return params, series, report

    files = []
    for n, (params, series, report) in zip(cfg.n_list, _map(one, cfg.n_list, threads)):
        meta = _meta(cfg, n_value=n)
        cols = {"t": series.times, "C": series.c_values}
        if series.entropy_values is not None:
            cols["S"] = series.entropy_values
        files.append(write_csv(out / f"otoc_N{n}.csv", cols, meta))
        files.append(write_report(out / f"otoc_fit_N{n}.txt", report, meta))
    return files


def cmd_scaling(cfg: ExperimentConfig, out: Path, threads: int = 1) -> list[Path]:
    grid = np.linspace(cfg.scan_min, cfg.scan_max, cfg.scan_steps)
    fit = sc.gap_scaling_fit(grid, cfg.n_list)
    meta = _meta(cfg)
    lo_a, hi_a = fit.confidence_interval("alpha")
    lo_e, hi_e = fit.confidence_interval("energy")
    return [
        write_csv(out / "gap_scaling.csv", {
            "N": fit.n.astype(np.int64), "alpha_min": fit.alpha_min,
            "delta_alpha": fit.alpha_min - 1.0, "E_gap": fit.e_gap}, meta),
        write_report(out / "gap_scaling_fit.txt", {
            "exponent_alpha": fit.exponent_alpha, "ci95_alpha": (lo_a, hi_a),
            "r_squared_alpha": fit.r_squared_alpha,
            "exponent_energy": fit.exponent_e, "ci95_energy": (lo_e, hi_e),
            "r_squared_energy": fit.r_squared_e,
        }, meta),
    ]


COMMAND_TABLE = {
    "portrait": cmd_portrait,
    "spectrum": cmd_spectrum,
    "dos": cmd_dos,
    "ladder": cmd_ladder,
    "otoc": cmd_otoc,
    "scaling": cmd_scaling,
}


def run(cfg: ExperimentConfig, out: Path | None = None, threads: int = 1) -> list[Path]:
    out = Path(out or cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    return COMMAND_TABLE[cfg.command](cfg, out, threads)


def _parser():
    ap = argparse.ArgumentParser(prog="bosecrit", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key = value file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config entry (repeatable, later wins)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", help="output directory (overrides output_dir)")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.config:
            cfg = load_config(args.config, args.set, command=args.command)
        else:
            cfg = parse_config("", args.set, command=args.command)
        if cfg.command != args.command:
            cfg = cfg.replace(command=args.command)
        files = run(cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # parameters outside a method's domain, e.g. no separatrix for alpha <= 1
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
