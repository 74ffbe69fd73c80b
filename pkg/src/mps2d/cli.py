"""Command-line front end: scan / solve / verify-disc / mode.

Every run is described by a config file (see :mod:`mps2d.config`) whose values
individual flags override.  Curve and grid outputs are delimited text (csv) or
json; alongside each data file the matching figure is rendered to PNG unless
--no-plot is given.  Exit codes: 0 success, 1 usage or config error,
2 numerical failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import disc_oracle as oracle
from .config import RunConfig, load_config
from .errors import ConfigError, MPSError
from .scanner import find_minima, refine_minimum, render_mode, scan, solve_window

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

_FMT = "%.17g"


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MPSError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mps2d",
        description="Laplace eigenvalues on smooth planar domains by the "
                    "method of particular solutions, with certified intervals.")
    sub = parser.add_subparsers(dest="command", required=True)

    scan_p = sub.add_parser("scan", help="tension curve over an energy window")
    _common_flags(scan_p)
    scan_p.set_defaults(handler=cmd_scan)

    solve_p = sub.add_parser("solve", help="locate and certify eigenvalues")
    _common_flags(solve_p)
    solve_p.set_defaults(handler=cmd_solve)

    verify_p = sub.add_parser("verify-disc",
                              help="check the analytic unit-disc identities")
    verify_p.add_argument("--freq-max", type=float, default=60.0,
                          help="largest mode frequency included (<= 80)")
    verify_p.add_argument("--out", default="", help="also write the report here")
    verify_p.set_defaults(handler=cmd_verify_disc)

    mode_p = sub.add_parser("mode", help="render |v|^2 of a located mode")
    _common_flags(mode_p)
    mode_p.add_argument("--from-solve", default="",
                        help="certificates file written by `solve` (json)")
    mode_p.add_argument("--index", type=int, default=0,
                        help="record index in the certificates file")
    mode_p.add_argument("--grid-n", type=int, default=0,
                        help="rendering grid size (overrides config)")
    mode_p.set_defaults(handler=cmd_mode)
    return parser


def _common_flags(p):
    p.add_argument("--config", default="", help="config file path")
    p.add_argument("--out", default="", help="output data file")
    p.add_argument("--format", default="", choices=["", "csv", "json"])
    p.add_argument("--e-lo", type=float, default=None)
    p.add_argument("--e-hi", type=float, default=None)
    p.add_argument("--n-grid", type=int, default=None)
    p.add_argument("--bc", default="",
                   choices=["", "dirichlet", "neumann", "neumann-raw"])
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--plot", default="", help="figure path (default: next to --out)")
    p.add_argument("--no-plot", action="store_true", help="do not render a figure")


def _load_run_config(args) -> RunConfig:
    data = load_config(args.config) if args.config else {}
    overrides = {
        "out": args.out or None,
        "format": args.format or None,
        "e_lo": args.e_lo,
        "e_hi": args.e_hi,
        "n_grid": args.n_grid,
        "bc": args.bc or None,
        "threads": args.threads,
        "plot": args.plot or None,
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if getattr(args, "no_plot", False):
        data["plot"] = "none"
    return RunConfig.from_dict(data)


def _plot_path(cfg: RunConfig):
    if cfg.plot == "none":
        return None
    if cfg.plot:
        return Path(cfg.plot)
    if cfg.out:
        return Path(cfg.out).with_suffix(".png")
    return None


def _require_out(cfg):
    if not cfg.out:
        raise ConfigError("an output path is required (--out or `out` in the config)")


# -- scan ----------------------------------------------------------------------

def cmd_scan(args) -> int:
    cfg = _load_run_config(args)
    _require_out(cfg)
    e_lo, e_hi = cfg.window()
    result = scan(cfg.problem(), e_lo, e_hi, cfg.n_grid, threads=cfg.threads)
    if cfg.format == "csv":
        _write_scan_csv(cfg.out, result, cfg.n_higher)
    else:
        _write_scan_json(cfg.out, result)
    path = _plot_path(cfg)
    if path is not None:
        from .plotting import save_scan_plot
        save_scan_plot(result, path)
    for idx, message in result.failures:
        print(f"warning: E = {result.energies[idx]:.6g} failed: {message}",
              file=sys.stderr)
    return EXIT_OK


def _write_scan_csv(path, result, n_higher):
    cols = ["E", "t_min"] + [f"t_{i + 2}" for i in range(n_higher)]
    lines = ["# " + ",".join(cols)]
    for i in range(len(result.energies)):
        row = [result.energies[i], result.tensions[i], *result.higher_tensions[i]]
        lines.append(",".join(_FMT % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_scan_json(path, result):
    payload = {
        "energies": list(result.energies),
        "tensions": _jsonable(result.tensions),
        "higher_tensions": [_jsonable(row) for row in result.higher_tensions],
        "failures": [{"index": i, "message": m} for i, m in result.failures],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def _jsonable(values):
    return [None if not np.isfinite(v) else float(v) for v in np.asarray(values)]


# -- solve ---------------------------------------------------------------------

def cmd_solve(args) -> int:
    cfg = _load_run_config(args)
    _require_out(cfg)
    e_lo, e_hi = cfg.window()
    scan_result, records = solve_window(cfg.problem(), e_lo, e_hi, cfg.n_grid,
                                        threads=cfg.threads)
    if cfg.format == "csv":
        _write_records_csv(cfg.out, records)
    else:
        _write_records_json(cfg.out, cfg, records)
    path = _plot_path(cfg)
    if path is not None:
        from .plotting import save_scan_plot
        certs = [r.certificate for r in records if r.certificate is not None]
        save_scan_plot(scan_result, path, certificates=certs)
    for r in records:
        if r.error:
            print(f"warning: minimum near E = {r.e_star:.9g}: {r.error}",
                  file=sys.stderr)
    return EXIT_OK


def _record_payload(r):
    cert = r.certificate
    payload = {
        "e_star": r.e_star,
        "t_star": r.t_star,
        "slope": cert.slope if cert else None,
        "c_est": cert.c_est if cert else None,
        "interval": list(cert.interval) if cert else None,
        "moler_payne_interval":
            list(cert.moler_payne_interval) if cert and cert.moler_payne_interval else None,
        "angle_bound": cert.angle_bound if cert else None,
        "est_multiplicity": r.est_multiplicity,
        "converged": r.converged,
        "bracket": list(r.bracket),
        "error": r.error,
        "numerical_rank": r.tension.numerical_rank,
        "higher_tensions": _jsonable(r.tension.higher_tensions),
        "coeffs": [float(c) for c in r.tension.coeffs],
    }
    return payload


def _write_records_json(path, cfg, records):
    payload = {
        "bc": cfg.bc,
        "window": [cfg.e_lo, cfg.e_hi],
        "n_grid": cfg.n_grid,
        "certificates": [_record_payload(r) for r in records],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def _write_records_csv(path, records):
    cols = ["e_star", "t_star", "slope", "c_est", "interval_lo", "interval_hi",
            "moler_payne_lo", "moler_payne_hi", "angle_bound",
            "est_multiplicity", "converged"]
    lines = ["# " + ",".join(cols)]
    for r in records:
        cert = r.certificate
        if cert is None:
            row = [r.e_star, r.t_star] + [np.nan] * 7 + [r.est_multiplicity,
                                                         int(r.converged)]
        else:
            mp = cert.moler_payne_interval or (np.nan, np.nan)
            angle = cert.angle_bound if cert.angle_bound is not None else np.nan
            row = [cert.e_star, cert.t_star, cert.slope, cert.c_est,
                   cert.interval[0], cert.interval[1], mp[0], mp[1], angle,
                   r.est_multiplicity, int(r.converged)]
        lines.append(",".join(_FMT % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- verify-disc -----------------------------------------------------------------

def cmd_verify_disc(args) -> int:
    if not 0 < args.freq_max <= 80.0:
        raise ConfigError("freq-max must lie in (0, 80]")
    rows = _disc_checks(args.freq_max)
    width = max(len(r[0]) for r in rows)
    lines = [f"disc verification (frequencies up to {args.freq_max:g})", ""]
    ok = True
    for name, value, bound, passed in rows:
        ok &= passed
        lines.append(f"{name:<{width}}  {value:>14.10g}  {bound:<28}  "
                     f"{'pass' if passed else 'FAIL'}")
    lines.append("")
    lines.append("all checks passed" if ok else "SOME CHECKS FAILED")
    report = "\n".join(lines)
    print(report)
    if args.out:
        Path(args.out).write_text(report + "\n", encoding="utf-8")
    return EXIT_OK if ok else EXIT_VERIFY


def _disc_checks(freq_max):
    """(name, measured value, bound description, passed) rows."""
    rows = []
    sqrt2 = np.sqrt(2.0)
    neu = [m for m in oracle.disc_spectrum("neumann", freq_max) if m.l > 0]
    dir_ = oracle.disc_spectrum("dirichlet", freq_max)

    closed = np.array([oracle.verify_sqrt2(m) for m in neu])
    worst = closed[np.abs(closed - sqrt2).argmax()]
    rows.append(("sqrt2 identity, closed form (worst value)",
                 worst, "= sqrt(2) +- 1e-8",
                 np.abs(closed - sqrt2).max() <= 1e-8))
    dft = np.array([oracle.verify_sqrt2(m, n_samples=512) for m in neu])
    rows.append(("sqrt2 identity, DFT route (max dev)",
                 np.abs(dft - closed).max(), "<= 1e-9",
                 np.abs(dft - closed).max() <= 1e-9))

    rel = np.array([oracle.boundary_trace_norm(m) ** 2 / (2.0 * m.eigenvalue) - 1.0
                    for m in dir_])
    rows.append(("Dirichlet trace identity |psi|^2/2E - 1",
                 np.abs(rel).max(), "<= 1e-9", np.abs(rel).max() <= 1e-9))
    quad = []
    thetas = np.linspace(0.0, 2.0 * np.pi, 1024, endpoint=False)
    for m in dir_:
        samples = oracle.trace_samples(m, thetas)
        quad.append((2.0 * np.pi / 1024) * np.sum(samples ** 2) / (2.0 * m.eigenvalue) - 1.0)
    rows.append(("Dirichlet trace identity, quadrature",
                 np.abs(quad).max(), "<= 1e-9", np.abs(quad).max() <= 1e-9))

    wmin = min(oracle.boundary_trace_norm(m)
               for m in oracle.disc_spectrum("neumann", freq_max))
    rows.append(("Neumann trace lower bound (min |w|)", wmin, ">= 1", wmin >= 1.0))

    gallery = [m for m in neu if m.l == 1 and 5 <= m.n <= 60]
    if gallery:
        ratios = np.array([oracle.boundary_trace_norm(m) / m.frequency ** (1.0 / 3.0)
                           for m in gallery])
        rows.append(("whispering-gallery |w|/mu^(1/3) (min)",
                     ratios.min(), ">= 0.3", ratios.min() >= 0.3))
        rows.append(("whispering-gallery |w|/mu^(1/3) (max)",
                     ratios.max(), "<= 3", ratios.max() <= 3.0))

    windows = [lam for lam in (10.0, 20.0, 40.0, 60.0) if lam + 1.0 <= freq_max + 1.0]
    dnorm = np.array([oracle.cluster_operator_norm("dirichlet", lam) / lam ** 2
                      for lam in windows])
    rows.append(("Dirichlet cluster norm / lambda^2 (max)",
                 dnorm.max(), "<= 4", dnorm.max() <= 4.0))
    fnorm = np.array([oracle.cluster_operator_norm("neumann", lam, filtered=True)
                      for lam in windows])
    rows.append(("filtered Neumann cluster norm (max)",
                 fnorm.max(), "<= 3", fnorm.max() <= 3.0))
    # a single half-wave-weighted trace has rank-one norm (sqrt 2)^2, so the
    # computed window norm sits at 2 rather than sqrt(2)
    single = [m for m in neu if m.n == 1 and m.l == 1]
    if single:
        mode_norm = oracle.verify_sqrt2(single[0]) ** 2
        rows.append(("filtered single-mode rank-one norm",
                     mode_norm, "= 2 = (sqrt 2)^2 +- 1e-8",
                     abs(mode_norm - 2.0) <= 1e-8))
    rnorm = np.array([oracle.cluster_operator_norm("neumann", lam)
                      for lam in windows])
    growth = rnorm / fnorm
    rows.append(("raw/filtered Neumann cluster ratio growth",
                 growth[-1] / growth[0], "> 1 (grows with mu)",
                 bool(np.all(np.diff(growth) > 0))))
    return rows


# -- mode ------------------------------------------------------------------------

def cmd_mode(args) -> int:
    cfg = _load_run_config(args)
    _require_out(cfg)
    grid_n = args.grid_n if args.grid_n > 0 else cfg.grid_n
    problem = cfg.problem()
    if args.from_solve:
        with open(args.from_solve, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        certs = payload.get("certificates", [])
        if not 0 <= args.index < len(certs):
            raise ConfigError(f"record index {args.index} out of range "
                              f"({len(certs)} certificates)")
        rec = certs[args.index]
        e_star, t_star = rec["e_star"], rec["t_star"]
        interval = rec.get("interval")
        coeffs = np.asarray(rec["coeffs"], dtype=float)
        if len(coeffs) != problem.basis.size:
            raise ConfigError("certificate coefficients do not match the "
                              "configured basis size")
    else:
        e_lo, e_hi = cfg.window()
        scan_result = scan(problem, e_lo, e_hi, cfg.n_grid, threads=cfg.threads)
        brackets = find_minima(scan_result)
        if not brackets:
            raise MPSError("no tension minimum found in the given window")
        center = 0.5 * (e_lo + e_hi)
        bracket = min(brackets, key=lambda b: abs(b[1] - center))
        refined = refine_minimum(problem, bracket)
        e_star, t_star = refined.e_star, refined.t_star
        interval = None
        coeffs = refined.result.coeffs
    grid = render_mode(problem, e_star, coeffs, grid_n)
    meta = {"e_star": e_star, "t_star": t_star, "interval": interval,
            "grid_n": grid_n, "extent": list(grid.extent)}
    if cfg.format == "csv":
        _write_mode_csv(cfg.out, grid, meta)
    else:
        _write_mode_json(cfg.out, grid, meta)
    path = _plot_path(cfg)
    if path is not None:
        from .plotting import save_mode_plot
        save_mode_plot(grid, path)
    return EXIT_OK


def _write_mode_csv(path, grid, meta):
    lines = [f"# {key} = {json.dumps(value)}" for key, value in meta.items()]
    for row in grid.values:
        lines.append(",".join("nan" if not np.isfinite(v) else _FMT % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_mode_json(path, grid, meta):
    payload = {"metadata": meta, "values": [_jsonable(row) for row in grid.values]}
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


if __name__ == "__main__":
    sys.exit(main())
