"""Command-line entry point: ``wavechaos <subcommand> --config PATH``.

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 identity-suite failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds, chaos, gpsim, harness, transform
from .chaos import Nonlinearity, build_chaos_table
from .config import RunConfig, check_J_cap, parse_config
from .errors import ConfigError, DomainError, NumericalError, SizeError, WavechaosError
from .wavelets import LowPass, sigma_j

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_SUITE = 0, 1, 2, 3

SUBCOMMANDS = ("coeffs", "verify-identities", "sigma", "simulate", "transform", "covlimit",
               "rates", "clt")


def fmt(v) -> str:
    """Locale-independent, round-trip text for one CSV cell."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(v) for v in row])
    return path


def _slug(A: Nonlinearity) -> str:
    return A.label.replace(":", "_").replace(".", "p")


def threads_from(flag) -> int:
    """Worker count: ``--threads`` wins over ``WAVECHAOS_THREADS``; 0 means all cores."""
    raw = flag if flag is not None else os.environ.get("WAVECHAOS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"threads: expected an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("threads: must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# subcommands


def cmd_coeffs(cfg: RunConfig, out: Path, args) -> int:
    for A in cfg.A:
        table = build_chaos_table(A, cfg.K)
        rows = zip(table.ells, table.c_a[1:], table.c_ell, table.ell_factorial_c_ell_sq,
                   table.stein_terms)
        name = "coeffs.csv" if len(cfg.A) == 1 else f"coeffs_{_slug(A)}.csv"
        write_csv(out / name, ["ell", "c_a", "c_ell", "ell_factorial_c_ell_sq", "stein_term"],
                  rows)
    return EXIT_OK


def cmd_verify(cfg, out: Path, args) -> int:
    res = harness.run_identity_suite()
    write_csv(out / "identities.csv", ["check", "passed"], res.checks)
    for name, witness in res.failures:
        print(f"FAILED {name}: witness {witness}", file=sys.stderr)
    return EXIT_OK if res.passed else EXIT_SUITE


def cmd_sigma(cfg: RunConfig, out: Path, args) -> int:
    rows = []
    for j in sorted(set(cfg.j_list)):
        s = sigma_j(cfg.wavelet, cfg.model, j)
        means = [transform.analytic_mean_u(A, s) for A in cfg.A]
        rows.append([j, s, s * s, *means])
    write_csv(out / "sigma.csv", ["j", "sigma", "sigma_sq", *[f"mean_u_{A.label}" for A in cfg.A]],
              rows)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out: Path, args) -> int:
    js = sorted(set(cfg.j_list))
    grid = gpsim.build_grid(cfg.model, cfg.wavelet, js, cfg.n_time, cfg.dt,
                            oversample=cfg.oversample)
    bundle = gpsim.synthesize(cfg.model, cfg.wavelet, grid, js, gpsim.path_seed(cfg.seed, 0),
                              workers=args.workers)
    lo, hi = bundle.valid
    rows = []
    for j in js:
        wj = bundle.w[j][lo:hi]
        rows.append([j, sigma_j(cfg.wavelet, cfg.model, j) ** 2, float(np.var(wj.real)),
                     float(np.var(wj.imag))])
    write_csv(out / "simulate.csv",
              ["j", "sigma_sq", "path_var_re_w", "path_var_im_w"], rows)
    write_csv(out / "grid.csv", ["n_time", "n_freq", "dt", "d_lambda", "lambda_cut", "total_mass"],
              [[grid.n_time, grid.n_freq, grid.dt, grid.d_lambda, grid.lambda_cut,
                grid.total_mass]])
    if args.dump_paths:
        t = bundle.times
        for j in js:
            write_csv(out / f"paths_j{j}.csv", ["t", "x", "re_w_j", "im_w_j"],
                      zip(t, bundle.x, bundle.w[j].real, bundle.w[j].imag))
    return EXIT_OK


def cmd_transform(cfg: RunConfig, out: Path, args) -> int:
    check_J_cap(cfg)
    rows = []
    for J in cfg.J_list:
        n = min(cfg.n_paths, args.paths)
        samples = harness.simulate_f_samples(cfg, J, n_paths=n, stream=1, workers=args.workers)
        for A in cfg.A:
            fs = samples[A.label]
            for m, (j, t) in enumerate(cfg.spec):
                mean_s = transform.analytic_mean_s(A, sigma_j(cfg.wavelet, cfg.model, j),
                                                   cfg.lowpass)
                for p in range(fs.values.shape[0]):
                    f = fs.values[p, m]
                    rows.append([A.label, J, j, t, p, mean_s + f * 2.0 ** (-J / 2), mean_s, f])
    write_csv(out / "transform.csv", ["A", "J", "j", "t", "path", "s", "mean_s", "f"], rows)
    return EXIT_OK


def cmd_covlimit(cfg: RunConfig, out: Path, args) -> int:
    rows = []
    for A in cfg.A:
        km = bounds.kappa_matrix(cfg.wavelet, cfg.model, A, cfg.j_list, cfg.K, lp=cfg.lowpass,
                                 t_list=cfg.t_list, rtol=cfg.tolerances["kappa_rtol"])
        d = len(cfg.j_list)
        for m in range(d):
            for n in range(d):
                rows.append([A.label, m, n, cfg.j_list[m], cfg.j_list[n], cfg.t_list[m],
                             cfg.t_list[n], km.kappa[m, n], km.residuals[m, n],
                             km.limit_cov[m, n]])
    write_csv(out / "covlimit.csv", ["A", "m", "n", "j_m", "j_n", "t_m", "t_n", "kappa",
                                     "residual", "limit_cov"], rows)
    return EXIT_OK


def cmd_rates(cfg: RunConfig, out: Path, args) -> int:
    rows = []
    for A in cfg.A:
        rc = bounds.rate_curve(A, cfg.J_list, cfg.eps)
        kr = bounds.kolmogorov_rate(A, cfg.J_list, cfg.eps, d=len(cfg.j_list))
        for i, J in enumerate(cfg.J_list):
            rows.append([J, rc.K[i], rc.tail_term[i], rc.stein_term[i], rc.envelope[i], A.label,
                         rc.regime, rc.finite_chaos, kr.envelope[i]])
    write_csv(out / "rates.csv", ["J", "K", "tail_term", "stein_term", "envelope", "A", "regime",
                                  "finite_chaos", "kol_envelope"], rows)
    return EXIT_OK


def cmd_clt(cfg: RunConfig, out: Path, args) -> int:
    check_J_cap(cfg)
    report = harness.run_clt_experiment(cfg, workers=args.workers, log=harness.print_progress)
    d = len(cfg.j_list)
    header = ["A", "J", "K", "n_paths", "status"]
    header += [f"mean_{m}" for m in range(d)] + [f"se_mean_{m}" for m in range(d)]
    header += [f"cov_{m}{n}" for m in range(d) for n in range(d)]
    header += [f"predicted_cov_{m}{n}" for m in range(d) for n in range(d)]
    header += ["d_kol", "d_kol_empirical_centering", "w1", "envelope", "kol_envelope",
               "n_invalid", "fitted_slope"]
    rows = []
    for r in report.rows:
        pc = (r.predicted_cov if r.predicted_cov is not None
              else np.full((d, d), np.nan)).ravel()
        rows.append([r.A, r.J, r.K, r.n_paths, r.status, *r.mean, *r.se_mean, *r.cov.ravel(),
                     *pc, r.d_kol, r.d_kol_empirical_centering, r.w1, r.envelope,
                     r.kol_envelope, r.n_invalid, report.slopes.get(r.A, math.nan)])
    write_csv(out / "report.csv", header, rows)
    if args.dump_paths:
        for J in cfg.J_list:
            samples = harness.simulate_f_samples(cfg, J, workers=args.workers)
            for A in cfg.A:
                name = (f"samples_J{J}.csv" if len(cfg.A) == 1
                        else f"samples_J{J}_{_slug(A)}.csv")
                write_csv(out / name, [f"F_{m}" for m in range(d)], samples[A.label].values)
    failed = [r for r in report.rows if r.status != "ok"]
    return EXIT_NUMERIC if failed else EXIT_OK


_HANDLERS = {
    "coeffs": cmd_coeffs, "verify-identities": cmd_verify, "sigma": cmd_sigma,
    "simulate": cmd_simulate, "transform": cmd_transform, "covlimit": cmd_covlimit,
    "rates": cmd_rates, "clt": cmd_clt,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavechaos", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, required=name != "verify-identities")
        sp.add_argument("--out", type=Path, default=None, help="output directory")
        sp.add_argument("--threads", type=int, default=None, help="FFT workers (0 = auto)")
        sp.add_argument("--dump-paths", action="store_true")
        if name == "transform":
            sp.add_argument("--j", type=int, action="append", default=None)
            sp.add_argument("--J", type=int, action="append", default=None)
            sp.add_argument("--A", type=str, default=None, help="power:<nu> or log")
            sp.add_argument("--lowpass", type=str, default=None)
            sp.add_argument("--paths", type=int, default=16)
    return p


def _apply_transform_flags(cfg: RunConfig, args) -> RunConfig:
    if args.j:
        cfg.j_list = tuple(args.j)
        cfg.t_list = tuple(0.0 for _ in args.j)
    if args.J:
        cfg.J_list = tuple(sorted(set(args.J)))
    if args.A:
        cfg.A = (Nonlinearity.parse(args.A),)
    if args.lowpass:
        cfg.lowpass = LowPass(args.lowpass)
    return cfg


def dispatch(command: str, cfg: RunConfig | None, args) -> int:
    """Run one subcommand; maps package errors to exit codes."""
    try:
        args.workers = threads_from(args.threads)
        if cfg is not None and command == "transform":
            cfg = _apply_transform_flags(cfg, args)
        out = Path(args.out) if args.out is not None else Path(cfg.output_dir if cfg else ".")
        return _HANDLERS[command](cfg, out, args)
    except (ConfigError, DomainError, SizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, WavechaosError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = None
    if args.config is not None:
        try:
            cfg = parse_config(args.config)
        except ConfigError as exc:
            for e in exc.errors:
                print(f"config error: {e}", file=sys.stderr)
            return EXIT_INVALID
    return dispatch(args.command, cfg, args)


if __name__ == "__main__":
    sys.exit(main())
