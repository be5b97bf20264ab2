"""Command-line front end.

Subcommands: ``sweep`` (NMSE vs SNR), ``surface`` (likelihood scan),
``entropy`` (kernel-entropy curves), ``slices`` (space-time kernel
grids), ``learn`` (one-shot kernel fit report) and ``kernel-eval``
(print the kernel matrix at given arguments).  Exit codes: 0 success,
1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .channel import add_awgn
from .config import ConfigError, load_config
from .experiments import (
    build_geometry,
    _draw_channel,
    run_entropy_sweep,
    run_kernel_slices,
    run_snr_sweep,
    run_surface_scan,
)
from .kernel import SPEED_OF_LIGHT, KernelParams, em_kernel
from .learning import estimate_azimuth, learn_kernel
from .output import emit_csv, emit_svg_plot


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are configuration errors
        raise ConfigError(message)


def _vec3(text):
    parts = [float(t) for t in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected three comma-separated numbers, got {text!r}")
    return np.array(parts)


def _build_parser() -> _Parser:
    parser = _Parser(prog="emgpr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="override one config key")

    for name in ("sweep", "surface", "entropy", "slices", "learn"):
        p = sub.add_parser(name)
        common(p)

    p = sub.add_parser("kernel-eval", help="print the kernel matrix at given arguments")
    p.add_argument("--r", type=_vec3, default=np.zeros(3), help="displacement [m], x,y,z")
    p.add_argument("--dt", type=float, default=0.0, help="time difference [s]")
    p.add_argument("--mu", type=_vec3, default=np.zeros(3), help="concentration vector")
    p.add_argument("--velocity", type=_vec3, default=np.zeros(3), help="velocity [m/s]")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--f-c", type=float, default=3.5e9, help="carrier frequency [Hz]")
    return parser


def _outputs(cfg, stem):
    os.makedirs(cfg.output.directory, exist_ok=True)
    base = os.path.join(cfg.output.directory, f"{cfg.output.basename}_{stem}")
    return base + ".csv", base + ".svg"


def _run(args) -> int:
    if args.command == "kernel-eval":
        params = KernelParams(mu=args.mu, sigma2=args.sigma2, velocity=args.velocity,
                              k0=2 * np.pi * args.f_c / SPEED_OF_LIGHT)
        K = em_kernel(args.r, args.dt, np.zeros(3), 0.0, params)
        for i in range(3):
            print("  ".join(f"{K[i, j].real:+.9e}{K[i, j].imag:+.9e}j" for j in range(3)))
        return 0

    cfg = load_config(args.config, args.overrides)
    if args.command == "sweep":
        result = run_snr_sweep(cfg)
        csv_path, svg_path = _outputs(cfg, "sweep")
        emit_csv(result, csv_path)
        if cfg.output.svg:
            emit_svg_plot(result, svg_path)
        for row in result.rows:
            print(f"{row['estimator']:>12s}  snr={row['snr_db']:+6.1f} dB  "
                  f"nmse={row['nmse_mean']:.6g} (stderr {row['nmse_stderr']:.2g}, "
                  f"{row['trials']} trials)")
        print(f"wrote {csv_path}")
        return 0
    if args.command == "surface":
        result = run_surface_scan(cfg)
        csv_path, svg_path = _outputs(cfg, "surface")
        emit_csv(result, csv_path)
        if cfg.output.svg:
            emit_svg_plot(result, svg_path)
        print(f"wrote {csv_path} ({len(result.rows)} cells)")
        return 0
    if args.command == "entropy":
        result = run_entropy_sweep(cfg)
        csv_path, svg_path = _outputs(cfg, "entropy")
        emit_csv(result, csv_path)
        if cfg.output.svg:
            emit_svg_plot(result, svg_path)
        print(f"wrote {csv_path}")
        return 0
    if args.command == "slices":
        result = run_kernel_slices(cfg)
        csv_path, svg_path = _outputs(cfg, "slices")
        written = emit_csv(result, csv_path)
        if cfg.output.svg:
            emit_svg_plot(result, svg_path)
        for p in written:
            print(f"wrote {p}")
        return 0
    if args.command == "learn":
        geom = build_geometry(cfg)
        h = _draw_channel(cfg, geom, [cfg.sweep.seed, 0])
        y, noise_var = add_awgn(h, cfg.sweep.snr_db[0], seed=[cfg.sweep.seed, 1])
        report = learn_kernel(geom.sample_set(), y, noise_var, S=cfg.learning.s,
                              n_iter=cfg.learning.n_iter, k0=geom.wavenumber)
        print(f"sigma2 = {report.sigma2:.6g}")
        print(f"objective: start {report.objective_trace[0]:.6g} -> "
              f"end {report.objective_trace[-1]:.6g} "
              f"({report.n_iterations} sweeps, converged={report.converged})")
        print(f"steps accepted/rejected: {report.accepted_steps}/{report.rejected_steps}")
        for s, (mu, w) in enumerate(zip(report.mus, report.weights)):
            line = (f"sub-kernel {s}: w = {w:.4f}  mu = "
                    f"[{mu[0]:+.4g}, {mu[1]:+.4g}, {mu[2]:+.4g}]  |mu| = "
                    f"{np.linalg.norm(mu):.4g}")
            try:
                line += f"  azimuth = {estimate_azimuth(mu):+.2f} deg"
            except ValueError:
                pass
            print(line)
        return 0
    raise ConfigError(f"unknown command {args.command!r}")  # pragma: no cover


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _run(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 1
    except (np.linalg.LinAlgError, FloatingPointError, OSError, ValueError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
