"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from . import dynamics, em_core, modes
from .config import ConfigError, ScanConfig, load_config, preset, preset_names, FIGURES
from .green import rate_density, total_breakdown
from .materials import MaterialError, StackOrderError, eta, permeability, permittivity, validate_stack
from .scan import figure_preset, run_scan

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _config(args) -> ScanConfig:
    if args.config and args.preset:
        raise ConfigError(["give either --config or --preset, not both"])
    if args.config:
        return load_config(args.config)
    if args.preset:
        return preset(args.preset)
    raise ConfigError(["a --config or --preset is required"])


def _stack(args, config):
    if getattr(args, "d3", None) is not None:
        return config.stack(d3_prime=args.d3), config.omega
    return config.stack(), config.omega


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def cmd_materials(args):
    config = _config(args)
    stack, omega = _stack(args, config)
    report = validate_stack(stack, omega)
    layers = {}
    for name, m in zip(("layer1", "layer2", "layer3"), stack.layers):
        layers[name] = {"eps": _c(permittivity(m, omega)), "mu": _c(permeability(m, omega)),
                        "eta": _c(eta(m, omega)), "model": m.to_dict()}
    _emit(json.dumps({"omega": omega, "layers": layers, "ordering_ok": report.ok,
                      "violations": report.violations}, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_em_eval(args):
    config = _config(args)
    stack, omega = _stack(args, config)
    _emit(json.dumps(em_core.evaluate(stack.media(omega), args.k, args.pol), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_modes(args):
    config = _config(args)
    stack, omega = _stack(args, config)
    media = stack.media(omega).real_part()
    rows = [(r.pol, r.cls, r.m, r.k, r.residue_x, r.residue_z) for r in modes.find_all_roots(media)]
    _emit(_csv_text(("pol", "class", "m", "k", "residue_x", "residue_z"), rows), args.out)
    return EXIT_OK


def cmd_density(args):
    config = _config(args)
    stack, omega = _stack(args, config)
    k = np.linspace(args.kmin, args.kmax, args.points)
    dens = rate_density(stack, omega, k)
    rows = zip(dens.k, dens.dGamma_x_p, dens.dGamma_x_s, dens.dGamma_z_p)
    _emit(_csv_text(("k", "dGx_p", "dGx_s", "dGz_p"), rows), args.out)
    return EXIT_OK


def cmd_rates(args):
    config = _config(args)
    stack, omega = _stack(args, config)
    b = total_breakdown(stack, omega, rtol=config.rtol, threshold=config.residue_threshold)
    payload = {"d3_prime": stack.d3_prime, "z0_prime": stack.z0_prime, "omega": omega,
               **b.flat(), "error_estimate": b.error_estimate, "methods": b.methods,
               "comparison": b.comparison, "converged": b.converged}
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK if b.converged else EXIT_NUMERIC


def cmd_scan(args):
    config = _config(args)
    if config.sweep is None:
        raise ConfigError(["sweep: required for the scan command"])
    out = args.out or config.output or f"{config.name}.csv"
    result = run_scan(config, out, jobs=args.jobs)
    print(f"wrote {result.csv_path} ({len(result.rows)} rows) and {result.meta_path}")
    return EXIT_OK if result.ok else EXIT_NUMERIC


def cmd_dynamics(args):
    params = dynamics.SGCParams(args.gamma1, args.gamma2, args.kappa, args.kappa)
    rho0 = dynamics.initial_state(args.rho0, params)
    traj = dynamics.evolve(rho0, params, args.t_end, args.dt, samples=args.samples,
                           check_halving=not args.no_halving_check)
    p = traj.populations
    rows = zip(traj.t, p[:, 0], p[:, 1], p[:, 2], traj.coherence.real, traj.coherence.imag)
    _emit(_csv_text(("t", "rho11", "rho22", "rho33", "re_rho12", "im_rho12"), rows), args.out)
    return EXIT_OK


def cmd_figure(args):
    if not args.preset:
        raise ConfigError(["figure needs --preset NAME"])
    results = figure_preset(args.preset, args.out or args.preset, jobs=args.jobs or 1)
    for r in results:
        print(f"wrote {r.csv_path}")
        for peak in r.peaks:
            print(f"  peak near fold {peak['fold']:.12g} ({peak['pol']}): Gg = {peak['Gg']:.6g}, "
                  f"Gtot = {peak['Gtot']:.6g}, kappa = {peak['kappa']:.6f}")
    return EXIT_OK if all(r.ok for r in results) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scan/stack config")
    common.add_argument("--preset", help=f"figure preset ({', '.join(preset_names())})")
    common.add_argument("--out", help="output path (default: stdout, or <name>.csv for scans)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps")
    common.add_argument("--d3", type=float, help="override d3' for single-point commands")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nriguide", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("materials", parents=[common], help="eps, mu, eta of every layer").set_defaults(func=cmd_materials)
    p = sub.add_parser("em-eval", parents=[common], help="kernel quantities at one k as JSON")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--pol", choices=em_core.POLARIZATIONS, default="p")
    p.set_defaults(func=cmd_em_eval)
    sub.add_parser("modes", parents=[common], help="guided and surface roots as CSV").set_defaults(func=cmd_modes)
    p = sub.add_parser("density", parents=[common], help="dGamma/dk over a k grid as CSV")
    p.add_argument("--kmin", type=float, default=0.01)
    p.add_argument("--kmax", type=float, default=3.0)
    p.add_argument("--points", type=int, default=500)
    p.set_defaults(func=cmd_density)
    sub.add_parser("rates", parents=[common], help="full rate breakdown as JSON").set_defaults(func=cmd_rates)
    sub.add_parser("scan", parents=[common], help="run a sweep into CSV + metadata").set_defaults(func=cmd_scan)
    p = sub.add_parser("dynamics", parents=[common], help="master-equation trajectory as CSV")
    p.add_argument("--gamma1", type=float, default=1.0)
    p.add_argument("--gamma2", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--rho0", choices=("1", "2", "sym", "antisym", "dark"), default="1")
    p.add_argument("--t-end", type=float, default=5.0)
    p.add_argument("--dt", type=float, default=0.001)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--no-halving-check", action="store_true")
    p.set_defaults(func=cmd_dynamics)
    p = sub.add_parser("figure", parents=[common], help=f"run a figure preset ({', '.join(FIGURES)})")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, MaterialError, StackOrderError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, dynamics.StepSizeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
