"""Command-line interface for the self-Kerr chain library.

All inputs are dimensionless in units of ``gamma``.  The ``--gamma`` flag only
rescales printed quantities for presentation (frequencies and bandwidths are
multiplied by it, kernel values divided); every computation runs at
``gamma = 1``.

Exit codes: 0 success, 2 usage or input error, 3 numerical non-convergence.

Output is deterministic: identical invocations produce byte-identical output.
CSV uses one header row and decomposes complex values into ``_re``/``_im``
column pairs; JSON wraps an echo of the configuration and a ``results`` array
of row objects with the same fields as the CSV columns.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import optfit, oracle, transport
from .kernel import (
    INFINITE,
    ChainParams,
    is_infinite_chi,
    kernel_cross_kerr,
    kernel_infinite_chi,
    kernel_n_closed,
    kernel_n_sum,
    kernel_one_site,
    kernel_single_cavity_reference,
    kernel_two_site,
    ideal_phase,
)

_FINITE_KERNELS = {
    "one_site": kernel_one_site,
    "two_site": kernel_two_site,
    "n_sum": kernel_n_sum,
    "n_closed": kernel_n_closed,
    "cross_kerr": kernel_cross_kerr,
    "single_cavity_reference": kernel_single_cavity_reference,
}

_THREADS_ENV = "SELFKERR_THREADS"


def _parse_chi(text: str) -> float:
    if text.strip().lower() in {"inf", "infinity"}:
        return INFINITE
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid chi value {text!r}") from None
    if math.isnan(value) or value < 0:
        raise argparse.ArgumentTypeError(f"chi must be nonnegative or 'inf', got {text}")
    return value


def _parse_sites(text: str) -> list[int]:
    """Site counts: '3', '3,6,25', '4..20', or a comma mix of those."""
    counts: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            lo_text, hi_text = token.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty site range {token!r}")
            counts.extend(range(lo, hi + 1))
        else:
            counts.append(int(token))
    if not counts:
        raise argparse.ArgumentTypeError(f"no site counts in {text!r}")
    if min(counts) < 1:
        raise argparse.ArgumentTypeError("site counts must be >= 1")
    return sorted(set(counts))


def _parse_quadruple(text: str) -> tuple[float, float, float, float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"expected 'omega1,omega2,nu1,nu2', got {text!r}"
        )
    return tuple(float(p) for p in parts)


def _parse_pair(text: str) -> tuple[float, float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return float(parts[0]), float(parts[1])


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _json_value(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "inf" if math.isinf(value) else value
    return value


def _emit(args, command: str, config: dict, header: list[str], rows: list[tuple]) -> None:
    if args.format == "json":
        payload = {
            "command": command,
            "config": {k: _json_value(v) for k, v in config.items()},
            "results": [
                {k: _json_value(v) for k, v in zip(header, row)} for row in rows
            ],
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = [",".join(header)]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _chain_params(args) -> ChainParams:
    return ChainParams(
        gamma=1.0, delta=args.delta, chi=args.chi, n_sites=args.sites
    )


def _chi_echo(chi: float):
    return "inf" if is_infinite_chi(chi) else chi


def _make_grid(args, params, packet) -> transport.FrequencyGrid:
    if args.half_width is not None:
        return transport.FrequencyGrid(
            center=params.delta + packet.center_detuning,
            half_width=args.half_width,
            n_points=args.points,
        )
    return transport.default_grid(params, packet, n_points=args.points)


def _cmd_kernel_eval(args) -> int:
    params = ChainParams(gamma=1.0, delta=args.delta, chi=args.chi, n_sites=args.sites)
    scale = args.gamma
    rows = []
    for w1, w2, v1, v2 in args.freqs:
        if is_infinite_chi(args.chi):
            value = kernel_infinite_chi(params, w1, w2, v1, v2, which=args.which)
        else:
            value = _FINITE_KERNELS[args.which](params, w1, w2, v1, v2)
        value = complex(value)
        rows.append(
            (w1 * scale, w2 * scale, v1 * scale, v2 * scale,
             value.real / scale, value.imag / scale)
        )
    config = {
        "sites": args.sites, "chi": _chi_echo(args.chi), "delta": args.delta,
        "which": args.which, "gamma": args.gamma,
    }
    header = ["omega1", "omega2", "nu1", "nu2", "value_re", "value_im"]
    _emit(args, "kernel-eval", config, header, rows)
    return 0


def _cmd_transport(args) -> int:
    params = _chain_params(args)
    packet = transport.GaussianPacket(bandwidth=args.sigma, center_detuning=args.omega0)
    grid = _make_grid(args, params, packet)
    scale = args.gamma
    rows = []
    nu = grid.points()
    if args.what in ("both", "single"):
        single = transport.propagate_single(params, packet, grid)
        for k in range(grid.n_points):
            rows.append(
                ("single", nu[k] * scale, "",
                 single.samples[k].real, single.samples[k].imag)
            )
    if args.what in ("both", "two"):
        two = transport.propagate_two(params, packet, grid)
        for i in range(grid.n_points):
            for j in range(grid.n_points):
                rows.append(
                    ("two", nu[i] * scale, nu[j] * scale,
                     two.samples[i, j].real, two.samples[i, j].imag)
                )
    config = {
        "sites": args.sites, "chi": _chi_echo(args.chi), "delta": args.delta,
        "sigma": args.sigma * scale, "omega0": args.omega0, "gamma": args.gamma,
        "half_width": grid.half_width * scale, "points": grid.n_points,
        "what": args.what,
    }
    header = ["kind", "nu1", "nu2", "value_re", "value_im"]
    _emit(args, "transport", config, header, rows)
    return 0


def _cmd_fidelity(args) -> int:
    params = _chain_params(args)
    packet = transport.GaussianPacket(bandwidth=args.sigma, center_detuning=args.omega0)
    grid = _make_grid(args, params, packet)
    single = transport.propagate_single(params, packet, grid)
    two = transport.propagate_two(params, packet, grid)
    ov = transport.overlap(single, two)
    fidelity = transport.avg_gate_fidelity(ov, args.phi)
    norm = transport.two_photon_norm(two)
    config = {
        "sites": args.sites, "chi": _chi_echo(args.chi), "delta": args.delta,
        "sigma": args.sigma * args.gamma, "omega0": args.omega0, "phi": args.phi,
        "gamma": args.gamma, "half_width": grid.half_width * args.gamma,
        "points": grid.n_points,
    }
    header = [
        "n_sites", "sigma", "phi", "overlap_re", "overlap_im",
        "fidelity", "two_photon_norm",
    ]
    rows = [
        (args.sites, args.sigma * args.gamma, args.phi,
         ov.value.real, ov.value.imag, fidelity, norm)
    ]
    _emit(args, "fidelity", config, header, rows)
    return 0


def _cmd_optimize(args) -> int:
    params = _chain_params(args)
    try:
        sigma_opt, f_max = optfit.optimize_bandwidth(
            params, phi=args.phi, bracket=args.bracket,
            sigma_tol=args.sigma_tol, n_points=args.points,
        )
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    config = {
        "sites": args.sites, "chi": _chi_echo(args.chi), "delta": args.delta,
        "phi": args.phi, "gamma": args.gamma, "points": args.points,
    }
    header = ["n_sites", "sigma_opt", "f_max"]
    rows = [(args.sites, sigma_opt * args.gamma, f_max)]
    _emit(args, "optimize", config, header, rows)
    return 0


def _default_threads() -> int:
    env = os.environ.get(_THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _cmd_sweep(args) -> int:
    params = ChainParams(gamma=1.0, delta=args.delta, chi=args.chi, n_sites=1)
    threads = args.threads if args.threads is not None else _default_threads()
    records = optfit.sweep_sites(
        params, args.sites, phi=args.phi, workers=threads, n_points=args.points
    )
    config = {
        "sites": ",".join(str(n) for n in args.sites),
        "chi": _chi_echo(args.chi), "delta": args.delta, "phi": args.phi,
        "gamma": args.gamma, "threads": threads, "points": args.points,
    }
    header = ["n_sites", "sigma_opt", "f_max"]
    rows = [(r.n_sites, r.sigma_opt * args.gamma, r.f_max) for r in records]
    _emit(args, "sweep", config, header, rows)
    done = {r.n_sites for r in records}
    missing = [n for n in args.sites if n not in done]
    if missing:
        print(
            "error: bandwidth optimization did not converge for sites "
            + ",".join(str(n) for n in missing),
            file=sys.stderr,
        )
        return 3
    return 0


def _cmd_fit(args) -> int:
    try:
        with open(args.input, newline="") as handle:
            reader = csv.DictReader(handle)
            table = list(reader)
    except OSError as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return 2
    points = []
    try:
        for row in table:
            n = int(row["n_sites"])
            x = optfit.cascade_length(n) if args.abscissa == "cascade" else n
            if args.column == "one_minus_f":
                y = 1.0 - float(row["f_max"])
            else:
                y = float(row["sigma_opt"])
            points.append((x, y))
    except (KeyError, ValueError) as exc:
        print(f"error: malformed sweep table {args.input}: {exc}", file=sys.stderr)
        return 2
    try:
        fit = optfit.fit_power_law(points)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    config = {
        "input": args.input, "column": args.column, "abscissa": args.abscissa,
    }
    header = ["column", "abscissa", "prefactor", "exponent", "residual"]
    rows = [(args.column, args.abscissa, fit.prefactor, fit.exponent, fit.residual)]
    _emit(args, "fit", config, header, rows)
    return 0


def _cmd_oracle_check(args) -> int:
    packet = transport.GaussianPacket(bandwidth=args.sigma, center_detuning=args.omega0)
    config_obj = oracle.SimConfig(
        dt=args.dt,
        n_freq=args.n_freq,
        freq_half_width=args.window,
        tolerance=args.tolerance,
        check_convergence=True,
        total_time=args.total_time,
    )
    rows = []
    failures = []
    for n in args.sites:
        params = ChainParams(gamma=1.0, delta=args.delta, chi=args.chi, n_sites=n)
        equations = oracle.build_chain_equations(params)
        result = oracle.numeric_two_photon(params, equations, packet, config_obj)
        max_rel = oracle.compare_to_analytic(params, packet, result, n_quad=args.quad)
        rows.append(
            (n, max_rel, result.max_error_estimate, result.converged,
             result.convergence_order, result.norm_drift,
             result.output_photon_number)
        )
        if not result.converged:
            failures.append(f"sites={n}: convergence flag failed (tolerance {args.tolerance:g})")
        elif max_rel > args.tolerance:
            failures.append(
                f"sites={n}: max relative error {max_rel:.3e} exceeds tolerance {args.tolerance:g}"
            )
    config = {
        "sites": ",".join(str(n) for n in args.sites),
        "chi": _chi_echo(args.chi), "delta": args.delta,
        "sigma": args.sigma, "omega0": args.omega0, "dt": args.dt,
        "tolerance": args.tolerance, "n_freq": args.n_freq,
    }
    header = [
        "n_sites", "max_rel_error", "max_error_estimate", "converged",
        "convergence_order", "norm_drift", "output_photon_number",
    ]
    _emit(args, "oracle-check", config, header, rows)
    if failures:
        for line in failures:
            print(f"error: {line}", file=sys.stderr)
        return 3
    return 0


def _cmd_continuum_check(args) -> int:
    packet = transport.GaussianPacket(bandwidth=args.sigma, center_detuning=0.0)
    target = np.exp(-1j * ideal_phase(args.chi, 1.0))
    rows = []
    for n in args.sites:
        params = ChainParams(gamma=1.0, delta=args.delta, chi=args.chi, n_sites=n)
        grid = transport.default_grid(params, packet, n_points=args.points)
        single = transport.propagate_single(params, packet, grid)
        two = transport.propagate_two(params, packet, grid)
        ov = transport.overlap(single, two).value
        rows.append(
            (n, ov.real, ov.imag, target.real, target.imag, abs(ov - target))
        )
    config = {
        "sites": ",".join(str(n) for n in args.sites),
        "chi": _chi_echo(args.chi), "delta": args.delta, "sigma": args.sigma,
        "points": args.points, "gamma": args.gamma,
    }
    header = [
        "n_sites", "overlap_re", "overlap_im",
        "target_re", "target_im", "abs_error",
    ]
    _emit(args, "continuum-check", config, header, rows)
    return 0


def _add_output_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format (default csv)")
    parser.add_argument("--output", default=None, metavar="PATH",
                        help="write output to PATH instead of stdout")
    parser.add_argument("--gamma", type=float, default=1.0,
                        help="decay rate used to rescale printed values (default 1)")


def _add_chain_options(
    parser: argparse.ArgumentParser,
    sites_list: bool = False,
    chi_default: float = 1.0,
) -> None:
    if sites_list:
        parser.add_argument("--sites", type=_parse_sites, required=True,
                            help="chain lengths, e.g. '3', '3,6,25' or '4..20'")
    else:
        parser.add_argument("--sites", type=int, required=True,
                            help="number of interaction sites")
    parser.add_argument("--chi", type=_parse_chi, default=chi_default,
                        help="cross-Kerr strength in units of gamma, or 'inf' "
                             f"(default {_chi_echo(chi_default)})")
    parser.add_argument("--delta", type=float, default=0.0,
                        help="cavity resonance frequency (default 0)")


def _add_packet_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sigma", type=float, required=True,
                        help="packet bandwidth in units of gamma")
    parser.add_argument("--omega0", type=float, default=0.0,
                        help="carrier detuning from resonance (default 0)")


def _add_grid_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--half-width", type=float, default=None,
                        help="frequency grid half width (default max(8*sigma, 4/(2*sites)))")
    parser.add_argument("--points", type=int, default=512,
                        help="frequency grid points (default 512)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selfkerr",
        description="Two-photon scattering and conditional-phase fidelity "
                    "for a mirror-folded chain of cross-Kerr sites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel-eval", help="evaluate a closed-form kernel")
    _add_chain_options(p)
    p.add_argument("--which", choices=sorted(_FINITE_KERNELS), default="n_closed",
                   help="kernel variant (default n_closed)")
    p.add_argument("--freqs", type=_parse_quadruple, action="append", required=True,
                   metavar="W1,W2,N1,N2", help="frequency quadruple; repeatable")
    _add_output_options(p)
    p.set_defaults(func=_cmd_kernel_eval)

    p = sub.add_parser("transport", help="propagate a Gaussian packet")
    _add_chain_options(p)
    _add_packet_options(p)
    _add_grid_options(p)
    p.add_argument("--what", choices=("both", "single", "two"), default="both",
                   help="which output spectra to emit (default both)")
    _add_output_options(p)
    p.set_defaults(func=_cmd_transport)

    p = sub.add_parser("fidelity", help="conditional-phase gate fidelity at fixed bandwidth")
    _add_chain_options(p, chi_default=INFINITE)
    _add_packet_options(p)
    _add_grid_options(p)
    p.add_argument("--phi", type=float, default=math.pi,
                   help="target conditional phase (default pi)")
    _add_output_options(p)
    p.set_defaults(func=_cmd_fidelity)

    p = sub.add_parser("optimize", help="optimize the packet bandwidth")
    _add_chain_options(p, chi_default=INFINITE)
    p.add_argument("--phi", type=float, default=math.pi,
                   help="target conditional phase (default pi)")
    p.add_argument("--bracket", type=_parse_pair, default=None, metavar="LO,HI",
                   help="sigma search interval (default 1e-3,0.5)")
    p.add_argument("--sigma-tol", type=float, default=None,
                   help="sigma convergence tolerance (default 1e-4)")
    p.add_argument("--points", type=int, default=512,
                   help="frequency grid points per evaluation (default 512)")
    _add_output_options(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("sweep", help="optimize the bandwidth for several chain lengths")
    _add_chain_options(p, sites_list=True, chi_default=INFINITE)
    p.add_argument("--phi", type=float, default=math.pi,
                   help="target conditional phase (default pi)")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker processes (default: ${_THREADS_ENV} or CPU count)")
    p.add_argument("--points", type=int, default=512,
                   help="frequency grid points per evaluation (default 512)")
    _add_output_options(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("fit", help="fit a power law to a sweep table")
    p.add_argument("--input", required=True, help="CSV produced by 'selfkerr sweep'")
    p.add_argument("--column", choices=("one_minus_f", "sigma_opt"),
                   default="one_minus_f", help="quantity to fit (default one_minus_f)")
    p.add_argument("--abscissa", choices=("cascade", "sites"), default="cascade",
                   help="fit against cascade length 2*sites (default) or sites")
    _add_output_options(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("oracle-check",
                       help="validate closed-form kernels against the time-domain simulation")
    _add_chain_options(p, sites_list=True)
    _add_packet_options(p)
    p.add_argument("--dt", type=float, default=0.01,
                   help="coarsest collision step (default 0.01)")
    p.add_argument("--tolerance", type=float, default=1e-3,
                   help="relative tolerance for samples and convergence (default 1e-3)")
    p.add_argument("--n-freq", type=int, default=25,
                   help="output frequency samples per axis (default 25)")
    p.add_argument("--window", type=float, default=None,
                   help="output frequency half width (default 3*sigma)")
    p.add_argument("--total-time", type=float, default=None,
                   help="simulation window (default 10/sigma + 30)")
    p.add_argument("--quad", type=int, default=4001,
                   help="quadrature points for the analytic reference (default 4001)")
    _add_output_options(p)
    p.set_defaults(func=_cmd_oracle_check)

    p = sub.add_parser("continuum-check",
                       help="compare overlaps against the continuum phase prediction")
    _add_chain_options(p, sites_list=True)
    p.add_argument("--sigma", type=float, default=0.005,
                   help="packet bandwidth (default 0.005)")
    p.add_argument("--points", type=int, default=512,
                   help="frequency grid points (default 512)")
    _add_output_options(p)
    p.set_defaults(func=_cmd_continuum_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
