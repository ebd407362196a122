"""Command-line interface.

Subcommands: ``solve`` (ground state only), ``kernel`` (channel-by-channel
nullity analysis), ``identity`` (integral-identity battery), ``decay``
(wide-grid far-field fit), ``sweep`` (the full pipeline over a point list),
and ``verify`` (the acceptance suite).  Flags override config-file values;
the exit code is 0 exactly when every requested verdict passes.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from emdenlab.acceptance import verify_suite
from emdenlab.hyperbola import pair_from_p
from emdenlab.pipeline import (
    RunConfig,
    analyze_channels,
    analyze_decay,
    analyze_identities,
    decay_verdict,
    emit_plot_data,
    expected_nullity_table,
    load_config,
    obtain_profile,
    run,
    _pair_payload,
    _write_json,
)

__all__ = ["main"]


def _add_point_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--N", type=int, required=True, help="space dimension (>= 3)")
    parser.add_argument("--p", type=float, required=True, help="first exponent on the critical hyperbola")


def _add_run_flags(parser: argparse.ArgumentParser, rmax_default: Optional[float]) -> None:
    parser.add_argument("--ell-max", type=int, default=None, help="largest spherical-harmonic channel")
    parser.add_argument("--rmax", type=float, default=rmax_default, help="outer integration radius")
    parser.add_argument("--tol", type=float, default=None, help="ODE solver relative tolerance")
    parser.add_argument("--out", metavar="DIR", default=None, help="output directory (default: runs)")
    parser.add_argument(
        "--cache",
        choices=("reuse", "recompute"),
        default=None,
        help="reuse persisted profiles or recompute them",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emdenlab",
        description="Numerical verification lab for the critical Lane-Emden system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="compute (or load) the radial ground state")
    _add_point_flags(p_solve)
    _add_run_flags(p_solve, rmax_default=None)

    p_kernel = sub.add_parser("kernel", help="kernel census of channels 0..ell_max by two methods")
    _add_point_flags(p_kernel)
    _add_run_flags(p_kernel, rmax_default=None)

    p_identity = sub.add_parser("identity", help="integral-identity battery on the standard solutions")
    _add_point_flags(p_identity)
    _add_run_flags(p_identity, rmax_default=None)

    p_decay = sub.add_parser("decay", help="far-field decay-law fit on a wide grid")
    _add_point_flags(p_decay)
    _add_run_flags(p_decay, rmax_default=1000.0)

    p_sweep = sub.add_parser("sweep", help="full pipeline over the configured point list")
    p_sweep.add_argument("--config", metavar="FILE", default=None, help="TOML run configuration")
    _add_run_flags(p_sweep, rmax_default=None)
    p_sweep.add_argument("--workers", type=int, default=None, help="worker pool size")

    p_verify = sub.add_parser("verify", help="run the acceptance criteria and report verdicts")
    p_verify.add_argument("--config", metavar="FILE", default=None, help="TOML run configuration")
    _add_run_flags(p_verify, rmax_default=None)
    p_verify.add_argument(
        "--tighten",
        type=float,
        default=1.0,
        help="divide the solver tolerances by this factor (stability check)",
    )

    return parser


def _config_from_args(args: argparse.Namespace, points=()) -> RunConfig:
    overrides = {
        "points": points if points else None,
        "ell_max": getattr(args, "ell_max", None),
        "r_max": getattr(args, "rmax", None),
        "ode_rtol": getattr(args, "tol", None),
        "out_dir": getattr(args, "out", None),
        "cache": getattr(args, "cache", None),
        "workers": getattr(args, "workers", None),
    }
    return load_config(getattr(args, "config", None), overrides)


def _point_setup(args: argparse.Namespace):
    config = _config_from_args(args, points=((args.N, args.p),))
    pair = pair_from_p(args.N, args.p)
    point_dir = Path(config.out_dir) / pair.label()
    point_dir.mkdir(parents=True, exist_ok=True)
    profile, status = obtain_profile(pair, config, point_dir)
    return config, pair, point_dir, profile, status


def _cmd_solve(args: argparse.Namespace) -> int:
    config, pair, point_dir, profile, status = _point_setup(args)
    decay = analyze_decay(profile)
    print(
        f"{pair.label()}: gamma_star={profile.gamma_star:.12g} ({status}), "
        f"grid [{config.r_start:g}, {config.r_max:g}] x {profile.grid.r.size} nodes"
    )
    if decay is not None and "error" not in decay:
        print(
            f"  decay fit: u-exponent {decay['u_exponent']:.4f} "
            f"(law {decay['u_law_exponent']:g}{', log-corrected' if decay['log_flag'] else ''}), "
            f"v-exponent {decay['v_exponent']:.4f} (law {decay['v_law_exponent']:g})"
        )
    print(f"  profile: {point_dir / ('gs_' + pair.label() + '.csv')}")
    return 0


def _cmd_kernel(args: argparse.Namespace) -> int:
    config, pair, point_dir, profile, status = _point_setup(args)
    records, eigen_tables = analyze_channels(profile, config)
    expected = list(expected_nullity_table(config.ell_max))
    table = [rec["nullity_shooting"] for rec in records]
    agree = all(rec["methods_agree"] for rec in records)
    ok = agree and table == expected
    payload = {
        "format": "kernel-v1",
        "pair": _pair_payload(pair),
        "ell_max": config.ell_max,
        "expected_nullities": expected,
        "channels": records,
        "all_ok": ok,
    }
    path = _write_json(point_dir / f"kernel_{pair.label()}.json", payload)
    for rec in records:
        print(
            f"ell={rec['ell']}: nullity shooting={rec['nullity_shooting']} "
            f"spectral={rec['nullity_spectral']} agree={rec['methods_agree']}"
        )
    print(f"{pair.label()}: table {table} vs expected {expected}; report {path}")
    return 0 if ok else 1


def _cmd_identity(args: argparse.Namespace) -> int:
    config, pair, point_dir, profile, status = _point_setup(args)
    entries, ok = analyze_identities(profile, config)
    payload = {
        "format": "identity-v1",
        "pair": _pair_payload(pair),
        "entries": entries,
        "all_ok": ok,
    }
    path = _write_json(point_dir / f"identity_{pair.label()}.json", payload)
    for entry in entries:
        extra = ""
        if "channel1_exactness" in entry:
            extra = f", exactness {entry['channel1_exactness']:.3g}"
        print(
            f"{entry['tag']}: max residual {max(entry['poho_residuals']):.3g}{extra} "
            f"-> {'pass' if entry['passed'] else 'FAIL'}"
        )
    print(f"{pair.label()}: identities {'pass' if ok else 'FAIL'}; report {path}")
    return 0 if ok else 1


def _cmd_decay(args: argparse.Namespace) -> int:
    config, pair, point_dir, profile, status = _point_setup(args)
    decay = analyze_decay(profile)
    ok = decay_verdict(decay)
    payload = {
        "format": "decay-v1",
        "pair": _pair_payload(pair),
        "r_max": config.r_max,
        "fit": decay,
        "verdict_ok": ok,
    }
    path = _write_json(point_dir / f"decay_{pair.label()}.json", payload)
    if decay is None:
        print(f"{pair.label()}: grid too short for a decay fit (r_max {config.r_max:g} < 50)")
    elif "error" in decay:
        print(f"{pair.label()}: decay fit failed: {decay['error']}")
    else:
        print(
            f"{pair.label()}: u-exponent {decay['u_exponent']:.4f} (law {decay['u_law_exponent']:g}"
            f"{', log-corrected' if decay['log_flag'] else ''}), "
            f"v-exponent {decay['v_exponent']:.4f} (law {decay['v_law_exponent']:g}), "
            f"drift {decay['drift']:.3g}"
        )
    print(f"verdict {'pass' if ok else 'FAIL'}; report {path}")
    return 0 if ok else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if not config.points:
        print("sweep: no points configured (set [run].points in the config file)", file=sys.stderr)
        return 2
    manifest = run(config)
    emit_plot_data(manifest)
    for rec in manifest.points:
        if rec.status == "failed":
            print(f"{rec.label}: FAILED ({rec.error})")
        else:
            print(
                f"{rec.label}: {rec.status}, nullities {list(rec.nullity_table)}, "
                f"verdict {'pass' if rec.verdict_ok else 'FAIL'}"
            )
    print(f"manifest: {Path(config.out_dir) / 'manifest.json'}; all_ok={manifest.all_ok}")
    return 0 if manifest.all_ok else 1


def _cmd_verify(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    summary = verify_suite(config, tighten=args.tighten)
    print(f"report: {summary.report_path}; all_passed={summary.all_passed}")
    return 0 if summary.all_passed else 1


_COMMANDS = {
    "solve": _cmd_solve,
    "kernel": _cmd_kernel,
    "identity": _cmd_identity,
    "decay": _cmd_decay,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"emdenlab {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
