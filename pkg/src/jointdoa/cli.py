"""Command-line front end: ``jointdoa {simulate,estimate,crb,sweep}``.

Exit status: 0 success, 2 invalid configuration, 3 I/O failure,
4 numerical degeneracy.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import config as cfgmod
from .aml import aml_estimate
from .crb import crb_report
from .csi_io import format_csi, read_csi_raw
from .doa_only import doa_only_estimate
from .errors import DegeneracyError
from .montecarlo import realize, run_sweep
from .signal_model import CsiMatrix

EXIT_CONFIG, EXIT_IO, EXIT_DEGENERATE = 2, 3, 4

DELAY_NOTE = ("Delays are identifiable modulo 1/spacing_hz; estimates are "
              "reported in [0, 1/spacing_hz).")


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _load(args):
    try:
        return cfgmod.load(args.config, trials=getattr(args, "trials", None),
                           seed=getattr(args, "seed", None))
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config: {exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from None


def cmd_simulate(args):
    run = _load(args)
    _, csi, _ = realize(run.scenario())
    _write(args.out, format_csi(csi))


def _read_csi(args, run):
    try:
        M, grid, data = read_csi_raw(args.csi)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read CSI file: {exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_IO, f"malformed CSI file {args.csi}: {exc}") from None
    g = run.grid
    if M != run.geometry.M:
        raise CliError(EXIT_CONFIG, f"dimension mismatch: CSI file has M={M} sensors, "
                                    f"config array has M={run.geometry.M}")
    if grid.K != g.K:
        raise CliError(EXIT_CONFIG, f"dimension mismatch: CSI file has K={grid.K} "
                                    f"active bins, config grid has K={g.K}")
    if (grid.total_bins != g.total_bins or not np.array_equal(grid.active_bins, g.active_bins)
            or not np.isclose(grid.spacing_hz, g.spacing_hz)
            or not np.isclose(grid.carrier_hz, g.carrier_hz)):
        raise CliError(EXIT_CONFIG, "CSI file subcarrier layout differs from config grid")
    return CsiMatrix(data, run.geometry, run.grid, run.spectrum)


def _complex_list(z):
    return [[float(v.real), float(v.imag)] for v in np.atleast_1d(z)]


def cmd_estimate(args):
    run = _load(args)
    csi = _read_csi(args, run)
    out = {}
    for name in run.estimators:
        stage = "AML" if name == "aml" else "DOA-only"
        try:
            if name == "aml":
                res = aml_estimate(csi, run.aml)
                out["aml"] = {
                    "theta_deg": np.rad2deg(res.theta_hat).tolist(),
                    "tau_ns": (res.tau_hat * 1e9).tolist(),
                    "beta": _complex_list(res.beta_hat),
                    "residual": res.residual,
                    "iterations": res.iterations_used,
                }
            else:
                res = doa_only_estimate(csi, run.doa_only)
                out["doa_only"] = {
                    "theta_deg": np.rad2deg(res.theta_hat).tolist(),
                    "residual": res.objective,
                    "iterations": res.iterations_used,
                }
        except DegeneracyError as exc:
            raise CliError(EXIT_DEGENERATE, f"{stage} estimator: {exc}") from None
    print(json.dumps(out, indent=2))


def cmd_crb(args):
    run = _load(args)
    scen = run.scenario()
    paths, _, sigma2 = realize(scen)
    if run.noise is None:
        sigma2 = 1.0
    try:
        rep = crb_report(run.geometry, run.grid, run.spectrum, paths, sigma2)
    except DegeneracyError as exc:
        raise CliError(EXIT_DEGENERATE, str(exc)) from None
    deg = np.rad2deg(1.0)
    out = {
        "sigma2": rep.sigma2,
        "sqrt_crb_doa_joint_deg": (np.sqrt(np.diag(rep.crb_theta_joint)) * deg).tolist(),
        "sqrt_crb_doa_only_deg": (np.sqrt(np.diag(rep.crb_theta_only)) * deg).tolist(),
        "sqrt_crb_td_joint_ns": (np.sqrt(np.diag(rep.crb_tau_joint)) * 1e9).tolist(),
        "gap_min_eig": rep.gap_min_eig,
        "crb_theta_joint_rad2": rep.crb_theta_joint.tolist(),
        "crb_tau_joint_s2": rep.crb_tau_joint.tolist(),
        "crb_theta_only_rad2": rep.crb_theta_only.tolist(),
    }
    print(json.dumps(out, indent=2))


def cmd_sweep(args):
    run = _load(args)
    try:
        spec = run.sweep_spec()
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None

    def progress(i, n, value):
        print(f"[{i}/{n}] {spec.variable} done", file=sys.stderr, flush=True)

    try:
        result = run_sweep(spec, n_jobs=args.jobs, progress=progress)
    except DegeneracyError as exc:
        raise CliError(EXIT_DEGENERATE, str(exc)) from None
    _write(args.out, result.to_csv())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="jointdoa",
        description="Joint angle/delay estimation, DOA-only baseline and CRBs "
                    "for multipath CSI.",
        epilog=DELAY_NOTE)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize a CSI matrix file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate paths from a CSI file",
                       epilog=DELAY_NOTE)
    p.add_argument("--config", required=True)
    p.add_argument("--csi", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("crb", help="print joint and DOA-only bounds")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_crb)

    p = sub.add_parser("sweep", help="Monte Carlo sweep to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trials", None) is not None and args.trials < 1:
        print("error: --trials must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
