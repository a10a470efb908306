"""``thznet`` command line: sweep, capacity, simulate.

Exit codes: 0 success, 2 input error, 1 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .channel import (
    FrequencyBand,
    NoiseEnvironment,
    channel_capacity,
    coverage,
    noise_psd_curve,
    total_path_loss_db,
    usable_bandwidth,
)
from .constants import (
    DEFAULT_ELECTRONIC_NOISE_TEMPERATURE,
    DEFAULT_GRID_STEP,
    DEFAULT_LOSS_THRESHOLD_DB,
    DEFAULT_REFERENCE_TEMPERATURE,
)
from .errors import DomainError, MediumParseError, ScenarioError
from .medium import absorption_coefficient, load_medium

SWEEP_COLUMNS = {
    "pathloss": "path_loss_db",
    "noise-psd": "noise_psd_w_per_hz",
    "k": "absorption_coefficient_per_m",
}


class InputError(Exception):
    pass


def _band(text):
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise InputError(f"--band: expected LOW:HIGH in Hz, got {text!r}") from None
    try:
        return FrequencyBand(lo, hi)
    except DomainError as exc:
        raise InputError(f"--band: {exc}") from None


def _positive(name, value):
    if not value > 0:
        raise InputError(f"{name}: must be > 0, got {value!r}")
    return value


def _medium(path):
    try:
        return load_medium(path)
    except OSError as exc:
        raise InputError(f"--medium: cannot read {path!r}: {exc.strerror or exc}") from None
    except MediumParseError as exc:
        raise InputError(f"--medium: {path}: {exc}") from None


def _env(args):
    try:
        return NoiseEnvironment(args.t0, args.t_else)
    except DomainError as exc:
        raise InputError(f"--t0/--t-else: {exc}") from None


def cmd_sweep(args, out):
    medium = _medium(args.medium)
    band = _band(args.band)
    d = _positive("--distance", args.distance)
    if args.points < 1:
        raise InputError(f"--points: must be >= 1, got {args.points}")
    grid = np.linspace(band.f_low, band.f_high, args.points)
    if args.quantity == "pathloss":
        values = total_path_loss_db(medium, grid, d)
    elif args.quantity == "noise-psd":
        values = noise_psd_curve(_env(args), medium, grid, d)
    else:
        values = absorption_coefficient(medium, grid)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["frequency_hz", SWEEP_COLUMNS[args.quantity]])
    for f, v in zip(grid.tolist(), np.asarray(values).tolist()):
        w.writerow([repr(f), repr(v)])
    return 0


def capacity_document(args) -> dict:
    medium = _medium(args.medium)
    band = _band(args.band)
    d = _positive("--distance", args.distance)
    if args.tx_psd < 0:
        raise InputError(f"--tx-psd: must be >= 0, got {args.tx_psd!r}")
    step = _positive("--grid-step", args.grid_step)
    if step > band.width:
        raise InputError("--grid-step: must not exceed the band width")
    threshold = _positive("--loss-threshold-db", args.loss_threshold_db)
    env = _env(args)
    try:
        cap = channel_capacity(medium, env, band, d, args.tx_psd, step)
    except DomainError as exc:
        raise InputError(str(exc)) from None
    usable = usable_bandwidth(medium, band, d, threshold, step)
    return {
        "medium": medium.name,
        "band_hz": [band.f_low, band.f_high],
        "distance_m": d,
        "tx_psd_w_per_hz": args.tx_psd,
        "grid_step_hz": step,
        "loss_threshold_db": threshold,
        "capacity_bps": cap,
        "usable_bandwidth_hz": [[iv.f_low, iv.f_high] for iv in usable],
        "usable_fraction": coverage(usable, band),
    }


def cmd_capacity(args, out):
    doc = capacity_document(args)
    intervals = " ".join(f"[{lo!r},{hi!r}]" for lo, hi in doc["usable_bandwidth_hz"]) or "none"
    out.write(f"capacity_bps={doc['capacity_bps']!r} usable_bandwidth_hz={intervals}\n")
    text = json.dumps(doc, sort_keys=True)
    if args.json:
        Path(args.json).write_text(text + "\n")
    out.write(text + "\n")
    return 0


def cmd_simulate(args, out):
    from .scenario import load_scenario
    from .sim import prepare, run

    try:
        scenario = load_scenario(args.scenario)
    except OSError as exc:
        raise InputError(f"--scenario: cannot read {args.scenario!r}: {exc.strerror or exc}") from None
    topology = prepare(scenario)
    seed = scenario.seed if args.seed is None else args.seed
    report = run(scenario, seed, topology)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.to_json())
    (out_dir / "packets.csv").write_text(report.packets_csv())
    mean = "n/a" if report.latency_mean is None else f"{report.latency_mean:.6g}"
    out.write(
        f"generated={report.generated} delivered={report.delivered} dropped={report.dropped} "
        f"in_flight={report.in_flight} mean_latency_s={mean} out={out_dir}\n"
    )
    return 0


def _add_env(p):
    p.add_argument("--t0", type=float, default=DEFAULT_REFERENCE_TEMPERATURE,
                   help="molecular noise reference temperature, K")
    p.add_argument("--t-else", type=float, default=DEFAULT_ELECTRONIC_NOISE_TEMPERATURE,
                   help="other (receiver) noise temperature, K")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thznet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="evaluate a channel quantity on a uniform frequency grid (CSV)")
    p.add_argument("--medium", required=True, help="medium JSON file or builtin:<name>")
    p.add_argument("--band", required=True, help="LOW:HIGH in Hz")
    p.add_argument("--distance", required=True, type=float, help="path length, m")
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--quantity", choices=sorted(SWEEP_COLUMNS), default="pathloss")
    _add_env(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("capacity", help="sub-band Shannon capacity and usable bandwidth")
    p.add_argument("--medium", required=True)
    p.add_argument("--band", required=True)
    p.add_argument("--distance", required=True, type=float)
    p.add_argument("--tx-psd", required=True, type=float, help="flat transmit PSD, W/Hz")
    p.add_argument("--grid-step", type=float, default=DEFAULT_GRID_STEP, help="sub-band width, Hz")
    p.add_argument("--loss-threshold-db", type=float, default=DEFAULT_LOSS_THRESHOLD_DB)
    p.add_argument("--json", metavar="FILE", help="also write the JSON document to FILE")
    _add_env(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("simulate", help="run a scenario and write report.json + packets.csv")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, default=None, help="overrides the scenario seed (default 0)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except InputError as exc:
        err.write(f"thznet {args.command}: error: {exc}\n")
        return 2
    except ScenarioError as exc:
        err.write(f"thznet {args.command}: invalid scenario:\n")
        for v in exc.violations:
            err.write(f"  - {v}\n")
        return 2
    except Exception as exc:  # noqa: BLE001
        err.write(f"thznet {args.command}: internal error: {exc!r}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
