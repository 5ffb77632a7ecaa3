"""``parapam noise|solve|converge|diagnose|proptest [--config FILE] [--set key=value]...``

Exit codes: 0 success, 1 a property suite failed, 2 validation error,
3 numerical blow-up in a single-run command.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness, proptest
from .config import ConfigError, load_config
from .solver import BlowUpError

log = logging.getLogger("parapam")

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_BLOWUP = 0, 1, 2, 3


def cmd_noise(cfg) -> int:
    rows = []
    for rs in harness.run_lattice(cfg, harness.write_noise):
        rows.extend(rs)
    path = harness.write_csv(Path(cfg.out) / "renorm.csv", harness.RENORM_COLUMNS, rows)
    print(f"wrote {3 * len(rows)} fields and {path}")
    return EXIT_OK


def cmd_solve(cfg) -> int:
    try:
        traj, manifest, _ = harness.solve_single(cfg)
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    path = harness.write_trajectory(Path(cfg.out) / "trajectory", traj, manifest)
    print(f"wrote {len(traj)} snapshots to {path}")
    return EXIT_OK


def cmd_converge(cfg) -> int:
    if len(cfg.eps) < 3:
        raise ConfigError("eps: converge needs at least 3 values")
    sweeps = harness.run_lattice(cfg, harness.sweep_seed)
    conv = [r for s in sweeps for r in s.converge_rows]
    diag = [r for s in sweeps for r in s.diagnostics_rows]
    out = Path(cfg.out)
    harness.write_csv(out / "converge.csv", harness.CONVERGE_COLUMNS, conv)
    harness.write_csv(out / "diagnostics.csv", harness.DIAGNOSTICS_COLUMNS, diag)
    for r in conv:
        print(f"seed={r['seed']} eps={r['eps']:.4g} D_sup={r['D_sup']:.4g} "
              f"D_parab={r['D_parab']:.4g} gap_naive={r['gap_naive']:.4g} {r['status']}")
    return EXIT_OK


def cmd_diagnose(cfg) -> int:
    if cfg.trajectory:
        traj, manifest = harness.read_trajectory(cfg.trajectory)
        enh = harness.enhanced_for(cfg, manifest["seed"], manifest["eps"])
        rows = [harness.diagnostics_row(cfg, manifest["seed"], manifest["eps"], traj, enh)]
    else:
        rows = [r for rs in harness.run_lattice(cfg, harness.diagnose_seed) for r in rs]
    path = harness.write_csv(Path(cfg.out) / "diagnostics.csv", harness.DIAGNOSTICS_COLUMNS, rows)
    for r in rows:
        print(f"seed={r['seed']} eps={r['eps']:.4g} weighted_sharp={r['weighted_sharp']:.4g} "
              f"raw_u_2beta={r['raw_u_2beta']:.4g} sharp_over_raw={r['sharp_over_raw']:.4g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_proptest(cfg, suite: str) -> int:
    try:
        res = proptest.run_suite(suite)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    path = harness.write_csv(Path(cfg.out) / f"proptest_{suite}.csv", ["case", "value", "threshold", "pass"],
                             res.rows)
    for r in res.rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {suite} {r['case']}: {r['value']:.6g} "
              f"(threshold {r['threshold']:.6g})")
    print(f"{suite}: {'PASS' if res.passed else 'FAIL'} ({path})")
    return EXIT_OK if res.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parapam", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("noise", "solve", "converge", "diagnose", "proptest"):
        sp = sub.add_parser(name)
        if name == "proptest":
            sp.add_argument("suite", help=", ".join(sorted(proptest.SUITES)))
        sp.add_argument("--config", type=Path, help="key = value configuration file")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.overrides)
        if args.command == "proptest":
            return cmd_proptest(cfg, args.suite)
        return {"noise": cmd_noise, "solve": cmd_solve, "converge": cmd_converge,
                "diagnose": cmd_diagnose}[args.command](cfg)
    except ConfigError as exc:
        print(f"parapam: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"parapam: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
