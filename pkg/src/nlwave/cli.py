"""Batch entry point.

    nlwave run --config cfg.json [--out DIR] [--until T]
    nlwave validate --config cfg.json
    nlwave presets

Exit status of run: 0 completed, 2 blow-up detected, 3 Picard stalled,
1 configuration or IO error.  validate parses the config and runs the
hypothesis checks only, exiting 0 iff everything passes.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .energy import EnergyError
from .runner import hypothesis_report, run_scenario
from .snapshot import SnapshotError
from .solver import BLOWUP, COMPLETED, STALLED, SolverError
from .symbols import SymbolError, build_symbol_table

_EXIT = {COMPLETED: 0, BLOWUP: 2, STALLED: 3}

_PRESETS_TEXT = """\
symbol presets
  classical        a_hat = 1, A_hat = m^2 I, g_hat = (1+|xi|^2)^(-r/2)
  bessel-a         a_hat = (1+|xi|^2)^(-1), A_hat = m^2 I, g_hat = (1+|xi|^2)^(-r/2)
  thm51-diagonal   a_hat = 1, A_hat = diag(c_j 2^(sigma(j+1)) (1+|xi|^2)^(-1)), g_hat = (1+|xi|^2)^(-r/2)

nonlinearity presets
  power            f(u) = c u^m componentwise, m in {2, 3}
  none             f = 0 (linear run)

initial-data profiles
  gaussian         bump of height delta centered mid-domain, zero velocity
  plane-wave       traveling cosine at an integer mode, velocity matched so linear norms stay constant
  random-smooth    seeded band-limited draw, |k| <= M/4, combined data size exactly delta

hypothesis checks
  kernel-decay       g_hat(xi) <= C_g (1+|xi|^2)^(-r/2) at every mode
  derivative-bound   ||[D A_hat](xi) eta^(-1)(xi)|| <= M_bound (centered differences)
  global-existence   G(sigma) >= -k sigma^2 sampled on [-sigma_max, sigma_max]
"""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlwave",
        description="Pseudospectral batch solver for nonlocal wave equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write its artifacts")
    run_p.add_argument("--config", required=True, help="path to a JSON run configuration")
    run_p.add_argument("--out", default=None, help="output directory (overrides the config)")
    run_p.add_argument(
        "--until", type=float, default=None, help="final time (overrides the config)"
    )

    val_p = sub.add_parser("validate", help="parse the config and run hypothesis checks only")
    val_p.add_argument("--config", required=True, help="path to a JSON run configuration")

    sub.add_parser("presets", help="list symbol presets, nonlinearities, and data profiles")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "presets":
        print(_PRESETS_TEXT, end="")
        return 0
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            table = build_symbol_table(cfg.grid, cfg.symbols)
            text, passed = hypothesis_report(cfg, table)
            print(text, end="")
            return 0 if passed else 1
        arts = run_scenario(cfg, out_dir=args.out, until=args.until)
        status = arts.status
        print(f"outcome: {status.outcome}")
        print(f"t_reached: {status.t_reached!r}")
        if status.T_max is not None:
            print(f"T_max: {status.T_max!r}")
        print(f"windows: {len(status.windows)}")
        print(f"checks: {'pass' if arts.checks_passed else 'fail'}")
        print(f"csv: {arts.csv_path}")
        return _EXIT[status.outcome]
    except (ConfigError, SymbolError, SolverError, EnergyError, SnapshotError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
