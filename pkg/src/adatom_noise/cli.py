"""Command-line front end: ``adatom-noise <subcommand> --scenario FILE``."""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .scenario import SCANNABLE, ScenarioError, StageError, run_scenario, scan, validate

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

_STAGES = {
    "run": None,
    "boundstates": ["boundstates"],
    "spectrum": ["spectrum"],
    "heating": ["trap"],
    "diffusion": ["diffusion"],
    "workfunction": ["electrostatics"],
}

_HELP = {
    "run": "execute every section of the scenario",
    "boundstates": "solve the vibrational levels and dump wavefunctions",
    "spectrum": "dipole fluctuation spectrum at each scenario temperature",
    "heating": "field noise and ion heating rate for the trap section",
    "diffusion": "thermal and tunneling hop rates, D, migration temperature",
    "workfunction": "work function and surface dipole from slab potential grids",
    "scan": "re-evaluate summary outputs over one parameter",
    "validate": "check a scenario and list every problem",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, metavar="PATH", help="scenario JSON file")
    common.add_argument("--out", metavar="DIR", help="output directory (default: scenario output_dir)")
    common.add_argument("--seed", type=int, metavar="N", help="override the scenario seed")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")

    parser = argparse.ArgumentParser(prog="adatom-noise", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in _HELP.items():
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        if name == "scan":
            p.add_argument("--parameter", required=True, choices=sorted(SCANNABLE))
            p.add_argument("--values", required=True, nargs="+", type=float)
            p.add_argument("--unit", help="unit of --values (default depends on the parameter)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            problems = validate(args.scenario)
            for p in problems:
                print(p, file=sys.stderr)
            if problems:
                return EXIT_INVALID
            print(f"{args.scenario}: ok")
            return EXIT_OK
        if args.command == "scan":
            rows = scan(args.scenario, args.parameter, args.values, args.unit,
                        out_dir=args.out or ".", fmt=args.format)
            print(json.dumps(rows, indent=2))
            return EXIT_OK
        report = run_scenario(args.scenario, args.out, args.seed, args.format, _STAGES[args.command])
    except ScenarioError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except StageError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
