"""Command-line entry point.

    uurlab <kind> [--config FILE] [--seed N] [--out DIR] [--no-figures]
    uurlab fit-csv FILE... [--out DIR]

Exit codes: 0 when every check passes, 1 when a relation is violated beyond
tolerance (or a check fails), 2 for configuration errors.
"""

import argparse
import json
import sys

from .config import KINDS, ConfigError, ingest_config, spec_from_dict
from .run import run_experiment


def build_parser():
    parser = argparse.ArgumentParser(prog="uurlab", description="Unitary and overlap uncertainty relation lab.")
    parser.add_argument("kind", choices=KINDS, help="experiment to run")
    parser.add_argument("files", nargs="*", help="scan CSV files (fit-csv only)")
    parser.add_argument("--config", help="JSON config file; defaults apply when omitted")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return parser


def resolve_spec(args):
    if args.config:
        spec = ingest_config(args.config)
        if spec.kind != args.kind:
            raise ConfigError(f"config kind {spec.kind!r} does not match command {args.kind!r}", "kind")
        if args.files:
            data = spec.to_dict()
            data["parameters"]["files"] = list(args.files)
            spec = spec_from_dict(data)
    else:
        data = {"kind": args.kind}
        if args.files:
            data["parameters"] = {"files": list(args.files)}
        spec = spec_from_dict(data)
    if args.files and args.kind != "fit-csv":
        raise ConfigError("positional files are only accepted by fit-csv", "files")
    if args.seed is not None and args.seed < 0:
        raise ConfigError("--seed must be non-negative", "seed")
    return spec.with_overrides(seed=args.seed, output_dir=args.out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = resolve_spec(args)
        bundle = run_experiment(spec)
    except ConfigError as exc:
        print(f"uurlab: config error: {exc}", file=sys.stderr)
        return 2
    out = bundle.write(figures=not args.no_figures)
    for line in bundle.results.get("lines", []):
        print(line)
    for check in bundle.checks:
        if "number" not in check:
            print(f"[{'PASS' if check['passed'] else 'FAIL'}] {check['name']}")
    for report in bundle.violations:
        print(f"violation: {report.name}: lhs={report.lhs:.6g} rhs={report.rhs:.6g} slack={report.slack:.3g}")
    summary = bundle.summary
    print(json.dumps({"output_dir": str(out), "tables": summary["tables"], "figures": summary["figures"],
                      "exit_code": summary["exit_code"]}))
    return bundle.exit_code


if __name__ == "__main__":
    sys.exit(main())
