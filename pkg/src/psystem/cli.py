"""Command-line driver: ``psystem <subcommand> [--config PATH] [--out DIR] ...``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import RunConfig, load_config, parse_config
from .errors import ParseError, ValidationError

SUBCOMMANDS = ("simulate", "characteristics", "riccati", "energy", "hamiltonian", "sweep", "verify")

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INTERNAL = 4


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="sectioned key = value run configuration")
    common.add_argument("--scenario", metavar="NAME", help="use a shipped scenario (H1..H6) as the config")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    common.add_argument("--seed", type=int, metavar="N", help="seed for randomised sampling")
    common.add_argument("--workers", type=int, default=1, metavar="N", help="worker processes for sweep")
    common.add_argument("--quiet", action="store_true", help="print nothing but errors")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration value (repeatable)")

    parser = argparse.ArgumentParser(prog="psystem", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="evolve initial data and write frames")
    sub.add_parser("characteristics", parents=[common], help="trace and classify characteristics")
    sub.add_parser("riccati", parents=[common], help="Riccati data and blow-up predictions")
    sub.add_parser("energy", parents=[common], help="energy concavity monitor on elliptic-band data")
    sub.add_parser("hamiltonian", parents=[common],
                   help="particle flow, F drift, (m,n) orbits and the reduction check")
    sub.add_parser("sweep", parents=[common], help="one run per value of [sweep] parameter")
    sub.add_parser("verify", parents=[common], help="run the acceptance checks end to end")
    return parser


def _load(args) -> RunConfig:
    if args.config and args.scenario:
        raise ValidationError(["--config and --scenario are mutually exclusive"])
    if args.config:
        cfg = load_config(args.config)
    elif args.scenario:
        from .scenarios import scenario_config
        try:
            cfg = parse_config(scenario_config(args.scenario))
        except KeyError:
            raise ValidationError([f"unknown scenario {args.scenario!r}"]) from None
    else:
        cfg = RunConfig()
    overrides = [("run.seed", str(args.seed))] if args.seed is not None else []
    problems = []
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep or "." not in key:
            problems.append(f"--set {item!r}: expected SECTION.KEY=VALUE")
            continue
        overrides.append((key.strip(), val.strip()))
    if problems:
        raise ValidationError(problems)
    if overrides:
        d = cfg.to_dict()
        for key, val in overrides:
            sec, name = key.split(".", 1)
            if sec not in d:
                problems.append(f"--set {key}: unknown section [{sec}]")
                continue
            d[sec][name] = val
        if problems:
            raise ValidationError(problems)
        cfg = RunConfig.from_dict(d)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    say = (lambda *a: None) if args.quiet else print
    try:
        if args.command == "verify":
            from .acceptance import run_all
            results = run_all(say)
            failed = [r for r in results if not r.passed]
            say(f"{len(results) - len(failed)}/{len(results)} checks passed")
            return EXIT_CHECKS_FAILED if failed else EXIT_OK
        cfg = _load(args)
        if args.command == "sweep":
            from .orchestrate import sweep
            outcome = sweep(cfg, args.out, max(1, args.workers))
        else:
            from .orchestrate import orchestrate
            outcome = orchestrate(cfg, args.command, args.out)
    except (ParseError, ValidationError) as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        where = getattr(exc, "filename", None)
        print(f"io error: {exc}" + (f" ({where})" if where and str(where) not in str(exc) else ""),
              file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001 - surface anything unexpected as an internal error
        logging.getLogger("psystem").exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    for line in outcome.summary:
        say(line)
    say(f"wrote {len(outcome.files)} files to {outcome.out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
