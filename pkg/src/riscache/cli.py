"""Command-line front end: ``riscache run`` and ``riscache sweep``."""

import argparse
import logging
import sys

from .exceptions import ConfigError
from .harness import emit_csv, emit_dump, format_csv, parse_config, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="riscache",
        description="Monte Carlo simulator for RIS-aided edge caching.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "evaluate a single operating point"),
                            ("sweep", "sweep one axis of the scenario")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key = value experiment file")
        p.add_argument("--seed", type=int, help="64-bit seed (overrides config)")
        p.add_argument("--trials", type=int, help="realizations per point (overrides config)")
        p.add_argument("--out", help="CSV output path (stdout if omitted)")
        p.add_argument("--dump-trials", metavar="PATH", help="write per-trial values here")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        spec = parse_config(text, overrides={"seed": args.seed, "trials": args.trials})
        if args.command == "sweep" and spec.sweep_axis == "none":
            raise ConfigError("sweep requires sweep_axis and sweep_values", "sweep_axis")
        if args.command == "run" and spec.sweep_axis != "none":
            raise ConfigError("run evaluates a single point; drop sweep_axis or use sweep",
                              "sweep_axis")
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1", "jobs")
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        dump = [] if args.dump_trials else None
        rows = run_experiment(spec, jobs=args.jobs, dump=dump)
        if args.out:
            emit_csv(rows, args.out)
        else:
            sys.stdout.write(format_csv(rows))
        if dump is not None:
            emit_dump(dump, args.dump_trials)
    except Exception as exc:  # noqa: BLE001 - reported through the exit code
        logging.getLogger("riscache").exception("run failed")
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
