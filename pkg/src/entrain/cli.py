"""Command-line interface.

Subcommands: measure, characterize, outcomes, analyze, replicate. Every
subcommand accepts --config <file> (a flat JSON document whose keys
mirror the run configuration); explicit flags override file values.
Exit codes: 0 success, 1 validation error, 2 data error, 3 internal.
"""

from __future__ import annotations

import argparse
import logging
import sys
import traceback

from . import __version__
from .errors import ConfigError, DataError
from .pipeline import (
    build_config,
    load_config_file,
    run_characterize,
    run_measure,
    run_outcomes,
    run_pipeline,
    run_replicate,
)

_OVERRIDE_KEYS = (
    "transcripts",
    "roster",
    "survey",
    "lexicon",
    "interjections",
    "output_dir",
    "intervals",
    "alpha",
    "entry_p",
    "formats",
    "jobs",
    "scale_min",
    "scale_max",
)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; route them through
    # the package's validation exit code instead
    def error(self, message):
        raise ConfigError(message)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat JSON config file; flags override its values")
    sub.add_argument("--output-dir", help="directory for output artifacts")
    sub.add_argument("--jobs", type=int, help="worker processes for per-team computation")


def _add_measure_inputs(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--transcripts", help="IPU transcript CSV")
    sub.add_argument("--lexicon", help="category dictionary (.dic); default: bundled or $ENTRAIN_LEXICON")
    sub.add_argument("--interjections", help="interjection list file (one token per line)")
    sub.add_argument("--intervals", type=int, help="temporal interval count (default 10)")


def _add_survey_inputs(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--survey", help="post-game survey CSV")
    sub.add_argument("--scale-min", type=float, help="survey scale lower bound (default 1)")
    sub.add_argument("--scale-max", type=float, help="survey scale upper bound (default 5)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entrain", description="Multi-party linguistic style entrainment toolkit.")
    parser.add_argument("--version", action="version", version=f"entrain {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    measure = sub.add_parser("measure", help="Compute the eight per-team convergence measures.")
    _add_common(measure)
    _add_measure_inputs(measure)

    characterize = sub.add_parser("characterize", help="Compute team characteristics from a roster.")
    _add_common(characterize)
    characterize.add_argument("--roster", help="roster CSV (speaker_id, team_id, gender, age, ethnicity)")

    outcomes = sub.add_parser("outcomes", help="Compute perceived team social outcomes from surveys.")
    _add_common(outcomes)
    _add_survey_inputs(outcomes)

    for name, text in (
        ("analyze", "Run the configured analyses over the joined team table."),
        ("replicate", "Run the fixed correlation/ANOVA/HLR battery end to end."),
    ):
        cmd = sub.add_parser(name, help=text)
        _add_common(cmd)
        _add_measure_inputs(cmd)
        cmd.add_argument("--roster", help="roster CSV")
        _add_survey_inputs(cmd)
        cmd.add_argument("--alpha", type=float, help="significance level (default 0.05)")
        cmd.add_argument("--entry-p", type=float, help="stepwise entry threshold (default 0.05)")
        cmd.add_argument("--formats", help="comma-separated output formats from {csv,json}")

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        values = {}
        if args.config:
            values.update(load_config_file(args.config))
        for key in _OVERRIDE_KEYS:
            flag = getattr(args, key, None)
            if flag is not None:
                values[key] = flag
        config = build_config(values)
        if args.command == "measure":
            return run_measure(config)
        if args.command == "characterize":
            return run_characterize(config)
        if args.command == "outcomes":
            return run_outcomes(config)
        if args.command == "analyze":
            return run_pipeline(config, command="analyze")
        return run_replicate(config)
    except ConfigError as exc:
        print(f"entrain: validation error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"entrain: data error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # pragma: no cover - defensive
        traceback.print_exc()
        print(f"entrain: internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
