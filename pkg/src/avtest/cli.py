"""Command-line entry point: generate, run, mt, report.

Every flag can also come from an environment variable named ``AVTEST_``
plus the flag name in upper case (``--jobs`` -> ``AVTEST_JOBS``). Flags win
over environment variables, which win over the config file.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .campaign import (
    OUTCOMES_FILE, CampaignConfig, ConfigError, build_suite, load_records,
    parse_classes, report_from_records, run_campaign, run_mt_campaign, write_report,
)
from .planners import available_planners
from .testgen import suite_to_json

ENV_PREFIX = "AVTEST_"


def _env(name: str) -> Optional[str]:
    v = os.environ.get(ENV_PREFIX + name.upper())
    return v if v else None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="campaign config JSON")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--class", dest="class_", metavar="{A|B|C|D|all}",
                   help="scenario class(es) to use")
    p.add_argument("--planner", help=f"ego planner ({', '.join(available_planners())})")
    p.add_argument("--jobs", type=int, metavar="N", help="worker processes")
    p.add_argument("--format", choices=("csv", "json"), help="report table format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avtest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write the test suite as JSON without running it")
    _add_common(g)
    g.add_argument("--with-follow-ups", action="store_true",
                   help="append MT follow-ups for the config's MT-enabled classes")

    r = sub.add_parser("run", help="run the EP campaign (plus MT follow-ups where enabled)")
    _add_common(r)

    m = sub.add_parser("mt", help="run daytime sources of one class and their MT follow-ups")
    _add_common(m)

    rep = sub.add_parser("report", help="re-aggregate reports from stored outcome JSONL")
    _add_common(rep)
    rep.add_argument("inputs", nargs="*", metavar="JSONL",
                     help="outcome files (default: <out>/outcomes.jsonl)")
    return parser


def resolve_config(args: argparse.Namespace) -> CampaignConfig:
    """Merge config file, environment variables and flags, in rising priority."""
    def pick(flag: str, attr: str):
        v = getattr(args, attr, None)
        return v if v is not None else _env(flag)

    path = pick("config", "config")
    config = CampaignConfig.load(path) if path else CampaignConfig()
    changes = {}
    if (v := pick("out", "out")) is not None:
        changes["output_dir"] = str(v)
    if (v := pick("class", "class_")) is not None:
        changes["classes"] = parse_classes(v)
    if (v := pick("planner", "planner")) is not None:
        changes["planner"] = str(v)
    if (v := pick("jobs", "jobs")) is not None:
        try:
            changes["jobs"] = int(v)
        except ValueError:
            raise ConfigError(f"jobs must be an integer, got {v!r}") from None
    if (v := pick("format", "format")) is not None:
        changes["format"] = str(v)
    return dataclasses.replace(config, **changes)


def _cmd_generate(config: CampaignConfig, args) -> int:
    mt = config.mt_enabled if args.with_follow_ups else ()
    cases = build_suite(config.classes, [c for c in mt if c in config.classes])
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "suite.json").write_text(suite_to_json(cases) + "\n")
    print(f"{len(cases)} cases written to {out / 'suite.json'}")
    return 0


def _print_summary(report) -> None:
    for c in [*report.per_class.values(), report.total]:
        print(f"{c.class_id:>5}  {c.failed_cases:>4}/{c.total_cases:<4} failed  "
              f"({c.failure_rate_pct:.1f}%)")
    for cid, rels in report.mt_summary.items():
        for m in rels.values():
            print(f"{cid} {m.relation}: source {m.source_failures}, follow-up "
                  f"{m.follow_up_failures}, violations {m.violations}/{m.pairs}")


def _cmd_run(config: CampaignConfig, args) -> int:
    report = run_campaign(config)
    _print_summary(report)
    return 0


def _cmd_mt(config: CampaignConfig, args) -> int:
    classes = config.classes
    if len(classes) != 1:
        classes = tuple(c for c in config.mt_enabled if c in classes)
    if len(classes) != 1:
        raise ConfigError("mt runs over exactly one class; pass --class")
    report = run_mt_campaign(config, classes[0])
    _print_summary(report)
    return 0


def _cmd_report(config: CampaignConfig, args) -> int:
    out = Path(config.output_dir)
    inputs = args.inputs or [out / OUTCOMES_FILE]
    report = report_from_records(load_records(inputs))
    write_report(report, out, config.format)
    _print_summary(report)
    return 0


_COMMANDS = {"generate": _cmd_generate, "run": _cmd_run, "mt": _cmd_mt, "report": _cmd_report}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        return _COMMANDS[args.command](config, args)
    except (ConfigError, KeyError, OSError, ValueError, RuntimeError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"avtest: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
