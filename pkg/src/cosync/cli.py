"""Command line front end.

Subcommands:

* ``run``       — single scenario runs, one line per distance
* ``grid``      — distance × channel sweep, CSV on stdout or ``--out``
* ``compare``   — masterless/adaptive vs master/fixed at each distance
* ``calibrate`` — fit link profiles against target tables

Exit codes: 0 success, 1 configuration or usage problem, 2 internal
consistency failure (clock divergence and friends).
"""

import argparse
import os
import sys
from dataclasses import replace

from .calibrate import calibrate, load_targets
from .errors import ConfigError, CosyncError, InvalidInputError, InvariantError
from .gridrun import (DEFAULT_SEED_COUNT, compare_grid, format_csv, run_grid,
                      seed_sequence, write_csv)
from .orchestrator import run_scenario
from .profiles import emit_profile, load_profile
from .scenario import ARCHITECTURES, CHANNELS, TRANSPORTS, load_config

SEED_ENV = "COSYNC_SEED"


class _Parser(argparse.ArgumentParser):
    """argparse's usage errors exit 2; remap them onto the config-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(1)


def _parse_distances(text):
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError("--distances expects comma separated numbers, got %r"
                          % (text,))
    if not values:
        raise ConfigError("--distances is empty")
    return values


def _resolve_seed(cli_seed, config):
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError("%s must be an integer, got %r" % (SEED_ENV, env))
    return config.seed


def _load(args):
    config = load_config(args.config)
    if getattr(args, "channel", None):
        config = replace(config, channel=args.channel)
    if getattr(args, "transport", None):
        config = replace(config, transport=args.transport)
    if getattr(args, "arch", None):
        config = replace(config, architecture=args.arch)
    if getattr(args, "distances", None):
        config = replace(config, distances=_parse_distances(args.distances))
    seed = _resolve_seed(getattr(args, "seed", None), config)
    config = replace(config, seed=seed)
    profile = load_profile(args.profile) if getattr(args, "profile", None) else None
    return config, profile


def _emit(lines, out_path):
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_run(args):
    config, profile = _load(args)
    lines = []
    for distance in config.distances:
        report = run_scenario(config, distance, config.seed, profile=profile)
        lines.append(
            "distance_m=%g channel=%s transport=%s architecture=%s seed=%d "
            "loss=%.6g pd_a_s=%.6g delivered_delay_s=%.6g windows=%d "
            "retransmissions=%d"
            % (report.distance_m, report.channel, report.transport,
               report.architecture, report.seed, report.loss_probability,
               report.pd_a_s, report.delivered_delay_mean_s, report.windows,
               report.retransmissions))
    _emit(lines, args.out)
    return 0


def _cmd_grid(args):
    config, profile = _load(args)
    channels = (config.channel,) if args.channel else None
    cells = run_grid(config, seed_count=args.seed_count, profile=profile,
                     channels=channels)
    if args.out:
        write_csv(cells, args.out)
    else:
        sys.stdout.write(format_csv(cells))
    return 0


def _cmd_compare(args):
    config, profile = _load(args)
    seeds = seed_sequence(config.seed, args.seed_count)
    lines = []
    for comparison in compare_grid(config, seeds=seeds, profile=profile):
        lines.append(
            "distance_m=%g masterless_loss=%.6g master_loss=%.6g "
            "loss_gap_pp=%.6g masterless_delay_s=%.6g master_delay_s=%.6g "
            "delay_ratio=%.6g"
            % (comparison.distance_m, comparison.masterless_loss,
               comparison.master_loss, 100.0 * comparison.loss_gap,
               comparison.masterless_delay_s, comparison.master_delay_s,
               comparison.delay_ratio))
    _emit(lines, args.out)
    return 0


def _cmd_calibrate(args):
    if len(args.config) != len(args.targets):
        raise ConfigError("calibrate needs one --targets per --config "
                          "(got %d configs, %d targets)"
                          % (len(args.config), len(args.targets)))
    pairs = []
    for config_path, target_path in zip(args.config, args.targets):
        config = load_config(config_path)
        seed = _resolve_seed(args.seed, config)
        pairs.append((replace(config, seed=seed), load_targets(target_path)))
    profile, reports = calibrate(pairs, name=args.name,
                                 seed_count=args.seed_count)
    for report in reports:
        print("[%s] worst loss error %.3g pp, worst delay error %.3g s, "
              "within tolerance: %s"
              % (report.link_class, report.worst_loss_pp, report.worst_delay_s,
                 "yes" if report.within_tolerance else "NO"))
        for check in report.checks:
            print("  d=%-5g %-4s target (%.6g s, %g%%)  simulated "
                  "(%.6g s, %.4g%%)"
                  % (check.target.distance_m, check.target.channel,
                     check.target.pd_a_s, check.target.l_p_pct,
                     check.simulated_pd_a_s, check.simulated_l_p_pct))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(emit_profile(profile))
        print("profile written to %s" % args.out)
    if not all(report.within_tolerance for report in reports):
        return 1
    return 0


def build_parser():
    parser = _Parser(prog="cosync",
                     description="co-simulation of physics and packet "
                                 "transport with adaptive window sync")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, distances=True):
        p.add_argument("--config", required=True, help="scenario config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override config seed (env %s also works)" % SEED_ENV)
        p.add_argument("--out", default=None, help="write output to this file")
        p.add_argument("--profile", default=None,
                       help="profile name or path overriding the config")
        if distances:
            p.add_argument("--distances", default=None,
                           help="comma separated distances in metres")
        p.add_argument("--arch", choices=ARCHITECTURES, default=None,
                       help="override pub-sub architecture")
        p.add_argument("--transport", choices=TRANSPORTS, default=None,
                       help="override transport")
        p.add_argument("--channel", choices=CHANNELS, default=None,
                       help="override channel condition")

    p_run = sub.add_parser("run", help="run scenarios and print summaries")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_grid = sub.add_parser("grid", help="sweep distances × channels to CSV")
    common(p_grid)
    p_grid.add_argument("--seed-count", type=int, default=DEFAULT_SEED_COUNT,
                        help="seeds per cell (default %d)" % DEFAULT_SEED_COUNT)
    p_grid.set_defaults(func=_cmd_grid)

    p_cmp = sub.add_parser("compare",
                           help="masterless/adaptive vs master/fixed")
    common(p_cmp)
    p_cmp.add_argument("--seed-count", type=int, default=DEFAULT_SEED_COUNT,
                       help="seeds per architecture (default %d)"
                       % DEFAULT_SEED_COUNT)
    p_cmp.set_defaults(func=_cmd_compare)

    p_cal = sub.add_parser("calibrate", help="fit link profiles to targets")
    p_cal.add_argument("--config", action="append", required=True,
                       help="scenario config (repeatable)")
    p_cal.add_argument("--targets", action="append", required=True,
                       help="target table CSV, one per --config")
    p_cal.add_argument("--name", default="calibrated", help="profile name")
    p_cal.add_argument("--out", default=None, help="profile output path")
    p_cal.add_argument("--seed", type=int, default=None)
    p_cal.add_argument("--seed-count", type=int, default=DEFAULT_SEED_COUNT)
    p_cal.set_defaults(func=_cmd_calibrate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    except (ConfigError, InvalidInputError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except InvariantError as exc:
        sys.stderr.write("consistency failure: %s\n" % exc)
        return 2
    except CosyncError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except OSError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
