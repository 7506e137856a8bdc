"""Scenario grids: sweep distance and channel over many seeds, emit CSV.

The CSV layout is part of the tool's contract: fixed header, rows sorted by
(distance, channel), numbers rendered with %.6g, UNIX newlines, and a
trailing newline — so identical runs produce byte-identical files.
"""

import math
from dataclasses import dataclass, replace as _replace

from .errors import InvalidInputError
from .orchestrator import compare_architectures, run_scenario
from .profiles import load_profile
from .scenario import CHANNELS

CSV_HEADER = ("distance_m,channel,transport,architecture,"
              "pd_a_s,l_p_pct,windows,retransmissions")

DEFAULT_SEED_COUNT = 30


@dataclass(frozen=True)
class GridCell:
    """Seed-averaged results for one (distance, channel) grid point."""

    distance_m: float
    channel: str
    transport: str
    architecture: str
    pd_a_s: float
    l_p_pct: float
    windows: float
    retransmissions: float
    seeds: tuple


def seed_sequence(base_seed, count):
    if count < 1:
        raise InvalidInputError("seed count must be positive, got %r" % (count,))
    return tuple(base_seed + i for i in range(count))


def _mean(values):
    return math.fsum(values) / len(values)


def run_cell(config, distance_m, channel, seeds, profile=None):
    """Average one grid point over a seed sweep."""
    if profile is None:
        profile = load_profile(config.profile)
    cell_config = _replace(config, channel=channel)
    runs = [run_scenario(cell_config, distance_m, seed, profile=profile)
            for seed in seeds]
    return GridCell(
        distance_m=float(distance_m),
        channel=channel,
        transport=config.transport,
        architecture=config.architecture,
        pd_a_s=_mean([r.pd_a_s for r in runs]),
        l_p_pct=100.0 * _mean([r.loss_probability for r in runs]),
        windows=_mean([r.windows for r in runs]),
        retransmissions=_mean([r.retransmissions for r in runs]),
        seeds=tuple(seeds),
    )


def run_grid(config, seeds=None, seed_count=DEFAULT_SEED_COUNT, profile=None,
             distances=None, channels=None):
    """Run every (distance, channel) cell and return them already sorted."""
    if profile is None:
        profile = load_profile(config.profile)
    if seeds is None:
        seeds = seed_sequence(config.seed, seed_count)
    if distances is None:
        distances = config.distances
    if channels is None:
        channels = CHANNELS
    for channel in channels:
        if channel not in CHANNELS:
            raise InvalidInputError("unknown channel %r" % (channel,))
    cells = [run_cell(config, d, ch, seeds, profile=profile)
             for d in distances for ch in channels]
    cells.sort(key=lambda c: (c.distance_m, c.channel))
    return cells


def format_csv(cells):
    """Render grid cells in the fixed CSV contract."""
    lines = [CSV_HEADER]
    for cell in cells:
        lines.append(",".join([
            "%.6g" % cell.distance_m,
            cell.channel,
            cell.transport,
            cell.architecture,
            "%.6g" % cell.pd_a_s,
            "%.6g" % cell.l_p_pct,
            "%.6g" % cell.windows,
            "%.6g" % cell.retransmissions,
        ]))
    return "\n".join(lines) + "\n"


def write_csv(cells, path):
    text = format_csv(cells)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return text


def compare_grid(config, seeds=None, seed_count=DEFAULT_SEED_COUNT,
                 profile=None, distances=None):
    """Architecture comparison at every distance of the sweep."""
    if profile is None:
        profile = load_profile(config.profile)
    if seeds is None:
        seeds = seed_sequence(config.seed, seed_count)
    if distances is None:
        distances = config.distances
    return [compare_architectures(config, d, seeds, profile=profile)
            for d in distances]
