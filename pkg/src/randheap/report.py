"""Plain-text outputs: ``key = value`` record blocks and CSV trajectories."""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Mapping, TextIO

import numpy as np

from .heap import SIGN_CHARS
from .process import Trajectory

EVENT_NAMES = {0: "add", 1: "annihilate"}
TRAJECTORY_COLUMNS = ("step", "event", "column", "sign", "heap_size", "roof_size")


def _fmt(v) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def format_record(record: Mapping) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in record.items())


def format_records(records: Iterable[Mapping]) -> str:
    return "\n".join(format_record(r) for r in records)


def parse_records(text: str) -> list[dict[str, str]]:
    """Inverse of ``format_records`` up to value types (everything comes back as str)."""
    out = []
    for block in text.strip().split("\n\n"):
        rec = {}
        for line in block.splitlines():
            if line.strip():
                k, _, v = line.partition(" = ")
                rec[k] = v
        if rec:
            out.append(rec)
    return out


def write_config_comment(config: Mapping, stream: TextIO) -> None:
    for k, v in config.items():
        stream.write(f"# {k} = {_fmt(v)}\n")


def write_csv_rows(records, stream: TextIO) -> None:
    """Write the rows of one chunk of ``(step, column, sign, event, heap_size, roof_size, ...)`` arrays."""
    step, column, sign, event, size, roof = (a.tolist() for a in records[:6])
    w = csv.writer(stream, lineterminator="\n")
    for row in zip(step, event, column, sign, size, roof):
        w.writerow((row[0], EVENT_NAMES[row[1]], row[2], SIGN_CHARS[row[3]], row[4], row[5]))


def write_trajectory_csv(traj: Trajectory, stream: TextIO, config: bool = True) -> None:
    """One row per recorded step; the config echo goes first as ``#`` comment lines."""
    if config:
        write_config_comment(traj.config.echo(), stream)
    stream.write(",".join(TRAJECTORY_COLUMNS) + "\n")
    write_csv_rows((traj.step, traj.column, traj.sign, traj.event, traj.heap_size, traj.roof_size), stream)


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    write_trajectory_csv(traj, buf)
    return buf.getvalue()
