"""Text histogram files and JSON experiment configs.

Histogram files are UTF-8 text.  The first data line is ``trials=<int>``;
each following line is ``n,count`` (single beam) or ``n1,n2,count`` (joint).
Blank lines and lines starting with ``#`` are ignored and omitted bins are
zero.  Writers emit every bin of the table so that a round trip preserves
the table extent.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .distributions import CountHistogram, JointCountHistogram
from .errors import ConfigError, DomainError, HistogramParseError, HistogramValidationError
from .simulator import ExperimentConfig

__all__ = [
    "parse_histogram",
    "parse_joint_histogram",
    "parse_histogram_text",
    "parse_joint_histogram_text",
    "format_histogram",
    "format_joint_histogram",
    "write_histogram",
    "load_config",
]


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _parse_int(token: str, lineno: int, what: str) -> int:
    try:
        return int(token.strip())
    except ValueError:
        raise HistogramParseError(f"{what} {token.strip()!r} is not an integer", lineno) from None


def _parse(text: str, arity: int) -> tuple[int, dict[tuple[int, ...], int]]:
    lines = _data_lines(text)
    first = next(lines, None)
    if first is None or not first[1].startswith("trials="):
        raise HistogramValidationError("missing 'trials=<integer>' header")
    lineno, header = first
    trials = _parse_int(header[len("trials="):], lineno, "trials")
    if trials < 0:
        raise HistogramValidationError(f"line {lineno}: trials must be non-negative")

    bins: dict[tuple[int, ...], int] = {}
    for lineno, line in lines:
        parts = line.split(",")
        if len(parts) != arity + 1:
            raise HistogramParseError(f"expected {arity + 1} comma-separated fields, got {len(parts)}", lineno)
        values = [_parse_int(p, lineno, "field") for p in parts]
        key, count = tuple(values[:arity]), values[arity]
        if min(key) < 0:
            raise HistogramValidationError(f"line {lineno}: negative photon number {min(key)}")
        if count < 0:
            raise HistogramValidationError(f"line {lineno}: negative count {count}")
        if key in bins:
            raise HistogramParseError(f"duplicate bin {','.join(map(str, key))}", lineno)
        bins[key] = count

    total = sum(bins.values())
    if total > trials:
        raise HistogramValidationError(f"binned counts {total} exceed trials {trials}")
    return trials, bins


def parse_histogram_text(text: str) -> CountHistogram:
    trials, bins = _parse(text, 1)
    size = max((k[0] for k in bins), default=-1) + 1
    counts = np.zeros(size, dtype=np.int64)
    for (n,), c in bins.items():
        counts[n] = c
    return CountHistogram(counts, trials)


def parse_joint_histogram_text(text: str) -> JointCountHistogram:
    trials, bins = _parse(text, 2)
    rows = max((k[0] for k in bins), default=-1) + 1
    cols = max((k[1] for k in bins), default=-1) + 1
    counts = np.zeros((rows, cols), dtype=np.int64)
    for (n1, n2), c in bins.items():
        counts[n1, n2] = c
    return JointCountHistogram(counts, trials)


def _read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def parse_histogram(path) -> CountHistogram:
    return parse_histogram_text(_read(path))


def parse_joint_histogram(path) -> JointCountHistogram:
    return parse_joint_histogram_text(_read(path))


def format_histogram(hist: CountHistogram) -> str:
    lines = [f"trials={hist.trials}"]
    lines += [f"{n},{int(c)}" for n, c in enumerate(hist.counts)]
    return "\n".join(lines) + "\n"


def format_joint_histogram(hist: JointCountHistogram) -> str:
    lines = [f"trials={hist.trials}"]
    rows, cols = hist.shape
    lines += [f"{n1},{n2},{int(hist.counts[n1, n2])}" for n1 in range(rows) for n2 in range(cols)]
    return "\n".join(lines) + "\n"


def write_histogram(hist: CountHistogram | JointCountHistogram, path) -> None:
    if isinstance(hist, JointCountHistogram):
        text = format_joint_histogram(hist)
    else:
        text = format_histogram(hist)
    # newline="" keeps the bytes identical across platforms
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    """Read an :class:`ExperimentConfig` from a flat JSON object; unknown keys are errors."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    try:
        return ExperimentConfig.from_dict(data)
    except (TypeError, DomainError) as exc:
        raise ConfigError(str(exc)) from None
