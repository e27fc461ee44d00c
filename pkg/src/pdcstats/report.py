"""Full nonclassicality report for a heralded twin-beam run."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from . import __version__
from .criteria import (
    CriterionResult,
    combined,
    gamma_wdsby,
    klyshko_k,
    mandel_q,
    significance_table,
)
from .distributions import CountHistogram, JointCountHistogram

__all__ = ["Report", "build_report", "klyshko_csv", "file_provenance"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Report:
    klyshko_series: list[CriterionResult]
    gamma: CriterionResult
    combined: CriterionResult
    lee_table: dict[tuple[int, int], CriterionResult]
    mandel_q: CriterionResult
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "klyshko_series": [r.to_dict() for r in self.klyshko_series],
            "gamma": self.gamma.to_dict(),
            "combined": self.combined.to_dict(),
            "lee_table": [self.lee_table[k].to_dict() for k in sorted(self.lee_table)],
            "mandel_q": self.mandel_q.to_dict(),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Report:
        cells = [CriterionResult.from_dict(c) for c in d["lee_table"]]
        return cls(
            klyshko_series=[CriterionResult.from_dict(r) for r in d["klyshko_series"]],
            gamma=CriterionResult.from_dict(d["gamma"]),
            combined=CriterionResult.from_dict(d["combined"]),
            lee_table={c.index: c for c in cells},
            mandel_q=CriterionResult.from_dict(d["mandel_q"]),
            metadata=d["metadata"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


def file_provenance(path) -> dict:
    data = Path(path).read_bytes()
    return {"name": Path(path).name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}


def build_report(
    joint: JointCountHistogram,
    single: CountHistogram | None = None,
    n1_range: Iterable[int] = (1, 2, 3, 4),
    n2_range: Iterable[int] = (1, 2, 3, 4),
    nbar_policy: float | str = "estimate",
    inputs: dict | None = None,
) -> Report:
    """Evaluate every test; single-beam tests use ``single`` or else the signal marginal."""
    n1_range, n2_range = list(n1_range), list(n2_range)
    beam = single if single is not None else joint.marginal("signal")
    top = max(len(beam.counts) - 2, 1)
    metadata = {
        "tool": "pdcstats",
        "version": __version__,
        "inputs": inputs or {},
        "single_beam_source": "single" if single is not None else "joint_signal_marginal",
        "config": {
            "n1_range": n1_range,
            "n2_range": n2_range,
            "nbar_policy": nbar_policy,
            "klyshko_n": [1, top],
        },
    }
    return Report(
        klyshko_series=[klyshko_k(beam, n) for n in range(1, top + 1)],
        gamma=gamma_wdsby(beam),
        combined=combined(beam),
        lee_table=significance_table(joint, n1_range, n2_range, nbar_policy),
        mandel_q=mandel_q(beam),
        metadata=metadata,
    )


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def klyshko_csv(series: list[CriterionResult]) -> str:
    """``n,K,sigma,status`` rows; undefined numbers are left empty."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "K", "sigma", "status"])
    for r in series:
        w.writerow([r.index[0], _num(r.value), _num(r.std_error), r.status.value])
    return buf.getvalue()
