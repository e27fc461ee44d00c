"""Nonclassicality tests on photon-number distributions and count histograms.

Every test accepts either an exact distribution or a histogram of counts.
On exact input no standard error is reported.  On histograms each bin count
is treated as an independent Poisson variable and the standard error is
propagated to first order; the significance is the signed distance to the
classical threshold in units of that error, positive on the nonclassical
side.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, Union

import numpy as np

from .distributions import (
    CountHistogram,
    JointCountHistogram,
    JointPhotonDistribution,
    PhotonNumberDistribution,
    conditional,
    moments,
)
from .errors import DomainError, InsufficientStatisticsError

__all__ = [
    "Criterion",
    "Status",
    "CriterionResult",
    "GAMMA_CLASSICAL",
    "klyshko_k",
    "gamma_wdsby",
    "combined_threshold",
    "combined",
    "lee_r_joint",
    "lee_r_conditional",
    "mandel_q",
    "significance_table",
    "format_significance_table",
]

SingleSource = Union[CountHistogram, PhotonNumberDistribution]
JointSource = Union[JointCountHistogram, JointPhotonDistribution]

GAMMA_CLASSICAL = 3.0 / (3.0 + 2.0 * math.sqrt(6.0))
_SQRT_1_5 = math.sqrt(1.5)


class Criterion(str, Enum):
    KLYSHKO = "KlyshkoK"
    GAMMA = "GammaWDSBY"
    COMBINED = "Combined"
    LEE_JOINT = "LeeJoint"
    LEE_CONDITIONAL = "LeeConditional"
    MANDEL_Q = "MandelQ"


class Status(str, Enum):
    OK = "ok"
    INSUFFICIENT = "insufficient_statistics"
    DIVERGENT = "undefined_divergent"


# tests where the nonclassical side lies above the threshold
_UPPER = {Criterion.GAMMA, Criterion.COMBINED}
# values this close to the threshold (relative) sit on the classical boundary
_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class CriterionResult:
    name: Criterion
    value: float | None
    threshold: float | None
    std_error: float | None = None
    significance: float | None = None
    violated: bool = False
    status: Status = Status.OK
    index: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["name"] = self.name.value
        d["status"] = self.status.value
        d["index"] = list(self.index)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> CriterionResult:
        return cls(
            name=Criterion(d["name"]),
            value=d["value"],
            threshold=d["threshold"],
            std_error=d["std_error"],
            significance=d["significance"],
            violated=d["violated"],
            status=Status(d["status"]),
            index=tuple(d["index"]),
        )


def _result(name, value, threshold, std_error=None, status=Status.OK, index=()):
    if value is None:
        return CriterionResult(name, None, threshold, None, None, False, status, tuple(index))
    value = float(value)
    upper = name in _UPPER
    margin = _BOUNDARY_RTOL * max(1.0, abs(threshold))
    violated = value > threshold + margin if upper else value < threshold - margin
    significance = None
    if std_error is not None:
        if std_error > 0.0 and math.isfinite(std_error):
            significance = ((value - threshold) if upper else (threshold - value)) / std_error
        else:
            std_error = None
            if status is Status.OK:
                status = Status.INSUFFICIENT
    return CriterionResult(name, value, float(threshold), std_error, significance, violated, status, tuple(index))


class _Single:
    """Uniform access to probabilities and (for histograms) counts of one beam."""

    def __init__(self, source: SingleSource):
        self.counts = None
        if isinstance(source, CountHistogram):
            self.empty = source.trials == 0
            self.counts = source
            self.norm = source.trials
        elif isinstance(source, PhotonNumberDistribution):
            self.empty = False
            self.pnd = source
        else:
            raise TypeError(f"expected CountHistogram or PhotonNumberDistribution, got {type(source).__name__}")

    @property
    def exact(self) -> bool:
        return self.counts is None

    def count(self, n: int) -> int:
        return self.counts.count(n)

    def prob(self, n: int) -> float:
        if self.counts is not None:
            return self.counts.count(n) / self.norm
        if n < 0 or n >= len(self.pnd.probs):
            raise DomainError(f"photon number {n} outside the distribution range 0..{self.pnd.n_max}")
        return float(self.pnd.probs[n])


class _Joint:
    def __init__(self, source: JointSource):
        self.counts = None
        if isinstance(source, JointCountHistogram):
            self.empty = source.trials == 0
            self.counts = source
        elif isinstance(source, JointPhotonDistribution):
            self.empty = False
            self.dist = source
        else:
            raise TypeError(f"expected JointCountHistogram or JointPhotonDistribution, got {type(source).__name__}")

    @property
    def exact(self) -> bool:
        return self.counts is None

    def count(self, n1: int, n2: int) -> int:
        return self.counts.count(n1, n2)

    def prob(self, n1: int, n2: int) -> float:
        if self.counts is not None:
            return self.counts.count(n1, n2) / self.counts.trials
        rows, cols = self.dist.shape
        if not (0 <= n1 < rows and 0 <= n2 < cols):
            raise DomainError(f"cell ({n1}, {n2}) outside the joint table {rows}x{cols}")
        return float(self.dist.probs[n1, n2])


def klyshko_k(hist: SingleSource, n: int) -> CriterionResult:
    """Local test ``K_n = (n+1) p[n-1] p[n+1] / (n p[n]^2)``; below 1 is nonclassical.

    Relative error on counts: ``sqrt(1/c[n-1] + 1/c[n+1] + 4/c[n])``.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    src = _Single(hist)
    idx = (n,)
    if src.empty:
        return _result(Criterion.KLYSHKO, None, 1.0, status=Status.INSUFFICIENT, index=idx)
    lo, mid, hi = src.prob(n - 1), src.prob(n), src.prob(n + 1)
    if mid == 0.0:
        return _result(Criterion.KLYSHKO, None, 1.0, status=Status.DIVERGENT, index=idx)
    value = (n + 1) * lo * hi / (n * mid * mid)
    if src.exact:
        return _result(Criterion.KLYSHKO, value, 1.0, index=idx)
    c_lo, c_mid, c_hi = src.count(n - 1), src.count(n), src.count(n + 1)
    if c_lo == 0 or c_hi == 0:
        return _result(Criterion.KLYSHKO, value, 1.0, status=Status.INSUFFICIENT, index=idx)
    std = value * math.sqrt(1.0 / c_lo + 1.0 / c_hi + 4.0 / c_mid)
    return _result(Criterion.KLYSHKO, value, 1.0, std, index=idx)


def gamma_wdsby(hist: SingleSource) -> CriterionResult:
    """Weight of the two-photon bin among bins 1..3; above ~0.379 is nonclassical."""
    src = _Single(hist)
    if src.empty:
        return _result(Criterion.GAMMA, None, GAMMA_CLASSICAL, status=Status.INSUFFICIENT)
    p1, p2, p3 = src.prob(1), src.prob(2), src.prob(3)
    total = p1 + p2 + p3
    if total == 0.0:
        return _result(Criterion.GAMMA, None, GAMMA_CLASSICAL, status=Status.INSUFFICIENT)
    value = p2 / total
    if src.exact:
        return _result(Criterion.GAMMA, value, GAMMA_CLASSICAL)
    c2 = src.count(2)
    rest = src.count(1) + src.count(3)
    t = c2 + rest
    std = math.sqrt(c2 * rest / t**3)
    return _result(Criterion.GAMMA, value, GAMMA_CLASSICAL, std)


def combined_threshold(p1: float, p3: float) -> float:
    """Smallest two-photon probability that certifies nonclassicality from p1 and p3.

    Minimum of the K_2 bound ``sqrt(1.5 p1 p3)`` and the Gamma bound
    ``0.5 sqrt(1.5) (p1 + p3)``; by AM-GM the first never exceeds the second.
    """
    if p1 < 0 or p3 < 0:
        raise DomainError("probabilities must be non-negative")
    return min(math.sqrt(1.5 * p1 * p3), 0.5 * _SQRT_1_5 * (p1 + p3))


def combined(hist: SingleSource) -> CriterionResult:
    """Combined K_2 / Gamma test: value is p2, threshold is ``combined_threshold(p1, p3)``.

    The standard error is that of ``p2 - threshold``.
    """
    src = _Single(hist)
    if src.empty:
        return _result(Criterion.COMBINED, None, None, status=Status.INSUFFICIENT)
    p1, p2, p3 = src.prob(1), src.prob(2), src.prob(3)
    threshold = combined_threshold(p1, p3)
    if src.exact:
        return _result(Criterion.COMBINED, p2, threshold)
    c1, c2, c3 = src.count(1), src.count(2), src.count(3)
    if min(c1, c2, c3) == 0:
        return _result(Criterion.COMBINED, p2, threshold, status=Status.INSUFFICIENT)
    trials = src.norm
    var = c2 / trials**2 + threshold**2 * (1.0 / c1 + 1.0 / c3) / 4.0
    return _result(Criterion.COMBINED, p2, threshold, math.sqrt(var))


def _ratio_error(u, c_u, v, c_v, w, c_w, value):
    """Error of ``(u + v) / w`` with Poisson relative variances ``1/c``; zero terms drop out."""
    var = 0.0
    if u:
        var += u * u / c_u
    if v:
        var += v * v / c_v
    return math.sqrt(var / (w * w) + value * value / c_w)


def lee_r_joint(joint: JointSource, n1: int, n2: int) -> CriterionResult:
    """Two-beam local test on the joint table; below 1 is nonclassical.

    ``R = (n2+1) p[n1-1, n2+1] / (2 n1 p[n1, n2]) + (n1+1) p[n1+1, n2-1] / (2 n2 p[n1, n2])``
    """
    if n1 < 1 or n2 < 1:
        raise DomainError("n1 and n2 must be at least 1")
    src = _Joint(joint)
    idx = (n1, n2)
    if src.empty:
        return _result(Criterion.LEE_JOINT, None, 1.0, status=Status.INSUFFICIENT, index=idx)
    centre = src.prob(n1, n2)
    if centre == 0.0:
        return _result(Criterion.LEE_JOINT, None, 1.0, status=Status.DIVERGENT, index=idx)
    u = (n2 + 1) * src.prob(n1 - 1, n2 + 1) / (2 * n1)
    v = (n1 + 1) * src.prob(n1 + 1, n2 - 1) / (2 * n2)
    value = (u + v) / centre
    if src.exact:
        return _result(Criterion.LEE_JOINT, value, 1.0, index=idx)
    if u == 0.0 and v == 0.0:
        return _result(Criterion.LEE_JOINT, value, 1.0, status=Status.INSUFFICIENT, index=idx)
    std = _ratio_error(u, src.count(n1 - 1, n2 + 1), v, src.count(n1 + 1, n2 - 1),
                       centre, src.count(n1, n2), value)
    return _result(Criterion.LEE_JOINT, value, 1.0, std, index=idx)


def lee_r_conditional(
    cond_minus: SingleSource,
    cond_0: SingleSource,
    cond_plus: SingleSource,
    n1: int,
    n2: int,
    nbar: float = 1.0,
) -> CriterionResult:
    """Two-beam test from heralded idler statistics, assuming a Poisson trigger marginal.

    ``cond_minus``, ``cond_0`` and ``cond_plus`` are the idler distributions
    given trigger counts ``n1 - 1``, ``n1`` and ``n1 + 1``; ``nbar`` is the
    trigger mean.  Substituting the Poisson marginal into the joint form gives

        R = (nbar^2 q+[n2-1] + n2 (n2+1) q-[n2+1]) / (2 nbar n2 q0[n2])
    """
    if n1 < 1 or n2 < 1:
        raise DomainError("n1 and n2 must be at least 1")
    if not (nbar > 0.0) or not math.isfinite(nbar):
        raise DomainError(f"nbar must be positive, got {nbar!r}")
    minus, zero, plus = _Single(cond_minus), _Single(cond_0), _Single(cond_plus)
    idx = (n1, n2)
    if minus.empty or zero.empty or plus.empty:
        return _result(Criterion.LEE_CONDITIONAL, None, 1.0, status=Status.INSUFFICIENT, index=idx)
    centre = zero.prob(n2)
    if centre == 0.0:
        return _result(Criterion.LEE_CONDITIONAL, None, 1.0, status=Status.DIVERGENT, index=idx)
    denom = 2.0 * nbar * n2
    u = nbar * nbar * plus.prob(n2 - 1) / denom
    v = n2 * (n2 + 1) * minus.prob(n2 + 1) / denom
    value = (u + v) / centre
    if minus.exact and zero.exact and plus.exact:
        return _result(Criterion.LEE_CONDITIONAL, value, 1.0, index=idx)
    if u == 0.0 and v == 0.0:
        return _result(Criterion.LEE_CONDITIONAL, value, 1.0, status=Status.INSUFFICIENT, index=idx)

    def c(src, n):
        # exact inputs contribute no counting noise
        return src.count(n) if not src.exact else math.inf

    std = _ratio_error(u, c(plus, n2 - 1), v, c(minus, n2 + 1), centre, c(zero, n2), value)
    return _result(Criterion.LEE_CONDITIONAL, value, 1.0, std, index=idx)


def mandel_q(hist: SingleSource) -> CriterionResult:
    """``Q = (variance - mean) / mean``; negative values are nonclassical.

    Histogram moments use the binned events only.
    """
    src = _Single(hist)
    if src.empty:
        return _result(Criterion.MANDEL_Q, None, 0.0, status=Status.INSUFFICIENT)
    if src.exact:
        mean, var = moments(src.pnd)
        if mean == 0.0:
            return _result(Criterion.MANDEL_Q, None, 0.0, status=Status.INSUFFICIENT)
        return _result(Criterion.MANDEL_Q, var / mean - 1.0, 0.0)
    c = np.asarray(hist.counts, dtype=float)
    n = np.arange(len(c), dtype=float)
    s0, s1, s2 = c.sum(), (n * c).sum(), (n * n * c).sum()
    if s0 == 0 or s1 == 0:
        return _result(Criterion.MANDEL_Q, None, 0.0, status=Status.INSUFFICIENT)
    value = s2 / s1 - s1 / s0 - 1.0
    grad = n * n / s1 - s2 * n / s1**2 - n / s0 + s1 / s0**2
    std = math.sqrt(float((grad * grad * c).sum()))
    return _result(Criterion.MANDEL_Q, value, 0.0, std)


def _trigger_mean(joint: JointCountHistogram) -> float:
    sig = joint.counts.sum(axis=1)
    total = sig.sum()
    if total == 0:
        raise InsufficientStatisticsError("no binned events to estimate the trigger mean")
    return float((np.arange(len(sig)) * sig).sum() / total)


def significance_table(
    joint: JointCountHistogram,
    n1_range: Iterable[int] = (1, 2, 3, 4),
    n2_range: Iterable[int] = (1, 2, 3, 4),
    nbar_policy: float | str = "estimate",
) -> dict[tuple[int, int], CriterionResult]:
    """Heralded two-beam R value and error for every requested (n1, n2).

    ``nbar_policy`` is either a fixed trigger mean or ``"estimate"``, which
    uses the empirical mean of the signal counts.
    """
    n1_range, n2_range = list(n1_range), list(n2_range)
    if nbar_policy == "estimate":
        try:
            nbar = _trigger_mean(joint)
        except InsufficientStatisticsError:
            nbar = None
    elif isinstance(nbar_policy, (int, float)) and not isinstance(nbar_policy, bool):
        nbar = float(nbar_policy)
        if not nbar > 0:
            raise DomainError(f"fixed nbar must be positive, got {nbar_policy!r}")
    else:
        raise DomainError(f"nbar_policy must be a positive number or 'estimate', got {nbar_policy!r}")

    def row(n):
        try:
            return conditional(joint, n)
        except InsufficientStatisticsError:
            return None

    table = {}
    for n1 in n1_range:
        rows = (row(n1 - 1), row(n1), row(n1 + 1))
        for n2 in n2_range:
            if nbar is None or nbar == 0.0 or any(r is None for r in rows):
                table[n1, n2] = _result(Criterion.LEE_CONDITIONAL, None, 1.0,
                                        status=Status.INSUFFICIENT, index=(n1, n2))
            else:
                table[n1, n2] = lee_r_conditional(*rows, n1=n1, n2=n2, nbar=nbar)
    return table


def _fmt_cell(res: CriterionResult) -> str:
    if res.value is None:
        return "div" if res.status is Status.DIVERGENT else "n/a"
    if res.std_error is None:
        return f"{res.value:.3g}"
    return f"{res.value:.2f} ± {res.std_error:.2g}"


def format_significance_table(table: dict[tuple[int, int], CriterionResult]) -> str:
    """Plain-text grid with trigger counts as rows and idler counts as columns."""
    n1s = sorted({k[0] for k in table})
    n2s = sorted({k[1] for k in table})
    cells = [[_fmt_cell(table[n1, n2]) for n2 in n2s] for n1 in n1s]
    width = max([len(c) for r in cells for c in r] + [4])
    lines = ["n1\\n2 | " + " ".join(f"{n2:>{width}}" for n2 in n2s)]
    lines.append("-" * len(lines[0]))
    for n1, r in zip(n1s, cells):
        lines.append(f"{n1:>5} | " + " ".join(f"{c:>{width}}" for c in r))
    return "\n".join(lines)
