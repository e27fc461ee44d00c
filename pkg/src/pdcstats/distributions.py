"""Photon-number distributions and count histograms.

Distributions are truncated at ``n_max`` and carry the probability of all
photon numbers above the truncation in ``tail_mass``, so that
``probs.sum() + tail_mass == 1``.  Histograms hold raw integer counts and
the number of trials (pulses) they were accumulated over; trials may exceed
the binned total when readings overflowed the table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from .errors import DomainError, InsufficientStatisticsError, UnreliableMomentError

__all__ = [
    "PhotonNumberDistribution",
    "JointPhotonDistribution",
    "CountHistogram",
    "JointCountHistogram",
    "pnd_two_mode_squeezed",
    "pnd_degenerate_squeezed",
    "pnd_poisson",
    "pnd_thermal",
    "pnd_pair_count_multimode",
    "joint_from_product",
    "marginal",
    "conditional",
    "moments",
    "total_variation",
]

NORM_TOL = 1e-12
# smaller probabilities are flushed to zero and moved to the tail
UNDERFLOW = 1e-300
MOMENT_TAIL_LIMIT = 0.01


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _flush(probs: np.ndarray, tail: float) -> tuple[np.ndarray, float]:
    small = (probs > 0) & (probs < UNDERFLOW)
    if small.any():
        tail = tail + float(probs[small].sum())
        probs = np.where(small, 0.0, probs)
    return probs, min(max(tail, 0.0), 1.0)


def _check_probabilities(probs: np.ndarray, tail_mass: float, what: str) -> None:
    if not np.all(np.isfinite(probs)):
        raise DomainError(f"{what}: probabilities must be finite")
    if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
        raise DomainError(f"{what}: probabilities must lie in [0, 1]")
    if not 0.0 <= tail_mass <= 1.0:
        raise DomainError(f"{what}: tail_mass must lie in [0, 1], got {tail_mass}")
    total = math.fsum(probs.ravel()) + tail_mass
    if abs(total - 1.0) > NORM_TOL:
        raise DomainError(f"{what}: probabilities sum to {total!r}, not 1")


@dataclass(frozen=True, eq=False)
class PhotonNumberDistribution:
    """Probability of n photons for n = 0..n_max, plus the mass above n_max."""

    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        probs = _frozen(self.probs, float)
        if probs.ndim != 1:
            raise DomainError("probs must be one-dimensional")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))
        _check_probabilities(probs, self.tail_mass, "PhotonNumberDistribution")

    @classmethod
    def from_truncated(cls, probs) -> PhotonNumberDistribution:
        """Build from exact in-range probabilities, assigning the remainder to the tail."""
        probs = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
        tail = 1.0 - math.fsum(probs)
        probs, tail = _flush(probs, tail)
        return cls(probs, tail)

    @property
    def n_max(self) -> int:
        return len(self.probs) - 1

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, n):
        return self.probs[n]

    def __eq__(self, other):
        if not isinstance(other, PhotonNumberDistribution):
            return NotImplemented
        return self.tail_mass == other.tail_mass and np.array_equal(self.probs, other.probs)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class JointPhotonDistribution:
    """Probability table ``probs[n1, n2]`` for signal (rows) and idler (columns)."""

    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        probs = _frozen(self.probs, float)
        if probs.ndim != 2:
            raise DomainError("joint probs must be two-dimensional")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))
        _check_probabilities(probs, self.tail_mass, "JointPhotonDistribution")

    @classmethod
    def from_truncated(cls, probs) -> JointPhotonDistribution:
        probs = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
        tail = 1.0 - math.fsum(probs.ravel())
        probs, tail = _flush(probs, tail)
        return cls(probs, tail)

    @property
    def shape(self) -> tuple[int, int]:
        return self.probs.shape

    def __eq__(self, other):
        if not isinstance(other, JointPhotonDistribution):
            return NotImplemented
        return self.tail_mass == other.tail_mass and np.array_equal(self.probs, other.probs)

    __hash__ = None


def _check_counts(counts: np.ndarray, trials: int, what: str) -> None:
    if counts.size and counts.min() < 0:
        raise DomainError(f"{what}: counts must be non-negative")
    if trials < 0:
        raise DomainError(f"{what}: trials must be non-negative")
    if int(counts.sum()) > trials:
        raise DomainError(f"{what}: binned counts {int(counts.sum())} exceed trials {trials}")


@dataclass(frozen=True, eq=False)
class CountHistogram:
    """Event counts per photon number over ``trials`` pulses."""

    counts: np.ndarray
    trials: int

    def __post_init__(self):
        counts = _frozen(self.counts, np.int64)
        if counts.ndim != 1:
            raise DomainError("counts must be one-dimensional")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "trials", int(self.trials))
        _check_counts(counts, self.trials, "CountHistogram")

    @property
    def overflow(self) -> int:
        """Trials whose reading fell outside the binned range."""
        return self.trials - int(self.counts.sum())

    def frequencies(self) -> np.ndarray:
        """Empirical probabilities ``counts / trials``."""
        if self.trials == 0:
            raise InsufficientStatisticsError("histogram has zero trials")
        return self.counts / self.trials

    def count(self, n: int) -> int:
        """Count in bin ``n``; omitted bins read as zero."""
        if n < 0:
            raise DomainError("photon number must be non-negative")
        return int(self.counts[n]) if n < len(self.counts) else 0

    def __eq__(self, other):
        if not isinstance(other, CountHistogram):
            return NotImplemented
        return self.trials == other.trials and np.array_equal(self.counts, other.counts)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class JointCountHistogram:
    """Coincidence counts ``counts[n1, n2]`` over ``trials`` pulses."""

    counts: np.ndarray
    trials: int

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.size == 0:
            counts = counts.reshape(0, 0) if counts.ndim != 2 else counts
        counts = _frozen(counts, np.int64)
        if counts.ndim != 2:
            raise DomainError("joint counts must be two-dimensional")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "trials", int(self.trials))
        _check_counts(counts, self.trials, "JointCountHistogram")

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    @property
    def overflow(self) -> int:
        return self.trials - int(self.counts.sum())

    def count(self, n1: int, n2: int) -> int:
        if n1 < 0 or n2 < 0:
            raise DomainError("photon numbers must be non-negative")
        rows, cols = self.counts.shape
        return int(self.counts[n1, n2]) if n1 < rows and n2 < cols else 0

    def marginal(self, axis: Literal["signal", "idler"] = "signal") -> CountHistogram:
        """Single-detector histogram; overflowed pulses stay in ``trials``."""
        ax = _axis_index(axis)
        return CountHistogram(self.counts.sum(axis=1 - ax), self.trials)

    def __eq__(self, other):
        if not isinstance(other, JointCountHistogram):
            return NotImplemented
        return self.trials == other.trials and np.array_equal(self.counts, other.counts)

    __hash__ = None


def _check_n_max(n_max: int) -> int:
    if int(n_max) != n_max or n_max < 0:
        raise DomainError(f"n_max must be a non-negative integer, got {n_max!r}")
    return int(n_max)


def _check_unit_interval(x: float, name: str) -> float:
    if not (0.0 <= x < 1.0):
        raise DomainError(f"{name} must lie in [0, 1), got {x!r}")
    return float(x)


def _check_mean(mean: float) -> float:
    if not (mean >= 0.0) or not math.isfinite(mean):
        raise DomainError(f"mean must be a finite non-negative number, got {mean!r}")
    return float(mean)


def pnd_two_mode_squeezed(eta_sq: float, n_max: int) -> JointPhotonDistribution:
    """Joint photon numbers of a two-mode squeezed vacuum with ``|eta|^2 = eta_sq``.

    Only the diagonal is occupied: ``p[n, n] = (1 - eta_sq) * eta_sq**n``.
    """
    eta_sq = _check_unit_interval(eta_sq, "eta_sq")
    n_max = _check_n_max(n_max)
    n = np.arange(n_max + 1)
    probs = np.zeros((n_max + 1, n_max + 1))
    probs[n, n] = (1.0 - eta_sq) * eta_sq**n
    probs, tail = _flush(probs, eta_sq ** (n_max + 1))
    return JointPhotonDistribution(probs, tail)


def pnd_degenerate_squeezed(chi_sq: float, n_max: int) -> PhotonNumberDistribution:
    """Single-mode squeezed vacuum: weight ``(1 - chi_sq) * chi_sq**k`` at 2k photons."""
    chi_sq = _check_unit_interval(chi_sq, "chi_sq")
    n_max = _check_n_max(n_max)
    k = np.arange(n_max // 2 + 1)
    probs = np.zeros(n_max + 1)
    probs[2 * k] = (1.0 - chi_sq) * chi_sq**k
    probs, tail = _flush(probs, chi_sq ** (n_max // 2 + 1))
    return PhotonNumberDistribution(probs, tail)


def pnd_poisson(mean: float, n_max: int) -> PhotonNumberDistribution:
    mean = _check_mean(mean)
    n_max = _check_n_max(n_max)
    n = np.arange(n_max + 1)
    probs = stats.poisson.pmf(n, mean)
    probs, tail = _flush(probs, float(stats.poisson.sf(n_max, mean)))
    return PhotonNumberDistribution(probs, tail)


def pnd_thermal(mean: float, n_max: int) -> PhotonNumberDistribution:
    """Geometric (Bose-Einstein) distribution with the given mean."""
    mean = _check_mean(mean)
    n_max = _check_n_max(n_max)
    ratio = mean / (1.0 + mean)
    n = np.arange(n_max + 1)
    probs = ratio**n / (1.0 + mean)
    probs, tail = _flush(probs, ratio ** (n_max + 1))
    return PhotonNumberDistribution(probs, tail)


def _convolve_truncated(a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length)
    for m in range(length):
        i = np.arange(max(0, m - len(b) + 1), min(m, len(a) - 1) + 1)
        out[m] = math.fsum(a[i] * b[m - i])
    return out


def pnd_pair_count_multimode(modes: int, mean_per_mode: float, n_max: int) -> PhotonNumberDistribution:
    """Total pair number from ``modes`` independent thermal emitters.

    This is the negative-binomial law; it tends to a Poisson distribution
    with mean ``modes * mean_per_mode`` as the number of modes grows at
    fixed total mean.
    """
    if int(modes) != modes or modes < 1:
        raise DomainError(f"modes must be a positive integer, got {modes!r}")
    modes = int(modes)
    single = pnd_thermal(mean_per_mode, n_max).probs
    length = len(single)

    # M-fold convolution by repeated squaring; truncation at n_max is exact
    # for every retained bin because all supports start at zero.
    result = None
    power = single
    m = modes
    while m:
        if m & 1:
            result = power if result is None else _convolve_truncated(result, power, length)
        m >>= 1
        if m:
            power = _convolve_truncated(power, power, length)
    return PhotonNumberDistribution.from_truncated(result)


def joint_from_product(signal: PhotonNumberDistribution, idler: PhotonNumberDistribution) -> JointPhotonDistribution:
    """Joint table of two independent beams."""
    return JointPhotonDistribution.from_truncated(np.outer(signal.probs, idler.probs))


def _axis_index(axis: str) -> int:
    if axis == "signal":
        return 0
    if axis == "idler":
        return 1
    raise DomainError(f"axis must be 'signal' or 'idler', got {axis!r}")


def marginal(joint: JointPhotonDistribution, axis: Literal["signal", "idler"] = "signal") -> PhotonNumberDistribution:
    """Distribution of one beam, summing over the other.

    Entries are lower bounds when the other beam's tail is non-empty, so the
    whole joint tail is carried over unchanged.
    """
    ax = _axis_index(axis)
    table = joint.probs if ax == 0 else joint.probs.T
    probs = np.array([math.fsum(row) for row in table], dtype=float)
    return PhotonNumberDistribution(probs, joint.tail_mass)


def conditional(joint_hist: JointCountHistogram, n1: int) -> CountHistogram:
    """Idler counts among pulses whose signal reading was ``n1``."""
    rows = joint_hist.shape[0]
    if n1 < 0 or n1 >= rows:
        raise InsufficientStatisticsError(f"no row for trigger count n1={n1}")
    row = joint_hist.counts[n1]
    total = int(row.sum())
    if total == 0:
        raise InsufficientStatisticsError(f"no events with trigger count n1={n1}")
    return CountHistogram(row, total)


def moments(pnd: PhotonNumberDistribution) -> tuple[float, float]:
    """Mean and variance over the in-range photon numbers.

    Raises :class:`UnreliableMomentError` when the tail holds 1 % or more.
    """
    if pnd.tail_mass >= MOMENT_TAIL_LIMIT:
        raise UnreliableMomentError(f"tail mass {pnd.tail_mass:.3g} too large for reliable moments")
    p = pnd.probs
    n = np.arange(len(p), dtype=float)
    norm = math.fsum(p)
    mean = math.fsum(n * p) / norm
    var = math.fsum((n - mean) ** 2 * p) / norm
    return mean, var


def total_variation(a: PhotonNumberDistribution | JointPhotonDistribution,
                    b: PhotonNumberDistribution | JointPhotonDistribution) -> float:
    """Total-variation distance, treating each tail as a single extra outcome.

    Tables of different extent are zero-padded to a common shape.
    """
    pa, pb = np.asarray(a.probs), np.asarray(b.probs)
    shape = tuple(max(x, y) for x, y in zip(pa.shape, pb.shape))
    qa = np.zeros(shape)
    qb = np.zeros(shape)
    qa[tuple(slice(0, s) for s in pa.shape)] = pa
    qb[tuple(slice(0, s) for s in pb.shape)] = pb
    return 0.5 * (math.fsum(np.abs(qa - qb).ravel()) + abs(a.tail_mass - b.tail_mass))
