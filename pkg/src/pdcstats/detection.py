"""Forward model from emitted pairs to detected photon counts.

Each photon reaches its detector independently with probability equal to
the channel efficiency (binomial thinning); dark counts add an independent
Poisson number of clicks per gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .distributions import (
    JointPhotonDistribution,
    PhotonNumberDistribution,
    pnd_poisson,
)
from .errors import DomainError

__all__ = [
    "LossChannel",
    "apply_binomial_loss",
    "apply_dark_counts",
    "pairs_to_photons_collinear",
    "detected_joint",
]


def _check_efficiency(efficiency: float) -> float:
    if not (0.0 <= efficiency <= 1.0):
        raise DomainError(f"efficiency must lie in [0, 1], got {efficiency!r}")
    return float(efficiency)


def _check_dark(dark_mean: float) -> float:
    if not (dark_mean >= 0.0) or not math.isfinite(dark_mean):
        raise DomainError(f"dark_mean must be finite and non-negative, got {dark_mean!r}")
    return float(dark_mean)


@dataclass(frozen=True)
class LossChannel:
    """Detector path with overall efficiency and mean dark counts per gate."""

    efficiency: float = 1.0
    dark_mean: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "efficiency", _check_efficiency(self.efficiency))
        object.__setattr__(self, "dark_mean", _check_dark(self.dark_mean))


def _thinning_matrix(n_in: int, n_out: int, efficiency: float) -> np.ndarray:
    """``T[n, m]`` = probability that m of n photons survive."""
    n = np.arange(n_in)[:, None]
    m = np.arange(n_out)[None, :]
    valid = m <= n
    if efficiency in (0.0, 1.0):
        return (m == (n if efficiency == 1.0 else 0 * n)).astype(float)
    mm, nn = np.where(valid, m, 0), np.where(valid, n, 0)
    log_t = (special.gammaln(nn + 1) - special.gammaln(mm + 1) - special.gammaln(nn - mm + 1)
             + mm * math.log(efficiency) + (nn - mm) * math.log1p(-efficiency))
    return np.where(valid, np.exp(log_t), 0.0)


def _dark_matrix(size: int, dark_mean: float) -> np.ndarray:
    """Lower-triangular ``D[m, n]`` = P(m clicks | n photon clicks) under added dark counts."""
    pmf = stats.poisson.pmf(np.arange(size), dark_mean)
    d = np.zeros((size, size))
    for shift in range(size):
        d += np.diag(np.full(size - shift, pmf[shift]), -shift)
    return d


def apply_binomial_loss(pnd: PhotonNumberDistribution, efficiency: float) -> PhotonNumberDistribution:
    """Thin every photon independently with survival probability ``efficiency``.

    Photons beyond the truncation could be thinned back into range; that
    contribution is unknown, so the incoming tail is kept as the outgoing tail
    and in-range entries are lower bounds.
    """
    efficiency = _check_efficiency(efficiency)
    size = len(pnd.probs)
    probs = pnd.probs @ _thinning_matrix(size, size, efficiency)
    probs = np.clip(probs, 0.0, 1.0)
    return PhotonNumberDistribution(probs, pnd.tail_mass)


def apply_dark_counts(pnd: PhotonNumberDistribution, dark_mean: float) -> PhotonNumberDistribution:
    """Add independent Poisson dark clicks with the given mean."""
    dark_mean = _check_dark(dark_mean)
    if dark_mean == 0.0:
        return pnd
    size = len(pnd.probs)
    noise = pnd_poisson(dark_mean, size - 1).probs
    probs = np.array([math.fsum(pnd.probs[: m + 1] * noise[m::-1]) for m in range(size)])
    return PhotonNumberDistribution.from_truncated(probs)


def pairs_to_photons_collinear(pair_pnd: PhotonNumberDistribution) -> PhotonNumberDistribution:
    """Both photons of every pair enter the same beam: k pairs give 2k photons."""
    probs = np.zeros(2 * len(pair_pnd.probs) - 1)
    probs[::2] = pair_pnd.probs
    return PhotonNumberDistribution(probs, pair_pnd.tail_mass)


def detected_joint(
    pair_pnd: PhotonNumberDistribution,
    signal: LossChannel,
    idler: LossChannel,
    n_max: int,
) -> JointPhotonDistribution:
    """Joint click distribution of the signal and idler detectors.

    Given k pairs the two arms are thinned independently, then each arm
    receives its own dark counts.
    """
    if int(n_max) != n_max or n_max < 0:
        raise DomainError(f"n_max must be a non-negative integer, got {n_max!r}")
    size = int(n_max) + 1
    k = len(pair_pnd.probs)
    ts = _thinning_matrix(k, size, signal.efficiency)
    ti = _thinning_matrix(k, size, idler.efficiency)
    joint = ts.T @ (pair_pnd.probs[:, None] * ti)
    if signal.dark_mean > 0.0:
        joint = _dark_matrix(size, signal.dark_mean) @ joint
    if idler.dark_mean > 0.0:
        joint = joint @ _dark_matrix(size, idler.dark_mean).T
    return JointPhotonDistribution.from_truncated(joint)
