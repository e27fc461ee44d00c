"""Pulse-by-pulse Monte Carlo of heralded twin-beam and collinear counting runs.

Pulses are split into fixed-size blocks.  Block ``b`` draws from its own
Philox stream keyed by ``(seed, b)``, and block tallies are integer arrays
summed in block order, so a histogram depends only on the configuration and
never on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Literal

import numpy as np

from .distributions import CountHistogram, JointCountHistogram
from .errors import ConfigError

__all__ = [
    "ExperimentConfig",
    "BLOCK_SIZE",
    "simulate_twin_beam",
    "simulate_collinear",
    "simulate",
]

BLOCK_SIZE = 1 << 18
_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class ExperimentConfig:
    """Source, detector and run parameters.

    ``modes=None`` means an unlimited number of emitter modes, i.e. a Poisson
    pair number; a finite value gives a negative-binomial pair number with
    the same mean.  Collinear runs use only the signal-side fields.
    """

    pulses: int = 1_000_000
    mean_pairs_per_pulse: float = 1.0
    modes: int | None = None
    eta_signal: float = 1.0
    eta_idler: float = 1.0
    dark_signal: float = 0.0
    dark_idler: float = 0.0
    seed: int = 0
    n_max: int = 9
    geometry: Literal["twin_beam", "collinear"] = "twin_beam"

    def __post_init__(self):
        def is_int(x):
            return isinstance(x, (int, np.integer)) and not isinstance(x, bool)

        def is_real(x):
            return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool) and math.isfinite(x)

        if not is_int(self.pulses) or self.pulses < 1:
            raise ConfigError(f"pulses must be a positive integer, got {self.pulses!r}")
        if not is_real(self.mean_pairs_per_pulse) or self.mean_pairs_per_pulse < 0:
            raise ConfigError(f"mean_pairs_per_pulse must be non-negative, got {self.mean_pairs_per_pulse!r}")
        if self.modes == "unlimited":
            object.__setattr__(self, "modes", None)
        if self.modes is not None and (not is_int(self.modes) or self.modes < 1):
            raise ConfigError(f"modes must be a positive integer or unlimited, got {self.modes!r}")
        for name in ("eta_signal", "eta_idler"):
            v = getattr(self, name)
            if not is_real(v) or not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v!r}")
        for name in ("dark_signal", "dark_idler"):
            v = getattr(self, name)
            if not is_real(v) or v < 0:
                raise ConfigError(f"{name} must be non-negative, got {v!r}")
        if not is_int(self.seed) or not 0 <= self.seed < _SEED_LIMIT:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not is_int(self.n_max) or self.n_max < 1:
            raise ConfigError(f"n_max must be a positive integer, got {self.n_max!r}")
        if self.geometry not in ("twin_beam", "collinear"):
            raise ConfigError(f"geometry must be 'twin_beam' or 'collinear', got {self.geometry!r}")

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _blocks(pulses: int):
    return [(b, min(BLOCK_SIZE, pulses - b * BLOCK_SIZE)) for b in range(-(-pulses // BLOCK_SIZE))]


def _draw_pairs(rng, cfg: ExperimentConfig, size: int) -> np.ndarray:
    mean = cfg.mean_pairs_per_pulse
    if cfg.modes is None:
        return rng.poisson(mean, size)
    # sum of `modes` geometric emitters, each with mean mean/modes
    return rng.negative_binomial(cfg.modes, 1.0 / (1.0 + mean / cfg.modes), size)


def _detect(rng, photons, eta, dark, size):
    clicks = rng.binomial(photons, eta)
    if dark > 0.0:
        clicks = clicks + rng.poisson(dark, size)
    return clicks


def _twin_block(cfg: ExperimentConfig, block: int, size: int) -> np.ndarray:
    rng = _block_rng(cfg.seed, block)
    k = _draw_pairs(rng, cfg, size)
    n1 = _detect(rng, k, cfg.eta_signal, cfg.dark_signal, size)
    n2 = _detect(rng, k, cfg.eta_idler, cfg.dark_idler, size)
    width = cfg.n_max + 1
    keep = (n1 <= cfg.n_max) & (n2 <= cfg.n_max)
    return np.bincount(n1[keep] * width + n2[keep], minlength=width * width)


def _collinear_block(cfg: ExperimentConfig, block: int, size: int) -> np.ndarray:
    rng = _block_rng(cfg.seed, block)
    k = _draw_pairs(rng, cfg, size)
    n = _detect(rng, 2 * k, cfg.eta_signal, cfg.dark_signal, size)
    return np.bincount(n[n <= cfg.n_max], minlength=cfg.n_max + 1)


def _run(block_fn, cfg: ExperimentConfig, workers: int) -> np.ndarray:
    blocks = _blocks(cfg.pulses)
    if workers <= 1 or len(blocks) == 1:
        tallies = [block_fn(cfg, b, size) for b, size in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(lambda bs: block_fn(cfg, *bs), blocks))
    total = tallies[0].astype(np.int64)
    for t in tallies[1:]:
        total += t
    return total


def simulate_twin_beam(config: ExperimentConfig, workers: int = 1) -> JointCountHistogram:
    """Heralded coincidence histogram ``counts[n1, n2]`` over ``config.pulses`` pulses.

    Readings above ``n_max`` on either detector stay in ``trials`` but are
    not binned.
    """
    if config.geometry != "twin_beam":
        raise ConfigError("simulate_twin_beam needs geometry 'twin_beam'")
    width = config.n_max + 1
    counts = _run(_twin_block, config, workers).reshape(width, width)
    return JointCountHistogram(counts, config.pulses)


def simulate_collinear(config: ExperimentConfig, workers: int = 1) -> CountHistogram:
    """Single-detector histogram where both photons of each pair share the beam."""
    if config.geometry != "collinear":
        raise ConfigError("simulate_collinear needs geometry 'collinear'")
    return CountHistogram(_run(_collinear_block, config, workers), config.pulses)


def simulate(config: ExperimentConfig, workers: int = 1) -> CountHistogram | JointCountHistogram:
    if config.geometry == "twin_beam":
        return simulate_twin_beam(config, workers)
    return simulate_collinear(config, workers)
