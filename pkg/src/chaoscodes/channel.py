"""AWGN channel, SNR calibration and seeded analog source sampling."""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .codes import Codeword, CodeSpec, encode_batch

CALIBRATION_SEED = 20_111_017
CALIBRATION_BLOCKS = 100_000


@dataclass(frozen=True)
class ChannelObservation:
    received: np.ndarray
    sigma2: float

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("noise variance must be non-negative")

    def __len__(self) -> int:
        return len(self.received)


def trial_rng(master_seed: int, index: int) -> np.random.Generator:
    """Generator for one trial (or frame), a pure function of ``(master_seed, index)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(index,))))


def sample_source(k: int, rng: np.random.Generator) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be >= 1")
    return rng.uniform(-1.0, 1.0, size=k)


def awgn(codeword, sigma2: float, rng: np.random.Generator) -> ChannelObservation:
    x = codeword.symbols if isinstance(codeword, Codeword) else np.asarray(codeword, dtype=float)
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    # draw even when sigma2 == 0 so the stream position does not depend on SNR
    z = rng.standard_normal(x.shape)
    return ChannelObservation(x + np.sqrt(sigma2) * z, float(sigma2))


@functools.lru_cache(maxsize=None)
def _energy(spec, calibration_seed: int) -> float:
    if not isinstance(spec, CodeSpec):
        # digital systems use unit-energy PAM
        return 1.0
    rng = np.random.default_rng(calibration_seed)
    lo, hi = spec.source_bounds
    src = rng.uniform(lo, hi, size=(CALIBRATION_BLOCKS, spec.k))
    return float(np.mean(encode_batch(spec, src) ** 2))


def avg_symbol_energy(spec, calibration_seed: int = CALIBRATION_SEED) -> float:
    """Mean squared channel symbol, Monte Carlo over uniform sources (cached)."""
    return _energy(spec, calibration_seed)


def snr_to_sigma2(snr_db: float, spec) -> float:
    return avg_symbol_energy(spec) / 10.0 ** (snr_db / 10.0)
