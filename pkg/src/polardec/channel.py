"""BPSK over AWGN: modulation, noise injection, channel LLRs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ChannelParams", "modulate", "add_noise", "llr"]


@dataclass(frozen=True)
class ChannelParams:
    """E_b/N_0 operating point; the noise variance folds in the code rate."""

    ebn0_db: float
    code_rate: float

    def __post_init__(self):
        if self.code_rate <= 0:
            raise ValueError("code rate must be positive")

    @property
    def sigma2(self) -> float:
        """Noise variance per real dimension for unit-energy BPSK symbols."""
        return 1.0 / (2.0 * self.code_rate * 10.0 ** (self.ebn0_db / 10.0))


def modulate(bits) -> np.ndarray:
    """BPSK mapping: bit 0 -> +1.0, bit 1 -> -1.0."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def add_noise(symbols, params: ChannelParams, rng) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise of variance ``params.sigma2``."""
    symbols = np.asarray(symbols, dtype=np.float64)
    return symbols + rng.standard_normal(symbols.shape) * np.sqrt(params.sigma2)


def llr(y, params: ChannelParams) -> np.ndarray:
    """Exact channel LLR for BPSK over AWGN: 2 y / sigma^2."""
    return 2.0 * np.asarray(y, dtype=np.float64) / params.sigma2
