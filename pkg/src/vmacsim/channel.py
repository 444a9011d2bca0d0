"""Network configuration and seeded sampling of exponential channel gains.

Gains ``g = |h|^2`` of a circularly symmetric complex Gaussian coefficient
with unit total variance follow the unit-mean exponential law, so the
coefficients themselves are never generated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

BudgetMode = Literal["accessible", "total"]

_BUDGET_MODES = ("accessible", "total")


@dataclass(frozen=True)
class NetworkConfig:
    """Static description of a K-transmitter, N-channel vector MAC.

    Parameters
    ----------
    num_transmitters : int
        Number of transmitters K, indexed by arrival order.
    num_channels : int
        Number of orthogonal unit-bandwidth channels N.
    p_max : float
        Average power per channel.  A transmitter's total budget is this
        value times the number of channels it may water-fill over
        (``budget="accessible"``) or times N (``budget="total"``).
    noise_variance : float
        Receiver noise power per channel.
    budget : {"accessible", "total"}
        Power normalization; see :meth:`power_budget`.
    """

    num_transmitters: int
    num_channels: int
    p_max: float
    noise_variance: float = 1.0
    budget: BudgetMode = "accessible"

    def __post_init__(self):
        if int(self.num_transmitters) != self.num_transmitters or self.num_transmitters < 1:
            raise ValueError(f"num_transmitters must be a positive integer, got {self.num_transmitters!r}")
        if int(self.num_channels) != self.num_channels or self.num_channels < 1:
            raise ValueError(f"num_channels must be a positive integer, got {self.num_channels!r}")
        if not (self.noise_variance > 0 and math.isfinite(self.noise_variance)):
            raise ValueError(f"noise_variance must be positive, got {self.noise_variance!r}")
        if not (self.p_max > 0 and math.isfinite(self.p_max)):
            raise ValueError(f"p_max must be positive, got {self.p_max!r}")
        if self.budget not in _BUDGET_MODES:
            raise ValueError(f"budget must be one of {_BUDGET_MODES}, got {self.budget!r}")

    @classmethod
    def from_snr_db(cls, num_transmitters: int, num_channels: int, snr_db: float,
                    noise_variance: float = 1.0, budget: BudgetMode = "accessible") -> NetworkConfig:
        p_max = noise_variance * 10.0 ** (snr_db / 10.0)
        return cls(num_transmitters, num_channels, p_max, noise_variance, budget)

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.p_max / self.noise_variance)

    @property
    def load(self) -> float:
        """Transmitters per channel, K/N."""
        return self.num_transmitters / self.num_channels

    def power_budget(self, accessible: int) -> float:
        """Total power a transmitter spends over ``accessible`` channels."""
        if self.budget == "total":
            return self.num_channels * self.p_max
        return accessible * self.p_max


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must fit in 64 unsigned bits, got {self.master_seed!r}")
        if self.trial_index < 0:
            raise ValueError(f"trial_index must be nonnegative, got {self.trial_index!r}")


def derive_trial_seed(master_seed: int, trial_index: int) -> np.random.Generator:
    """Return the generator owned by one Monte Carlo trial.

    The master seed is the entropy of a :class:`numpy.random.SeedSequence`
    and the trial index its spawn key.  SeedSequence hashes both into the
    full 128-bit PCG64 state with a fixed, platform independent algorithm,
    so a (master_seed, trial_index) pair names the same stream everywhere
    and neighbouring indices give unrelated streams.
    """
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.PCG64(seq))


def gain_cdf(lam):
    """Unit-mean exponential c.d.f. ``1 - exp(-lam)``."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("gain_cdf is defined for nonnegative arguments only")
    out = -np.expm1(-lam)
    return float(out) if out.ndim == 0 else out


def gain_pdf(lam):
    lam = np.asarray(lam, dtype=float)
    out = np.where(lam < 0, 0.0, np.exp(-np.maximum(lam, 0.0)))
    return float(out) if out.ndim == 0 else out


def sample_gains(config: NetworkConfig, seed: SeedSpec) -> np.ndarray:
    """Draw the K x N gain matrix of one trial by inverse-c.d.f. sampling."""
    rng = derive_trial_seed(seed.master_seed, seed.trial_index)
    u = rng.random((config.num_transmitters, config.num_channels))
    return -np.log1p(-u)
