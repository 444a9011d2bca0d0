"""Sequential water-filling under spectral partition and spectral sharing.

Transmitters are processed in arrival order.  Under partition a channel
with positive power is claimed and disappears for later arrivals.  Under
sharing every transmitter sees all channels; the receiver decodes the last
arrival first, so transmitter k is interfered by transmitters 1..k-1 only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .channel import NetworkConfig
from .waterfill import allocate

Scenario = Literal["partition", "sharing"]
SCENARIOS: tuple[str, ...] = ("partition", "sharing")

# powers at or below this fraction of p_max do not claim a channel
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class BLPolicy:
    """Bandwidth limit: at most ``cap`` channels per transmitter (None = no limit)."""

    cap: int | None = None

    def __post_init__(self):
        if self.cap is not None and (int(self.cap) != self.cap or self.cap < 1):
            raise ValueError(f"bandwidth cap must be a positive integer, got {self.cap!r}")

    def check(self, num_channels: int) -> None:
        if self.cap is not None and self.cap > num_channels:
            raise ValueError(f"bandwidth cap {self.cap} exceeds the {num_channels} available channels")


NO_BL = BLPolicy()


@dataclass(frozen=True)
class TransmitterResult:
    """Outcome for transmitter ``index`` (1-based arrival position).

    Channel ids are 0-based.  ``noise`` holds the noise-plus-interference
    level the transmitter water-filled against; ``water_level`` is NaN when
    it had nothing to fill.
    """

    index: int
    accessible: tuple[int, ...]
    used: tuple[int, ...]
    powers: np.ndarray
    sinrs: np.ndarray
    noise: np.ndarray
    water_level: float
    rate: float
    rate_per_channel: float
    accessible_fraction: float

    @property
    def spectral_efficiency(self) -> float:
        return self.accessible_fraction * self.rate_per_channel


@dataclass(frozen=True)
class ScenarioOutcome:
    scenario: str
    transmitters: tuple[TransmitterResult, ...]
    residual_noise: np.ndarray

    @property
    def nse(self) -> float:
        return network_spectral_efficiency(self)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(t, name) for t in self.transmitters])


def sinr(p: float, g: float, alpha: float) -> float:
    if not alpha > 0:
        raise ValueError(f"noise-plus-interference must be positive, got {alpha!r}")
    if p < 0 or g < 0:
        raise ValueError("power and gain must be nonnegative")
    return p * g / alpha


def rate(gammas) -> float:
    """Sum rate in bits/s over unit-bandwidth channels."""
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas < 0):
        raise ValueError("SINR values must be nonnegative")
    return float(np.sum(np.log2(1.0 + gammas)))


def rate_per_channel(total_rate: float, accessible: int) -> float:
    return total_rate / accessible if accessible else 0.0


def network_spectral_efficiency(outcome: ScenarioOutcome) -> float:
    return float(sum(t.spectral_efficiency for t in outcome.transmitters))


def select_subset(available: Sequence[int], scores: Sequence[float], bl: BLPolicy = NO_BL) -> tuple[int, ...]:
    """Channels a bandwidth-limited transmitter may water-fill over.

    ``scores`` is aligned with ``available``.  Without a cap the available
    set is returned unchanged (sorted); with cap L the L highest-scoring
    channels are kept, ties going to the lower channel id.
    """
    ids = np.asarray(available, dtype=np.intp)
    return tuple(_select(ids, np.asarray(scores, dtype=float), bl.cap).tolist())


def _select(ids: np.ndarray, scores: np.ndarray, cap: int | None) -> np.ndarray:
    if cap is None or ids.size <= cap:
        return np.sort(ids)
    best = np.lexsort((ids, -scores))[:cap]
    return np.sort(ids[best])


def _fill(config: NetworkConfig, k: int, cand: np.ndarray, gains: np.ndarray, alpha: np.ndarray):
    """Water-fill transmitter ``k`` over ``cand``; returns (beta, powers over N)."""
    n = config.num_channels
    powers = np.zeros(n)
    if cand.size == 0:
        return float("nan"), powers
    g = gains[cand]
    ok = g > 0
    if not ok.any():
        return float("nan"), powers
    beta, p = allocate(alpha[cand][ok] / g[ok], config.power_budget(cand.size))
    powers[cand[ok]] = p
    return beta, powers


def _result(config: NetworkConfig, k: int, cand: np.ndarray, beta: float, powers: np.ndarray,
            gains: np.ndarray, alpha: np.ndarray) -> TransmitterResult:
    gammas = powers * gains / alpha
    r = float(np.sum(np.log2(1.0 + gammas[cand])))
    used = np.flatnonzero(powers > SUPPORT_TOL * config.p_max)
    return TransmitterResult(
        index=k + 1,
        accessible=tuple(cand.tolist()),
        used=tuple(used.tolist()),
        powers=powers,
        sinrs=gammas,
        noise=alpha,
        water_level=beta,
        rate=r,
        rate_per_channel=rate_per_channel(r, cand.size),
        accessible_fraction=cand.size / config.num_channels,
    )


def _check(gains: np.ndarray, config: NetworkConfig, bl: BLPolicy) -> np.ndarray:
    gains = np.asarray(gains, dtype=float)
    if gains.shape != (config.num_transmitters, config.num_channels):
        raise ValueError(f"gain matrix has shape {gains.shape}, expected "
                         f"({config.num_transmitters}, {config.num_channels})")
    if np.any(gains < 0) or not np.all(np.isfinite(gains)):
        raise ValueError("channel gains must be finite and nonnegative")
    bl.check(config.num_channels)
    return gains


def run_partition(gains: np.ndarray, config: NetworkConfig, bl: BLPolicy = NO_BL) -> ScenarioOutcome:
    """Spectral partition: each arrival water-fills over unclaimed channels."""
    gains = _check(gains, config, bl)
    n = config.num_channels
    noise = np.full(n, config.noise_variance)
    free = np.ones(n, dtype=bool)
    results = []
    for k in range(config.num_transmitters):
        available = np.flatnonzero(free)
        cand = _select(available, gains[k, available], bl.cap)
        beta, powers = _fill(config, k, cand, gains[k], noise)
        res = _result(config, k, cand, beta, powers, gains[k], noise)
        free[list(res.used)] = False
        results.append(res)
    return ScenarioOutcome("partition", tuple(results), noise)


def run_sharing(gains: np.ndarray, config: NetworkConfig, bl: BLPolicy = NO_BL) -> ScenarioOutcome:
    """Spectral sharing with successive interference cancellation."""
    gains = _check(gains, config, bl)
    n = config.num_channels
    alpha = np.full(n, config.noise_variance)
    every = np.arange(n)
    results = []
    for k in range(config.num_transmitters):
        cand = _select(every, gains[k] / alpha, bl.cap)
        beta, powers = _fill(config, k, cand, gains[k], alpha)
        results.append(_result(config, k, cand, beta, powers, gains[k], alpha))
        alpha = alpha + powers * gains[k]
    return ScenarioOutcome("sharing", tuple(results), alpha)


def run_scenario(scenario: str, gains: np.ndarray, config: NetworkConfig, bl: BLPolicy = NO_BL) -> ScenarioOutcome:
    if scenario == "partition":
        return run_partition(gains, config, bl)
    if scenario == "sharing":
        return run_sharing(gains, config, bl)
    raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
