"""Large-system limits of both access regimes.

As K and N grow at a fixed ratio, averages over channels become
expectations over the unit exponential gain law.  Under partition every
transmitter water-fills at the same level ``beta*``; under sharing with SIC
the levels form a nondecreasing chain ``beta*_1 <= beta*_2 <= ...`` where
transmitter k fills on top of transmitter k-1's water surface.

Chain levels and rates are nested integrals over the region where every
earlier transmitter is active.  Depths up to ``quad_depth_limit`` use
nested adaptive quadrature; deeper ones use Monte Carlo with one common
sample set, so the power estimator stays monotone in the level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import MCVarianceTooHigh, NonConvergence
from .quadrature import integrate_batch, integrate_semi_infinite

LOG2E = 1.0 / math.log(2.0)

# root searches stop at this relative bracket width
ROOT_REL_WIDTH = 1e-10


@dataclass(frozen=True)
class AsymptoticConfig:
    p_max: float
    num_transmitters: int = 1
    noise_variance: float = 1.0
    quad_rel_tol: float = 1e-9
    tail_cutoff: float = 50.0
    mc_samples: int = 200_000
    quad_depth_limit: int = 3
    mc_seed: int = 0

    def __post_init__(self):
        if not self.p_max > 0 or not self.noise_variance > 0:
            raise ValueError("p_max and noise_variance must be positive")
        if self.num_transmitters < 1:
            raise ValueError("num_transmitters must be at least 1")
        if not self.quad_rel_tol > 0 or self.mc_samples < 1 or self.quad_depth_limit < 1:
            raise ValueError("tolerances, sample counts and depth limits must be positive")
        if math.exp(-self.tail_cutoff) >= self.quad_rel_tol:
            raise ValueError(f"tail_cutoff {self.tail_cutoff} leaves a tail above quad_rel_tol")

    @classmethod
    def from_snr_db(cls, snr_db: float, num_transmitters: int = 1, noise_variance: float = 1.0,
                    **kwargs) -> AsymptoticConfig:
        return cls(noise_variance * 10.0 ** (snr_db / 10.0), num_transmitters, noise_variance, **kwargs)


@dataclass(frozen=True)
class PartitionAsymptotics:
    beta: float
    omega: float
    rate: float
    nse: float


@dataclass(frozen=True)
class WaterLevelChain:
    """Water levels and per-channel rates of transmitters 1..K under sharing.

    ``methods[k-1]`` is ``"quadrature"`` or ``"monte-carlo"``; the stderr
    entries are zero on the quadrature path.
    """

    levels: tuple[float, ...]
    rates: tuple[float, ...]
    methods: tuple[str, ...]
    level_stderr: tuple[float, ...] = field(default=())
    rate_stderr: tuple[float, ...] = field(default=())

    def __len__(self):
        return len(self.levels)


class BLEstimate(NamedTuple):
    nse: float
    overcommitted: bool  # K * L > N: more channels promised than exist


# -- single-transmitter (partition) limits ---------------------------------

def water_level_residual(beta: float, noise: float, p_max: float, *, rel_tol: float = 1e-9,
                         cutoff: float = 50.0) -> float:
    """Average water-filled power at level ``beta`` minus ``p_max``."""
    if beta <= 0:
        return -p_max
    return integrate_semi_infinite(lambda x: beta - noise / x, noise / beta,
                                   rel_tol=rel_tol, cutoff=cutoff) - p_max


def bisect_increasing(g: Callable[[float], float], lo: float, hi: float,
                      rel_width: float = ROOT_REL_WIDTH, max_iter: int = 400) -> float:
    """Root of a nondecreasing ``g`` bracketed by ``g(lo) <= 0 < g(hi)``."""
    for _ in range(max_iter):
        if hi - lo <= rel_width * hi:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    raise NonConvergence("bisection did not reach its bracket width")


def _expand_upward(g: Callable[[float], float], lo: float, start: float) -> tuple[float, float]:
    hi = start
    for _ in range(200):
        if g(hi) > 0:
            return lo, hi
        lo, hi = hi, 2.0 * hi
    raise NonConvergence("could not bracket the water level")


def solve_beta_star(noise: float, p_max: float, *, rel_tol: float = 1e-9, cutoff: float = 50.0) -> float:
    """Common water level of partition transmitters in the large-system limit."""
    if not noise > 0 or not p_max > 0:
        raise ValueError("noise and p_max must be positive")

    def g(beta):
        return water_level_residual(beta, noise, p_max, rel_tol=rel_tol, cutoff=cutoff)

    lo, hi = _expand_upward(g, 0.0, noise + p_max)
    return bisect_increasing(g, lo, hi)


def rate_inf(beta: float, noise: float, *, rel_tol: float = 1e-9, cutoff: float = 50.0) -> float:
    """Per-channel rate of one water-filling transmitter, bits/s/Hz."""
    if not beta > 0:
        raise ValueError("water level must be positive")
    return integrate_semi_infinite(lambda x: LOG2E * np.log(beta * x / noise), noise / beta,
                                   rel_tol=rel_tol, cutoff=cutoff)


def omega_inf(beta: float, noise: float) -> float:
    """Fraction of channels a water-filling transmitter leaves unused.

    A channel stays dark when its level ``beta`` is below ``noise / g``, i.e.
    ``g < noise / beta``.
    """
    if not beta > 0:
        raise ValueError("water level must be positive")
    return -math.expm1(-noise / beta)


def bl_thresholds(beta: float, noise: float) -> tuple[float, float]:
    """(unused, used) channel fractions of one unconstrained transmitter.

    Both are candidates for the point where a per-transmitter cap L/N starts
    to bind; the unused fraction is the literal probability, the used one
    the fraction a cap actually has to undercut.
    """
    unused = omega_inf(beta, noise)
    return unused, 1.0 - unused


def nse_partition_inf(num_transmitters: int, omega: float, rate: float) -> float:
    """Geometric-series network efficiency ``sum_k omega^(k-1) * rate``."""
    if not 0.0 <= omega <= 1.0:
        raise ValueError(f"omega must lie in [0, 1], got {omega!r}")
    if abs(1.0 - omega) < 1e-9:
        return num_transmitters * rate
    return (1.0 - omega ** num_transmitters) / (1.0 - omega) * rate


def partition_asymptotics(noise: float, p_max: float, num_transmitters: int, *,
                          rel_tol: float = 1e-9, cutoff: float = 50.0) -> PartitionAsymptotics:
    beta = solve_beta_star(noise, p_max, rel_tol=rel_tol, cutoff=cutoff)
    omega = omega_inf(beta, noise)
    r = rate_inf(beta, noise, rel_tol=rel_tol, cutoff=cutoff)
    return PartitionAsymptotics(beta, omega, r, nse_partition_inf(num_transmitters, omega, r))


def nse_partition_bl(num_transmitters: int, num_channels: int, cap: int, rate: float) -> BLEstimate:
    """``(K L / N) * rate``, flagged when K transmitters cannot each get L channels."""
    if not 1 <= cap <= num_channels:
        raise ValueError(f"cap must lie in [1, {num_channels}], got {cap!r}")
    value = num_transmitters * cap / num_channels * rate
    return BLEstimate(value, num_transmitters * cap > num_channels)


def optimal_bl(num_transmitters: int, num_channels: int, omega: float, rounding: str = "ceil") -> int:
    """Smallest cap whose limited network efficiency reaches the unlimited one.

    ``rounding="round"`` rounds the threshold to the nearest integer instead
    of taking its ceiling.
    """
    if num_transmitters < 1 or num_channels < 1:
        raise ValueError("K and N must be positive")
    if not 0.0 <= omega < 1.0:
        raise ValueError(f"omega must lie in [0, 1), got {omega!r}")
    series = (1.0 - omega ** num_transmitters) / (1.0 - omega)
    threshold = num_channels / num_transmitters * series
    if rounding == "ceil":
        # absorb rounding noise when the threshold is an integer
        cap = math.ceil(threshold - 1e-9 * threshold)
    elif rounding == "round":
        cap = math.floor(threshold + 0.5)
    else:
        raise ValueError(f"rounding must be 'ceil' or 'round', got {rounding!r}")
    return min(max(cap, 1), num_channels)


# -- sharing chain ------------------------------------------------------------

def _power_phi(c, x, beta):
    return beta - c / x


def _rate_phi(c, x, beta):
    return LOG2E * np.log(beta * x / c)


def _cascade(levels, noise, phi, cfg: AsymptoticConfig) -> float:
    """Expectation of ``phi`` over the region where transmitters 1..k-1 are active.

    Level j integrates its gain from the point where transmitter j starts
    transmitting on top of ``c = beta_{j-1} * gain_{j-1}`` (``noise`` for
    the first), and hands ``beta_j * gain_j`` to the next level.
    """
    last = len(levels) - 1

    def level(j, c):
        beta = levels[j]
        if j == last:
            def f(x, i):
                return phi(c[i], x, beta)
        else:
            def f(x, i):
                return level(j + 1, beta * x)
        return integrate_batch(f, c / beta, rel_tol=cfg.quad_rel_tol, cutoff=cfg.tail_cutoff)

    return float(level(0, np.array([noise]))[0])


class _ChainSamples:
    """Common exponential samples for Monte Carlo chain estimates at depth k."""

    def __init__(self, k: int, cfg: AsymptoticConfig, samples: int | None = None):
        n = cfg.mc_samples if samples is None else samples
        seq = np.random.SeedSequence(entropy=cfg.mc_seed, spawn_key=(k,))
        rng = np.random.Generator(np.random.PCG64(seq))
        self.gains = -np.log1p(-rng.random((k, n)))
        self.noise = cfg.noise_variance

    def prepare(self, levels):
        """Feasible mask of the first k-1 transmitters and the floor they leave."""
        lam = self.gains
        mask = lam[0] >= self.noise / levels[0]
        for j in range(1, len(levels)):
            mask &= levels[j] * lam[j] >= levels[j - 1] * lam[j - 1]
        floor = levels[-1] * lam[len(levels) - 1]
        return mask, floor

    def power(self, mask, floor, beta):
        """Sample mean and stderr of the last transmitter's power at level beta."""
        x = self.gains[-1]
        v = np.where(mask, np.maximum(beta - floor / x, 0.0), 0.0)
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))

    def rate(self, mask, floor, beta):
        x = self.gains[-1]
        active = mask & (beta * x > floor)
        v = np.zeros(x.size)
        v[active] = LOG2E * np.log(beta * x[active] / floor[active])
        return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))

    def slope(self, mask, floor, beta):
        return float(np.mean(mask & (beta * self.gains[-1] > floor)))


def _mc_level(prev_levels, cfg: AsymptoticConfig, samples: int | None = None) -> tuple[float, float]:
    """Monte Carlo water level of transmitter ``len(prev_levels) + 1`` and its stderr."""
    k = len(prev_levels) + 1
    mc = _ChainSamples(k, cfg, samples)
    mask, floor = mc.prepare(prev_levels)

    def g(beta):
        return mc.power(mask, floor, beta)[0] - cfg.p_max

    lo = prev_levels[-1]
    while g(lo) > 0:
        lo *= 0.5
    lo, hi = _expand_upward(g, lo, 2.0 * prev_levels[-1])
    beta = bisect_increasing(g, lo, hi)
    slope = mc.slope(mask, floor, beta)
    if slope <= 0:
        raise MCVarianceTooHigh(f"no Monte Carlo sample is active at depth {k}")
    se = mc.power(mask, floor, beta)[1] / slope
    if beta - prev_levels[-1] < 3.0 * se:
        raise MCVarianceTooHigh(
            f"level {k} sits within 3 standard errors ({se:.3g}) of level {k - 1}; raise mc_samples")
    return float(beta), float(se)


def _quad_level(prev_levels, cfg: AsymptoticConfig) -> float:
    def g(beta):
        return _cascade((*prev_levels, beta), cfg.noise_variance, _power_phi, cfg) - cfg.p_max

    lo = prev_levels[-1]
    while g(lo) > 0:
        lo *= 0.5
    lo, hi = _expand_upward(g, lo, 2.0 * prev_levels[-1])
    return bisect_increasing(g, lo, hi)


def chain_level_mc(prev_levels, cfg: AsymptoticConfig, samples: int | None = None) -> tuple[float, float]:
    """Monte Carlo estimate (level, stderr) regardless of the quadrature depth limit."""
    return _mc_level(tuple(prev_levels), cfg, samples)


def chain_rate_mc(levels, cfg: AsymptoticConfig, samples: int | None = None) -> tuple[float, float]:
    """Monte Carlo estimate (rate, stderr) of the last transmitter in ``levels``."""
    levels = tuple(levels)
    if len(levels) == 1:
        raise ValueError("use rate_inf for the first transmitter")
    mc = _ChainSamples(len(levels), cfg, samples)
    mask, floor = mc.prepare(levels[:-1])
    return mc.rate(mask, floor, levels[-1])


def chain_rate_quad(levels, cfg: AsymptoticConfig) -> float:
    return _cascade(tuple(levels), cfg.noise_variance, _rate_phi, cfg)


def solve_beta_chain(cfg: AsymptoticConfig) -> WaterLevelChain:
    """Water levels and per-channel rates of every sharing transmitter."""
    beta1 = solve_beta_star(cfg.noise_variance, cfg.p_max, rel_tol=cfg.quad_rel_tol, cutoff=cfg.tail_cutoff)
    levels = [beta1]
    rates = [rate_inf(beta1, cfg.noise_variance, rel_tol=cfg.quad_rel_tol, cutoff=cfg.tail_cutoff)]
    methods = ["quadrature"]
    level_se = [0.0]
    rate_se = [0.0]
    for k in range(2, cfg.num_transmitters + 1):
        if k <= cfg.quad_depth_limit:
            beta = _quad_level(levels, cfg)
            levels.append(beta)
            rates.append(chain_rate_quad(levels, cfg))
            level_se.append(0.0)
            rate_se.append(0.0)
            methods.append("quadrature")
        else:
            beta, se = _mc_level(tuple(levels), cfg)
            levels.append(beta)
            r, rse = chain_rate_mc(levels, cfg)
            rates.append(r)
            level_se.append(se)
            rate_se.append(rse)
            methods.append("monte-carlo")
    return WaterLevelChain(tuple(levels), tuple(rates), tuple(methods), tuple(level_se), tuple(rate_se))


def rate_k_inf(chain: WaterLevelChain, k: int, cfg: AsymptoticConfig) -> float:
    """Per-channel rate of the k-th sharing transmitter (1-based)."""
    if not 1 <= k <= len(chain):
        raise ValueError(f"chain has {len(chain)} levels, asked for k={k}")
    levels = chain.levels[:k]
    if k == 1:
        return rate_inf(levels[0], cfg.noise_variance, rel_tol=cfg.quad_rel_tol, cutoff=cfg.tail_cutoff)
    if k <= cfg.quad_depth_limit:
        return chain_rate_quad(levels, cfg)
    return chain_rate_mc(levels, cfg)[0]


def nse_sharing_inf(chain: WaterLevelChain) -> float:
    return float(sum(chain.rates))
