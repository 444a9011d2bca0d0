"""Single-transmitter water-filling over a set of candidate channels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyCandidateSet, NonpositiveBudget


@dataclass(frozen=True)
class WaterfillProblem:
    """Candidate channels with their effective noise ``alpha / g`` and a budget.

    ``candidates`` is a sequence of ``(channel_id, nu)`` pairs.
    """

    candidates: tuple[tuple[int, float], ...]
    budget: float

    def __post_init__(self):
        cands = tuple((int(c), float(nu)) for c, nu in self.candidates)
        object.__setattr__(self, "candidates", cands)
        ids = [c for c, _ in cands]
        if len(set(ids)) != len(ids):
            raise ValueError("candidate channel ids must be distinct")
        for c, nu in cands:
            if not (nu > 0 and math.isfinite(nu)):
                raise ValueError(f"effective noise of channel {c} must be positive and finite, got {nu!r}")

    @classmethod
    def from_arrays(cls, channel_ids: Sequence[int], nu: Sequence[float], budget: float) -> WaterfillProblem:
        return cls(tuple(zip(channel_ids, nu)), budget)


@dataclass(frozen=True)
class WaterfillSolution:
    water_level: float
    powers: Mapping[int, float]
    support: frozenset = field(default_factory=frozenset)


def effective_noise(alpha: float, g: float) -> float | None:
    """Return ``alpha / g``, or ``None`` when the channel has zero gain."""
    if not alpha > 0:
        raise ValueError(f"noise-plus-interference must be positive, got {alpha!r}")
    if g < 0:
        raise ValueError(f"channel gain must be nonnegative, got {g!r}")
    if g == 0:
        return None
    return alpha / g


def water_level(nu: np.ndarray, budget: float) -> float:
    """Water level ``beta`` solving ``sum(max(beta - nu, 0)) == budget``.

    Walks the ascending effective noises and stops at the first active-set
    size m whose level ``(budget + sum(nu[:m])) / m`` clears ``nu[m-1]``
    without reaching ``nu[m]``.
    """
    s = np.sort(nu)
    m = np.arange(1, s.size + 1)
    levels = (budget + np.cumsum(s)) / m
    above = levels > s
    below_next = np.empty_like(above)
    below_next[:-1] = levels[:-1] <= s[1:]
    below_next[-1] = True
    hit = np.flatnonzero(above & below_next)
    if hit.size:
        return float(levels[hit[0]])
    # rounding can hide the exact crossing; the valid sizes form a prefix
    return float(levels[np.flatnonzero(above)[-1]])


def allocate(nu: np.ndarray, budget: float) -> tuple[float, np.ndarray]:
    """Array form of :func:`water_fill`: returns ``(beta, powers)``."""
    if nu.size == 0:
        raise EmptyCandidateSet("no channels to water-fill")
    if not budget > 0:
        raise NonpositiveBudget(f"power budget must be positive, got {budget!r}")
    beta = water_level(nu, budget)
    return beta, np.maximum(beta - nu, 0.0)


def water_fill(problem: WaterfillProblem, support_tol: float = 0.0) -> WaterfillSolution:
    """Rate-maximizing power split ``p_n = max(0, beta - nu_n)``.

    Parameters
    ----------
    problem : WaterfillProblem
        Candidate channels and total budget.
    support_tol : float
        Powers at or below this value are left out of the support set.

    Returns
    -------
    WaterfillSolution
        Water level, power per channel id and the set of channels with
        power above ``support_tol``.
    """
    if not problem.candidates:
        raise EmptyCandidateSet("no channels to water-fill")
    # ties in nu are resolved by channel id
    order = sorted(problem.candidates, key=lambda c: (c[1], c[0]))
    ids = [c for c, _ in order]
    nu = np.array([v for _, v in order])
    beta, p = allocate(nu, problem.budget)
    powers = dict(zip(ids, p.tolist()))
    support = frozenset(c for c, v in powers.items() if v > support_tol)
    return WaterfillSolution(beta, powers, support)
