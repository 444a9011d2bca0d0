"""Seeded Monte Carlo campaigns and their result tables.

Trial ``t`` of every sweep point draws its gains from
``derive_trial_seed(master_seed, t)``, so points of one sweep see common
random numbers and any table is reproducible from its ExperimentSpec and seed alone.
Statistics are reduced in trial-index order whatever the execution order.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .asymptotic import (
    AsymptoticConfig,
    optimal_bl,
    partition_asymptotics,
    rate_k_inf,
    solve_beta_chain,
)
from .channel import NetworkConfig, SeedSpec, sample_gains
from .simulator import SCENARIOS, BLPolicy, run_scenario

DEFAULT_TRIALS = 200
DEFAULT_LOADS = tuple(round(0.1 * i, 1) for i in range(1, 11))
DEFAULT_SNRS = (0.0, 10.0, 20.0)
GRID_NOTE = "load and SNR grids are package defaults, not measured values"


@dataclass(frozen=True)
class SweepPoint:
    scenario: str
    num_transmitters: int
    num_channels: int
    snr_db: float
    cap: int | None = None
    budget: str = "accessible"

    def config(self) -> NetworkConfig:
        return NetworkConfig.from_snr_db(self.num_transmitters, self.num_channels, self.snr_db,
                                         budget=self.budget)


@dataclass(frozen=True)
class Aggregate:
    mean: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    scenarios: tuple[str, ...] = SCENARIOS
    num_channels: int = 50
    snr_db: tuple[float, ...] = (10.0,)
    loads: tuple[float, ...] = DEFAULT_LOADS
    caps: tuple[int, ...] | None = None
    n_list: tuple[int, ...] = ()
    num_transmitters: int | None = None
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    budget: str = "accessible"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for s in self.scenarios:
            if s not in SCENARIOS:
                raise ValueError(f"unknown scenario {s!r}")
        if not self.scenarios or not self.snr_db:
            raise ValueError("scenario and SNR grids must be nonempty")

    def provenance(self) -> dict:
        d = asdict(self)
        d["version"] = __version__
        d["config_hash"] = config_hash(asdict(self))
        return d


@dataclass
class ResultTable:
    """Rows of plain values under named columns, plus provenance metadata."""

    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def select(self, **where) -> list[dict]:
        out = []
        for r in self.rows:
            d = dict(zip(self.columns, r))
            if all(d[k] == v for k, v in where.items()):
                out.append(d)
        return out

    def value(self, **where) -> dict:
        hits = self.select(**where)
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match {where}")
        return hits[0]


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def aggregate(values: np.ndarray) -> Aggregate:
    """Mean and standard error (sample std / sqrt(n)); stderr is 0 for one trial."""
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    mean = float(np.mean(v))
    se = float(np.std(v, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Aggregate(mean, se, n)


def load_to_k(load: float, num_channels: int) -> int:
    return max(1, int(math.floor(load * num_channels + 0.5)))


# -- trial kernels (module level so worker processes can import them) ---------

def _trial_metrics(point: SweepPoint, master_seed: int, t: int) -> np.ndarray:
    cfg = point.config()
    gains = sample_gains(cfg, SeedSpec(master_seed, t))
    out = run_scenario(point.scenario, gains, cfg, BLPolicy(point.cap))
    return np.concatenate([[out.nse], out.column("rate_per_channel"), out.column("accessible_fraction")])


def _trial_cap_sweep(point: SweepPoint, caps: tuple, master_seed: int, t: int) -> np.ndarray:
    cfg = point.config()
    gains = sample_gains(cfg, SeedSpec(master_seed, t))
    return np.array([run_scenario(point.scenario, gains, cfg, BLPolicy(c)).nse for c in caps])


def _chunk(fn, args, idx):
    return [fn(*args, t) for t in idx]


def _map_trials(fn, args: tuple, trials: int, workers: int) -> np.ndarray:
    if workers <= 1:
        return np.array([fn(*args, t) for t in range(trials)])
    chunks = [range(s, min(s + 16, trials)) for s in range(0, trials, 16)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_chunk, [fn] * len(chunks), [args] * len(chunks), chunks)
        return np.array([row for part in parts for row in part])


def run_trials(point: SweepPoint, trials: int, master_seed: int, workers: int = 1) -> dict[str, Aggregate]:
    """Aggregate NSE, per-transmitter rate per channel and accessible fraction.

    Keys are ``"nse"``, ``"rate_per_channel_k{k}"`` and ``"omega_k{k}"``
    with 1-based k.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    data = _map_trials(_trial_metrics, (point, master_seed), trials, workers)
    k = point.num_transmitters
    stats = {"nse": aggregate(data[:, 0])}
    for i in range(k):
        stats[f"rate_per_channel_k{i + 1}"] = aggregate(data[:, 1 + i])
    for i in range(k):
        stats[f"omega_k{i + 1}"] = aggregate(data[:, 1 + k + i])
    return stats


def cap_sweep(point: SweepPoint, caps: Sequence[int | None], trials: int, master_seed: int,
              workers: int = 1) -> np.ndarray:
    """Per-trial NSE for every cap in ``caps``; shape ``(trials, len(caps))``.

    All caps of a trial share its gain matrix.
    """
    return _map_trials(_trial_cap_sweep, (point, tuple(caps), master_seed), trials, workers)


def _asym_cfg(snr_db: float, k: int, asym: dict | None) -> AsymptoticConfig:
    return AsymptoticConfig.from_snr_db(snr_db, k, **(asym or {}))


def _long_rows(coords: tuple, stats: dict[str, Aggregate]) -> list[tuple]:
    return [(*coords, name, s.mean, s.stderr, s.trials) for name, s in sorted(stats.items())]


def _exact(value: float, trials: int) -> Aggregate:
    return Aggregate(float(value), 0.0, trials)


# -- figure replications ------------------------------------------------------

def fig2_convergence(snr_db: float = 20.0, num_transmitters: int = 2, n_list: Iterable[int] = (10, 25, 50),
                     trials: int = DEFAULT_TRIALS, master_seed: int = 0, workers: int = 1,
                     asym: dict | None = None) -> ResultTable:
    """Simulated sharing rate per channel against its large-system value, per N."""
    n_list = tuple(int(n) for n in n_list)
    if list(n_list) != sorted(set(n_list)):
        raise ValueError("N list must be strictly increasing")
    cfg = _asym_cfg(snr_db, num_transmitters, asym)
    chain = solve_beta_chain(cfg)
    asymptote = [rate_k_inf(chain, k, cfg) for k in range(1, num_transmitters + 1)]
    spec = ExperimentSpec("fig2", ("sharing",), snr_db=(snr_db,), n_list=n_list,
                          num_transmitters=num_transmitters, trials=trials, master_seed=master_seed, loads=())
    table = ResultTable(("N", "k", "sim_mean", "sim_stderr", "asymptotic", "trials"), [], spec.provenance())
    for n in n_list:
        stats = run_trials(SweepPoint("sharing", num_transmitters, n, snr_db), trials, master_seed, workers)
        for k in range(1, num_transmitters + 1):
            s = stats[f"rate_per_channel_k{k}"]
            table.rows.append((n, k, s.mean, s.stderr, asymptote[k - 1], s.trials))
    table.provenance["asymptotic_methods"] = list(chain.methods)
    return table


def bl_sweep(scenarios: Sequence[str], num_transmitters: int, num_channels: int, snr_db: float,
             trials: int, master_seed: int, caps: Sequence[int] | None = None,
             workers: int = 1, budget: str = "accessible") -> list[tuple]:
    """Long-form rows ``(scenario, load, K, L, statistic, mean, stderr, trials)``.

    Capped points carry statistic ``nse``; the uncapped point has an empty
    ``L`` and statistic ``nse_no_bl``.
    """
    caps = tuple(range(1, num_channels + 1)) if caps is None else tuple(caps)
    load = num_transmitters / num_channels
    rows = []
    for scenario in scenarios:
        point = SweepPoint(scenario, num_transmitters, num_channels, snr_db, budget=budget)
        data = cap_sweep(point, (*caps, None), trials, master_seed, workers)
        for j, cap in enumerate(caps):
            s = aggregate(data[:, j])
            rows.append((scenario, load, num_transmitters, cap, "nse", s.mean, s.stderr, s.trials))
        s = aggregate(data[:, -1])
        rows.append((scenario, load, num_transmitters, None, "nse_no_bl", s.mean, s.stderr, s.trials))
    return rows


BL_COLUMNS = ("scenario", "load", "K", "L", "statistic", "mean", "stderr", "trials")


def fig3_bl_sweep(num_channels: int = 50, snr_db: float = 10.0, loads: Iterable[float] = (0.2, 0.5, 0.8),
                  trials: int = DEFAULT_TRIALS, master_seed: int = 0, scenarios: Sequence[str] = SCENARIOS,
                  workers: int = 1) -> ResultTable:
    """Network spectral efficiency against the bandwidth cap L = 1..N."""
    loads = tuple(loads)
    spec = ExperimentSpec("fig3", tuple(scenarios), num_channels, (snr_db,), loads,
                          trials=trials, master_seed=master_seed)
    table = ResultTable(BL_COLUMNS, [], {**spec.provenance(), "note": GRID_NOTE})
    for scenario in scenarios:
        for load in loads:
            k = load_to_k(load, num_channels)
            table.rows.extend(bl_sweep((scenario,), k, num_channels, snr_db, trials, master_seed,
                                       workers=workers))
    return table


def empirical_best_cap(data: np.ndarray, caps: Sequence[int]) -> tuple[int, int]:
    """(cap, column) maximizing the mean NSE; the smallest cap wins ties."""
    means = data.mean(axis=0)
    j = int(np.argmax(means))
    return caps[j], j


def fig4_optimal_bl(num_channels: int = 50, snr_db: float = 10.0, loads: Iterable[float] = DEFAULT_LOADS,
                    trials: int = DEFAULT_TRIALS, master_seed: int = 0, workers: int = 1,
                    asym: dict | None = None) -> ResultTable:
    """Empirically best partition cap against the analytic threshold, per load."""
    loads = tuple(loads)
    spec = ExperimentSpec("fig4", ("partition",), num_channels, (snr_db,), loads,
                          trials=trials, master_seed=master_seed)
    table = ResultTable(("load", "K", "statistic", "mean", "stderr", "trials"), [],
                        {**spec.provenance(), "note": GRID_NOTE})
    cfg = _asym_cfg(snr_db, 1, asym)
    part = partition_asymptotics(cfg.noise_variance, cfg.p_max, 1, rel_tol=cfg.quad_rel_tol,
                                 cutoff=cfg.tail_cutoff)
    caps = tuple(range(1, num_channels + 1))
    for load in loads:
        k = load_to_k(load, num_channels)
        point = SweepPoint("partition", k, num_channels, snr_db)
        data = cap_sweep(point, caps, trials, master_seed, workers)
        best, j = empirical_best_cap(data, caps)
        analytic = optimal_bl(k, num_channels, part.omega)
        stats = {
            "empirical_L": _exact(best, trials),
            "analytic_L": _exact(analytic, trials),
            "analytic_L_round": _exact(optimal_bl(k, num_channels, part.omega, rounding="round"), trials),
            "abs_gap": _exact(abs(best - analytic), trials),
            "omega_inf": _exact(part.omega, trials),
            "beta_star": _exact(part.beta, trials),
            "nse_at_empirical_L": aggregate(data[:, j]),
            "nse_at_analytic_L": aggregate(data[:, analytic - 1]),
        }
        table.rows.extend(_long_rows((load, k), stats))
    return table


def fig5_fig6_load_sweep(num_channels: int = 50, snr_list: Iterable[float] = DEFAULT_SNRS,
                         loads: Iterable[float] = DEFAULT_LOADS, trials: int = DEFAULT_TRIALS,
                         master_seed: int = 0, scenario: str = "partition", workers: int = 1,
                         asym: dict | None = None) -> ResultTable:
    """NSE with and without bandwidth limiting across network loads.

    ``nse_bl`` is taken at the empirically best cap of each point; for the
    partition regime the analytic cap and its NSE are recorded as well.
    ``gain`` is the paired per-trial difference ``nse_bl - nse_no_bl``.
    """
    snr_list, loads = tuple(snr_list), tuple(loads)
    spec = ExperimentSpec("fig5" if scenario == "partition" else "fig6", (scenario,), num_channels,
                          snr_list, loads, trials=trials, master_seed=master_seed)
    table = ResultTable(("snr_db", "load", "K", "statistic", "mean", "stderr", "trials"), [],
                        {**spec.provenance(), "note": GRID_NOTE})
    caps = tuple(range(1, num_channels + 1))
    for snr in snr_list:
        part = None
        if scenario == "partition":
            cfg = _asym_cfg(snr, 1, asym)
            part = partition_asymptotics(cfg.noise_variance, cfg.p_max, 1, rel_tol=cfg.quad_rel_tol,
                                         cutoff=cfg.tail_cutoff)
        for load in loads:
            k = load_to_k(load, num_channels)
            data = cap_sweep(SweepPoint(scenario, k, num_channels, snr), (*caps, None), trials,
                             master_seed, workers)
            best, j = empirical_best_cap(data[:, :-1], caps)
            stats = {
                "nse_no_bl": aggregate(data[:, -1]),
                "nse_bl": aggregate(data[:, j]),
                "best_L": _exact(best, trials),
                "gain": aggregate(data[:, j] - data[:, -1]),
            }
            if part is not None:
                analytic = optimal_bl(k, num_channels, part.omega)
                stats["analytic_L"] = _exact(analytic, trials)
                stats["nse_bl_analytic"] = aggregate(data[:, analytic - 1])
            table.rows.extend(_long_rows((snr, load, k), stats))
    return table


def simulate_table(point: SweepPoint, master_seed: int, trial_index: int = 0) -> ResultTable:
    """Per-transmitter outcome of one trial, in the ``simulate`` CSV layout."""
    cfg = point.config()
    gains = sample_gains(cfg, SeedSpec(master_seed, trial_index))
    out = run_scenario(point.scenario, gains, cfg, BLPolicy(point.cap))
    prov = {"experiment": "simulate", **asdict(point), "master_seed": master_seed,
            "trial_index": trial_index, "version": __version__}
    prov["config_hash"] = config_hash({k: v for k, v in prov.items() if k != "version"})
    table = ResultTable(("k", "omega_k", "rate_per_channel_k", "phi_k"), [], prov)
    for t in out.transmitters:
        table.rows.append((t.index, t.accessible_fraction, t.rate_per_channel, t.spectral_efficiency))
    table.rows.append(("NSE", "total", out.nse, None))
    return table


def asymptotic_table(snr_db: float, num_transmitters: int, num_channels: int | None = None,
                     asym: dict | None = None) -> ResultTable:
    """Large-system quantities of both regimes.

    Columns ``k, statistic, value, stderr, method``; partition rows carry an
    empty ``k``.
    """
    cfg = _asym_cfg(snr_db, num_transmitters, asym)
    chain = solve_beta_chain(cfg)
    part = partition_asymptotics(cfg.noise_variance, cfg.p_max, num_transmitters,
                                 rel_tol=cfg.quad_rel_tol, cutoff=cfg.tail_cutoff)
    prov = {"experiment": "asymptotic", "snr_db": snr_db, "num_transmitters": num_transmitters,
            "num_channels": num_channels, **asdict(cfg), "version": __version__}
    prov["config_hash"] = config_hash({k: v for k, v in prov.items() if k != "version"})
    table = ResultTable(("k", "statistic", "value", "stderr", "method"), [], prov)
    table.rows += [
        (None, "partition_beta_star", part.beta, 0.0, "quadrature"),
        (None, "partition_omega_inf", part.omega, 0.0, "closed-form"),
        (None, "partition_rate_inf", part.rate, 0.0, "quadrature"),
        (None, "partition_nse_inf", part.nse, 0.0, "quadrature"),
    ]
    if num_channels is not None:
        table.rows.append((None, "partition_optimal_L", optimal_bl(num_transmitters, num_channels, part.omega),
                           0.0, "closed-form"))
    for k in range(len(chain)):
        m = chain.methods[k]
        table.rows.append((k + 1, "sharing_beta", chain.levels[k], chain.level_stderr[k], m))
        table.rows.append((k + 1, "sharing_rate_per_channel", chain.rates[k], chain.rate_stderr[k], m))
    se = math.sqrt(sum(s * s for s in chain.rate_stderr))
    table.rows.append((None, "sharing_nse_inf", float(sum(chain.rates)), se,
                       "monte-carlo" if se > 0 else "quadrature"))
    return table
