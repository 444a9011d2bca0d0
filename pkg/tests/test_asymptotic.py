import math

import numpy as np
import pytest
from scipy import integrate, optimize, special

from vmacsim.asymptotic import (
    AsymptoticConfig,
    bl_thresholds,
    chain_level_mc,
    chain_rate_mc,
    chain_rate_quad,
    nse_partition_bl,
    nse_partition_inf,
    nse_sharing_inf,
    omega_inf,
    optimal_bl,
    partition_asymptotics,
    rate_inf,
    rate_k_inf,
    solve_beta_chain,
    solve_beta_star,
    water_level_residual,
)
from vmacsim.errors import MCVarianceTooHigh

LN2 = math.log(2)


def beta_star_oracle(noise, p_max):
    """Closed-form mean power beta e^-a - noise E1(a), a = noise / beta, solved by brentq."""
    def h(beta):
        a = noise / beta
        return beta * math.exp(-a) - noise * special.exp1(a) - p_max
    return optimize.brentq(h, 1e-9, 10 * (noise + p_max), xtol=1e-14, rtol=1e-14)


def level2_oracle(beta1, noise, p_max):
    """Second sharing level by scipy double integration over the region where transmitter 1 is on."""
    def power(beta2):
        val, _ = integrate.dblquad(
            lambda l2, l1: (beta2 - beta1 * l1 / l2) * math.exp(-l1 - l2),
            noise / beta1, 60, lambda l1: beta1 * l1 / beta2, 60, epsabs=1e-12, epsrel=1e-11)
        return val - p_max
    return optimize.brentq(power, beta1, 20 * beta1, xtol=1e-12)


def rate2_oracle(beta1, beta2, noise):
    val, _ = integrate.dblquad(
        lambda l2, l1: math.log2(beta2 * l2 / (beta1 * l1)) * math.exp(-l1 - l2),
        noise / beta1, 60, lambda l1: beta1 * l1 / beta2, 60, epsabs=1e-12, epsrel=1e-11)
    return val


@pytest.mark.parametrize("snr_db", [-5.0, 0.0, 10.0, 20.0, 30.0])
def test_beta_star_matches_e1_oracle(snr_db):
    p = 10 ** (snr_db / 10)
    assert solve_beta_star(1.0, p) == pytest.approx(beta_star_oracle(1.0, p), rel=1e-8)


def test_beta_star_by_grid_scan():
    p = 10.0
    grid = np.linspace(12.9, 13.2, 3001)
    res = np.array([water_level_residual(b, 1.0, p) for b in grid])
    crossing = grid[np.argmax(res > 0)]
    assert abs(solve_beta_star(1.0, p) - crossing) <= grid[1] - grid[0]


def test_beta_star_scales_with_noise():
    assert solve_beta_star(3.0, 30.0) == pytest.approx(3.0 * solve_beta_star(1.0, 10.0), rel=1e-8)


@pytest.mark.parametrize("beta", [0.5, 2.5, 13.0, 105.0])
def test_rate_is_e1_over_ln2(beta):
    assert rate_inf(beta, 1.0) == pytest.approx(special.exp1(1 / beta) / LN2, rel=1e-9)


def test_pinned_values_at_10_db():
    # frozen from the E1 oracle above
    part = partition_asymptotics(1.0, 10.0, 25)
    assert part.beta == pytest.approx(13.0277617, rel=1e-7)
    assert part.omega == pytest.approx(0.0738871249, rel=1e-7)
    assert part.rate == pytest.approx(2.9794218653, rel=1e-8)


def test_omega_closed_form_and_thresholds():
    assert omega_inf(2.0, 1.0) == pytest.approx(1 - math.exp(-0.5))
    unused, used = bl_thresholds(2.0, 1.0)
    assert unused + used == pytest.approx(1.0)
    with pytest.raises(ValueError):
        omega_inf(0.0, 1.0)


def test_partition_series():
    assert nse_partition_inf(1, 0.3, 2.0) == pytest.approx(2.0)
    assert nse_partition_inf(3, 0.5, 1.0) == pytest.approx(1.75)
    assert nse_partition_inf(4, 1.0, 1.5) == pytest.approx(6.0)
    assert nse_partition_inf(4, 0.0, 1.5) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        nse_partition_inf(2, 1.5, 1.0)


def test_partition_bl_estimate():
    est = nse_partition_bl(25, 50, 2, 3.0)
    assert est.nse == pytest.approx(3.0) and not est.overcommitted
    assert nse_partition_bl(25, 50, 3, 3.0).overcommitted
    with pytest.raises(ValueError):
        nse_partition_bl(2, 5, 6, 1.0)


def test_optimal_bl():
    omega = omega_inf(solve_beta_star(1.0, 10.0), 1.0)
    # threshold (50/25) * (1 - omega^25) / (1 - omega) = 2.16
    assert optimal_bl(25, 50, omega) == 3
    assert optimal_bl(25, 50, omega, rounding="round") == 2
    assert optimal_bl(10, 50, 0.0) == 5
    assert optimal_bl(1, 50, 0.5) == 50
    assert optimal_bl(100, 50, 0.0) == 1
    with pytest.raises(ValueError):
        optimal_bl(2, 10, 1.0)
    with pytest.raises(ValueError):
        optimal_bl(2, 10, 0.1, rounding="floor")


@pytest.mark.parametrize("snr_db", [0.0, 10.0, 20.0])
def test_second_level_and_rate_match_scipy(snr_db):
    cfg = AsymptoticConfig.from_snr_db(snr_db, 2)
    chain = solve_beta_chain(cfg)
    b1 = beta_star_oracle(1.0, cfg.p_max)
    b2 = level2_oracle(b1, 1.0, cfg.p_max)
    assert chain.levels[1] == pytest.approx(b2, rel=1e-7)
    assert chain.rates[1] == pytest.approx(rate2_oracle(b1, b2, 1.0), rel=1e-7)
    assert chain.methods == ("quadrature", "quadrature")


def test_first_chain_rate_is_rate_inf():
    cfg = AsymptoticConfig.from_snr_db(10.0, 3)
    chain = solve_beta_chain(cfg)
    assert rate_k_inf(chain, 1, cfg) == rate_inf(chain.levels[0], 1.0)
    assert rate_k_inf(chain, 3, cfg) == pytest.approx(chain.rates[2], rel=1e-12)
    assert nse_sharing_inf(chain) == pytest.approx(sum(chain.rates))
    with pytest.raises(ValueError):
        rate_k_inf(chain, 4, cfg)


def test_monte_carlo_agrees_with_quadrature_at_depth_three():
    cfg = AsymptoticConfig.from_snr_db(10.0, 3, mc_samples=1_000_000, mc_seed=11)
    chain = solve_beta_chain(cfg)
    beta3, se = chain_level_mc(chain.levels[:2], cfg)
    assert abs(beta3 - chain.levels[2]) < 3 * se
    r3, rse = chain_rate_mc(chain.levels, cfg)
    assert abs(r3 - chain_rate_quad(chain.levels, cfg)) < 3 * rse


def test_deep_chain_switches_to_monte_carlo():
    cfg = AsymptoticConfig.from_snr_db(0.0, 5, mc_samples=100_000)
    chain = solve_beta_chain(cfg)
    assert chain.methods == ("quadrature",) * 3 + ("monte-carlo",) * 2
    assert all(s > 0 for s in chain.level_stderr[3:])
    assert list(chain.levels) == sorted(chain.levels)


def test_too_few_samples_raise():
    cfg = AsymptoticConfig.from_snr_db(10.0, 5, mc_samples=20)
    with pytest.raises(MCVarianceTooHigh):
        solve_beta_chain(cfg)


@pytest.mark.parametrize("kwargs", [
    dict(p_max=0.0),
    dict(p_max=1.0, noise_variance=0.0),
    dict(p_max=1.0, num_transmitters=0),
    dict(p_max=1.0, mc_samples=0),
    dict(p_max=1.0, tail_cutoff=5.0),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        AsymptoticConfig(**kwargs)
