import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vmacsim import BLPolicy, NetworkConfig, SeedSpec, run_partition, run_scenario, run_sharing, sample_gains
from vmacsim.simulator import rate, rate_per_channel, select_subset, sinr


def instance(seed, k, n, snr_db=10.0):
    cfg = NetworkConfig.from_snr_db(k, n, snr_db)
    return sample_gains(cfg, SeedSpec(seed, 0)), cfg


instances = st.tuples(st.integers(0, 2 ** 32), st.integers(1, 5), st.integers(1, 20),
                      st.sampled_from([0.0, 10.0, 20.0]))


def test_partition_hand_example():
    cfg = NetworkConfig(2, 2, 1.0)
    out = run_partition(np.array([[1.0, 0.5], [2.0, 2.0]]), cfg)
    t1, t2 = out.transmitters
    # nu = (1, 2), budget 2: level 2.5 covers both channels
    assert t1.water_level == pytest.approx(2.5)
    np.testing.assert_allclose(t1.powers, [1.5, 0.5])
    assert t1.rate == pytest.approx(math.log2(2.5) + math.log2(1.25))
    assert t2.accessible == () and t2.rate == 0.0 and math.isnan(t2.water_level)
    assert out.nse == pytest.approx(t1.rate / 2)


def test_sharing_hand_example():
    cfg = NetworkConfig(2, 1, 3.0)
    out = run_sharing(np.array([[1.0], [2.0]]), cfg)
    t1, t2 = out.transmitters
    assert t1.powers[0] == pytest.approx(3.0) and t1.rate == pytest.approx(2.0)
    # transmitter 2 sees noise 1 + 3 and SINR 3 * 2 / 4
    assert t2.sinrs[0] == pytest.approx(1.5)
    assert out.residual_noise[0] == pytest.approx(10.0)


def test_zero_gain_channel_gets_no_power():
    cfg = NetworkConfig(1, 3, 1.0)
    out = run_partition(np.array([[0.0, 1.0, 2.0]]), cfg)
    assert out.transmitters[0].powers[0] == 0.0
    assert out.transmitters[0].powers.sum() == pytest.approx(3.0)


def test_select_subset_ties_go_to_lower_id():
    assert select_subset([4, 1, 7, 2], [1.0, 3.0, 3.0, 0.5], BLPolicy(2)) == (1, 7)
    assert select_subset([4, 1, 7], [2.0, 2.0, 2.0], BLPolicy(1)) == (1,)
    assert select_subset([4, 1, 7], [0.0, 0.0, 0.0]) == (1, 4, 7)


def test_bl_policy_validation():
    with pytest.raises(ValueError):
        BLPolicy(0)
    with pytest.raises(ValueError):
        BLPolicy(1.5)
    g, cfg = instance(0, 2, 4)
    with pytest.raises(ValueError):
        run_partition(g, cfg, BLPolicy(5))


def test_bad_inputs():
    cfg = NetworkConfig(2, 3, 1.0)
    with pytest.raises(ValueError):
        run_sharing(np.ones((3, 3)), cfg)
    with pytest.raises(ValueError):
        run_sharing(-np.ones((2, 3)), cfg)
    with pytest.raises(ValueError):
        run_scenario("broadcast", np.ones((2, 3)), cfg)
    with pytest.raises(ValueError):
        sinr(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        rate([-0.1])
    assert rate_per_channel(3.0, 0) == 0.0


@settings(max_examples=60, deadline=None)
@given(instances)
def test_sharing_sum_rate_telescopes(case):
    seed, k, n, snr = case
    g, cfg = instance(seed, k, n, snr)
    out = run_sharing(g, cfg)
    per_channel = sum(np.log2(1 + t.sinrs) for t in out.transmitters)
    received = sum(t.powers * g[t.index - 1] for t in out.transmitters)
    np.testing.assert_allclose(per_channel, np.log2(1 + received / cfg.noise_variance), rtol=1e-9)


@settings(max_examples=60, deadline=None)
@given(instances)
def test_sharing_fills_up_to_previous_level(case):
    seed, k, n, snr = case
    g, cfg = instance(seed, k, n, snr)
    out = run_sharing(g, cfg)
    levels = [t.noise for t in out.transmitters] + [out.residual_noise]
    for t in out.transmitters:
        on = t.powers > 0
        np.testing.assert_allclose(levels[t.index][on], t.water_level * g[t.index - 1][on], rtol=1e-9)


@settings(max_examples=60, deadline=None)
@given(instances, st.integers(1, 20))
def test_partition_claims_are_disjoint(case, cap):
    seed, k, n, snr = case
    g, cfg = instance(seed, k, n, snr)
    out = run_partition(g, cfg, BLPolicy(min(cap, n)))
    seen = set()
    for t in out.transmitters:
        assert seen.isdisjoint(t.used)
        assert set(t.used) <= set(t.accessible)
        assert len(t.accessible) <= min(cap, n)
        seen |= set(t.used)


@settings(max_examples=60, deadline=None)
@given(instances, st.sampled_from(["partition", "sharing"]), st.one_of(st.none(), st.integers(1, 20)))
def test_budget_spent_and_nse_is_rate_per_channel(case, scenario, cap):
    seed, k, n, snr = case
    g, cfg = instance(seed, k, n, snr)
    bl = BLPolicy(None if cap is None else min(cap, n))
    out = run_scenario(scenario, g, cfg, bl)
    for t in out.transmitters:
        if t.accessible:
            assert t.powers.sum() == pytest.approx(cfg.p_max * len(t.accessible), rel=1e-9)
        assert t.accessible_fraction == len(t.accessible) / n
    assert out.nse == pytest.approx(sum(t.rate for t in out.transmitters) / n, rel=1e-12, abs=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 20), st.sampled_from([0.0, 10.0, 20.0]))
def test_single_transmitter_scenarios_coincide(seed, n, snr):
    g, cfg = instance(seed, 1, n, snr)
    a, b = run_partition(g, cfg).transmitters[0], run_sharing(g, cfg).transmitters[0]
    np.testing.assert_allclose(a.powers, b.powers, rtol=1e-12, atol=1e-15)
    assert a.rate == pytest.approx(b.rate, rel=1e-12)


def test_sharing_bl_ranks_by_gain_over_interference():
    cfg = NetworkConfig(2, 2, 1.0)
    # transmitter 1 loads channel 0 heavily, so transmitter 2 prefers channel 1
    g = np.array([[10.0, 0.01], [1.0, 0.8]])
    out = run_sharing(g, cfg, BLPolicy(1))
    assert out.transmitters[0].accessible == (0,)
    assert out.transmitters[1].accessible == (1,)


def test_total_budget_mode_spends_n_times_p_max():
    cfg = NetworkConfig(1, 6, 2.0, budget="total")
    g, _ = instance(3, 1, 6)
    out = run_partition(g, cfg, BLPolicy(2))
    assert out.transmitters[0].powers.sum() == pytest.approx(12.0)
