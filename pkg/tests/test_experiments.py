import numpy as np
import pytest

from vmacsim.experiments import (
    BL_COLUMNS,
    SweepPoint,
    aggregate,
    asymptotic_table,
    bl_sweep,
    cap_sweep,
    config_hash,
    empirical_best_cap,
    fig2_convergence,
    fig4_optimal_bl,
    fig5_fig6_load_sweep,
    load_to_k,
    run_trials,
    simulate_table,
)


def test_aggregate():
    a = aggregate(np.array([1.0, 2.0, 3.0, 4.0]))
    assert a.mean == 2.5
    assert a.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert aggregate(np.array([5.0])).stderr == 0.0


def test_load_to_k():
    assert load_to_k(0.5, 50) == 25
    assert load_to_k(0.01, 50) == 1
    assert load_to_k(0.3, 50) == 15


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": 2}) == config_hash({"b": 2, "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_run_trials_keys_and_reproducibility():
    point = SweepPoint("sharing", 3, 8, 10.0)
    s1 = run_trials(point, 6, 5)
    s2 = run_trials(point, 6, 5)
    assert set(s1) == {"nse", *(f"rate_per_channel_k{k}" for k in (1, 2, 3)), *(f"omega_k{k}" for k in (1, 2, 3))}
    assert s1 == s2
    assert s1["omega_k1"].mean == 1.0 and s1["omega_k1"].stderr == 0.0


def test_workers_do_not_change_results():
    point = SweepPoint("partition", 4, 10, 10.0, cap=3)
    np.testing.assert_array_equal(cap_sweep(point, (1, 2, None), 20, 9),
                                  cap_sweep(point, (1, 2, None), 20, 9, workers=2))


def test_cap_sweep_uses_common_gains():
    point = SweepPoint("partition", 1, 6, 10.0)
    data = cap_sweep(point, (6, None), 5, 1)
    # a cap equal to N is no cap at all
    np.testing.assert_array_equal(data[:, 0], data[:, 1])


def test_empirical_best_cap_prefers_smaller_on_ties():
    data = np.array([[1.0, 2.0, 2.0], [1.0, 2.0, 2.0]])
    assert empirical_best_cap(data, (1, 2, 3)) == (2, 1)


def test_bl_sweep_rows():
    rows = bl_sweep(("partition",), 2, 4, 10.0, 3, 0)
    assert len(rows) == 5
    assert all(len(r) == len(BL_COLUMNS) for r in rows)
    assert rows[-1][3] is None and rows[-1][4] == "nse_no_bl"


def test_simulate_table_layout():
    table = simulate_table(SweepPoint("partition", 2, 4, 10.0), 7)
    assert table.columns == ("k", "omega_k", "rate_per_channel_k", "phi_k")
    assert table.rows[-1][:2] == ("NSE", "total") and table.rows[-1][3] is None
    assert table.rows[-1][2] == pytest.approx(sum(r[3] for r in table.rows[:-1]))
    assert table.provenance["master_seed"] == 7


def test_fig2_layout():
    table = fig2_convergence(n_list=(4, 6), trials=3, master_seed=1)
    assert table.columns[:5] == ("N", "k", "sim_mean", "sim_stderr", "asymptotic")
    assert [(r[0], r[1]) for r in table.rows] == [(4, 1), (4, 2), (6, 1), (6, 2)]
    with pytest.raises(ValueError):
        fig2_convergence(n_list=(6, 4), trials=1)


def test_fig4_and_fig5_statistics():
    t4 = fig4_optimal_bl(num_channels=10, loads=(0.5,), trials=3)
    stats = {r["statistic"] for r in t4.select(load=0.5)}
    assert {"empirical_L", "analytic_L", "abs_gap", "omega_inf", "beta_star"} <= stats
    t5 = fig5_fig6_load_sweep(num_channels=10, snr_list=(10.0,), loads=(0.3,), trials=4)
    best = t5.value(statistic="nse_bl")["mean"]
    none = t5.value(statistic="nse_no_bl")["mean"]
    assert best >= none - 1e-12  # the cap search includes L = N
    assert t5.value(statistic="gain")["mean"] == pytest.approx(best - none)
    t6 = fig5_fig6_load_sweep(num_channels=10, snr_list=(10.0,), loads=(0.3,), trials=2, scenario="sharing")
    assert t6.provenance["experiment"] == "fig6"
    assert not t6.select(statistic="analytic_L")


def test_asymptotic_table_rows():
    table = asymptotic_table(10.0, 2, 50)
    assert table.value(statistic="partition_optimal_L")["value"] == 27  # ceil(25 * (1 + omega))
    assert table.value(k=2, statistic="sharing_beta")["method"] == "quadrature"
