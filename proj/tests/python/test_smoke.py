import math

import pytest

import bitcap


def test_version():
    assert bitcap.__version__


def test_birthday():
    r = bitcap.collision(365, 30)
    assert r["exact"] == pytest.approx(0.706316, abs=1e-6)
    assert r["low"] <= r["exact"] <= r["high"]
    assert bitcap.min_bits(10**10, 1e-4) == 79
    assert bitcap.db_size_gib(10**10, 79) == pytest.approx(91.968, abs=1e-3)


def test_accept_all_table_row():
    r = bitcap.accept_all(20, bitcap.flip_from_noise(0.001), 1000)
    assert r["low"] <= r["truth"] <= r["high"]
    assert r["truth"] == pytest.approx(0.562, abs=1e-3)
    assert bitcap.accept_all(10, 0.0, 1)["truth"] == 1.0


def test_zero_noise_matches_product():
    closed = bitcap.accept_all_zero_noise(20, 1000)
    exact = bitcap.accept_all(20, 0.0, 1000, mode="exact")["truth"]
    assert math.isclose(closed, exact, rel_tol=1e-10)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        bitcap.recognize_one(10, 0.7, 5)
    with pytest.raises(bitcap.BudgetExceeded):
        bitcap.accept_all(200, 0.01, 10**7, mode="exact")
    with pytest.raises(bitcap.Infeasible):
        bitcap.min_k(1000, 0.5, 1e-4)


def test_open_world_and_plan():
    rates = bitcap.open_world_rates(40, 0.05, 1000, 1000, 5)
    assert 0.0 <= rates["fnir_n"] <= 1.0
    assert rates["fpir"] <= rates["fpir_aggregate"] + 1e-15
    p = bitcap.plan(10**5, 10**5, bitcap.flip_from_noise(0.1), 1e-3, 1e-2, 1e-3)
    assert p["k"] >= p["k0"] > 0


def test_sweep_and_fit():
    rows = bitcap.sweep(0.1, 1e-4, [10**3, 10**5, 10**7])
    ks = [r[3] for r in rows]
    assert ks == sorted(ks)
    slope, intercept, r2 = bitcap.fit_line([1.0, 2.0, 3.0], [2.0, 4.0, 6.0])
    assert slope == pytest.approx(2.0) and intercept == pytest.approx(0.0, abs=1e-12)
    table = bitcap.db_table([0.0], 10**10)
    assert table[0][3] == 85


def test_simulate_deterministic():
    a = bitcap.simulate(20, 100, 0.01, trials=50, seed=3)
    b = bitcap.simulate(20, 100, 0.01, trials=50, seed=3, threads=2)
    assert a["accept_all"] == b["accept_all"]
    assert a["trials"] == 50
