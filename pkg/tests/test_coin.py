import math

import pytest

from muattack.coin import (NoCrossingError, QctEventModel, QctParams, bob_cheat_bound,
                           classical_bound_at, classical_equivalence_factor,
                           default_event_model, fifteen_km_params, helstrom_cheat,
                           load_classical_bounds, poisson_events, rounds_for_abort,
                           table_event_model)


@pytest.fixture
def qct():
    return fifteen_km_params()


def test_params_validation():
    with pytest.raises(ValueError):
        QctParams(mu=0.0, k_rounds=10, y=0.5, honest_abort=0.1)
    with pytest.raises(ValueError):
        QctParams(mu=0.1, k_rounds=0, y=0.5, honest_abort=0.1)
    with pytest.raises(ValueError):
        QctParams(mu=0.1, k_rounds=10, y=1.0, honest_abort=0.1)


def test_rounds_from_honest_abort(qct):
    p_det = 1 - math.exp(-0.0019 * 0.03)
    assert (1 - p_det) ** qct.k_rounds <= 0.014 < (1 - p_det) ** (qct.k_rounds - 1)
    assert qct.k_rounds == rounds_for_abort(0.0019, 0.03, 0.014) == 74890


def test_helstrom():
    assert helstrom_cheat(0.8, 0) == 0.5
    assert helstrom_cheat(0.8, 1) == pytest.approx(0.8)
    assert helstrom_cheat(0.8, 2) == pytest.approx(0.8)
    assert helstrom_cheat(0.8, 3) > 0.8
    assert helstrom_cheat(0.8, 8) > helstrom_cheat(0.8, 3)


def test_events_vacuum():
    assert poisson_events(0.0, 100) == (1.0, 0.0, 0.0, 0.0)


def test_events_binomial():
    mu, k = 0.01, 500
    p0 = math.exp(-mu)
    q = 1 - p0 - mu * p0
    a1, a2, a3, a4 = poisson_events(mu, k)
    assert a3 + a4 == pytest.approx(k * q * (1 - q) ** (k - 1), rel=1e-12)
    assert a1 + a2 == pytest.approx((1 - q) ** k, rel=1e-12)


def test_events_vanish_for_many_multiphoton_rounds(qct):
    assert sum(poisson_events(5.0, 1000)) < 1e-12
    assert bob_cheat_bound(qct, x=2000.0) == pytest.approx(1.0)


def test_bound_trivial_models(qct):
    empty = QctEventModel(lambda m, k: (0, 0, 0, 0), lambda p: (0.5, 0.5, 0.5, 0.5))
    assert bob_cheat_bound(qct, empty) == 1.0
    sure = QctEventModel(poisson_events, lambda p: (1, 1, 1, 1))
    assert bob_cheat_bound(qct, sure, x=2.0) == 1.0


def test_bound_rejects_bad_models(qct):
    bad = QctEventModel(lambda m, k: (0.6, 0.6, 0, 0), lambda p: (0.5,) * 4)
    with pytest.raises(ValueError):
        bob_cheat_bound(qct, bad)
    with pytest.raises(ValueError):
        bob_cheat_bound(qct, QctEventModel(poisson_events, lambda p: (1.2, 0, 0, 0)))
    with pytest.raises(ValueError):
        bob_cheat_bound(qct, x=0.5)


def test_bound_nondecreasing(qct):
    xs = [1.0 + 0.05 * i for i in range(300)]
    vals = [bob_cheat_bound(qct, x=x) for x in xs]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    assert all(v <= 1.0 for v in vals)


def test_edge_trigger_unity(qct):
    assert bob_cheat_bound(qct, x=10.0) == pytest.approx(1.0, abs=1e-6)


def test_blocking_reduces_rounds(qct):
    assert bob_cheat_bound(qct, x=7.3, duty=1 / 3) > classical_bound_at(0.014)
    assert bob_cheat_bound(qct, x=7.87, duty=1 / 5) > classical_bound_at(0.014)


def test_equivalence_factor(qct):
    cb = classical_bound_at(0.014)
    x = classical_equivalence_factor(qct, classical_bound=cb)
    assert abs(bob_cheat_bound(qct, x=x) - cb) <= 1e-9
    assert bob_cheat_bound(qct, x=x * (1 - 1e-6)) < cb
    assert 1.24 <= x <= 1.54


def test_equivalence_boundary_and_no_crossing(qct):
    at_one = bob_cheat_bound(qct)
    assert classical_equivalence_factor(qct, classical_bound=at_one) == 1.0
    with pytest.raises(NoCrossingError):
        classical_equivalence_factor(qct, classical_bound=at_one - 1e-3)


def test_tables(tmp_path, qct):
    h, b = load_classical_bounds()
    assert classical_bound_at(0.014, (h, b)) == pytest.approx(0.993)
    path = tmp_path / "events.tsv"
    path.write_text("# event\tp_cheat\n1\t0.5\n2\t0.9\n3\t0.9\n4\t0.9\n")
    model = table_event_model(path)
    assert bob_cheat_bound(qct, model) > bob_cheat_bound(qct, default_event_model(qct)) - 1.0
    path.write_text("1\t0.5\n2\t0.9\n")
    with pytest.raises(ValueError):
        table_event_model(path)
    bad = tmp_path / "bound.tsv"
    bad.write_text("0.1\t0.9\n0.05\t0.95\n")
    with pytest.raises(ValueError):
        load_classical_bounds(bad)
