from dataclasses import replace

import pytest

from muattack.coin import fifteen_km_params
from muattack.config import SweepSpec, load_fixture
from muattack.core import AttackScenario
from muattack.sweep import NoThresholdError, find_threshold, leaked_fraction, run_sweep


@pytest.fixture(scope="module")
def cfg():
    return load_fixture()


def test_x_sweep_rows(cfg):
    spec = SweepSpec("x_factor", 3.0, 3.3, 0.05, "bb84", "realistic",
                     AttackScenario("edge_trigger", 1.0))
    rows = run_sweep(spec, cfg.system, cfg.eve)
    assert [r.x for r in rows] == pytest.approx(spec.grid())
    for r in rows:
        assert (r.value is None) != r.feasible or (r.value is not None and 0 <= r.value <= 1)
        assert r.within_envelope
    assert rows[0].value == 0.0 and rows[-1].value == 1.0


def test_parallel_matches_serial(cfg):
    spec = SweepSpec("x_factor", 1.0, 4.0, 0.1, "sarg04", "strong",
                     AttackScenario("bandwidth", 1.0, 2))
    assert run_sweep(spec, cfg.system, cfg.eve, workers=3) == run_sweep(spec, cfg.system, cfg.eve)


def test_envelope_flag(cfg):
    spec = SweepSpec("x_factor", 8.0, 9.0, 0.5, "bb84", "strong", AttackScenario("bandwidth", 1.0, 3))
    assert [r.within_envelope for r in run_sweep(spec, cfg.system)] == [True, True, False]


def test_loss_sweep_tracks_mu(cfg):
    spec = SweepSpec("channel_loss_db", 0.0, 6.6, 2.2, "bb84", "realistic",
                     AttackScenario("edge_trigger", 4.0))
    rows = run_sweep(spec, cfg.system, cfg.eve)
    assert [r.loss_db for r in rows] == pytest.approx([0.0, 2.2, 4.4, 6.6])
    assert all(r.x == 4.0 for r in rows)


def test_loss_weakly_affects_strong_threshold(cfg):
    thresholds = []
    for loss in (2.0, 3.4, 5.0, 6.7):
        t = 10 ** (-loss / 10)
        params = replace(cfg.system, t=t, mu=cfg.system.mu * t / cfg.system.t)
        thresholds.append(find_threshold("bb84", "strong", AttackScenario("edge_trigger", 1.0),
                                         params, None, "full"))
    assert max(thresholds) - min(thresholds) < 0.3


def test_coin_sweep(cfg):
    spec = SweepSpec("x_factor", 1.0, 3.0, 0.5, "coin_toss", "strong",
                     AttackScenario("custom", 1.0))
    rows = run_sweep(spec, cfg.system, coin=fifteen_km_params())
    assert all(r.feasible for r in rows)
    assert [r.value for r in rows] == sorted(r.value for r in rows)


def test_threshold_search(cfg):
    sc = AttackScenario("edge_trigger", 1.0)
    x = find_threshold("bb84", "realistic", sc, cfg.system, cfg.eve, "full")
    assert leaked_fraction("bb84", "realistic", replace(sc, x=x), cfg.system, cfg.eve) >= 1 - 1e-9
    below = leaked_fraction("bb84", "realistic", replace(sc, x=x - 1e-6), cfg.system, cfg.eve)
    assert below is None or below < 1 - 1e-9
    partial = find_threshold("bb84", "realistic", sc, cfg.system, cfg.eve, "partial")
    assert partial < x


def test_no_threshold_inside_envelope(cfg):
    dark = replace(cfg.system, t=0.05, mu=0.05)
    with pytest.raises(NoThresholdError):
        find_threshold("bb84", "realistic", AttackScenario("bandwidth", 1.0, 0), dark, cfg.eve, "full")


def test_realistic_needs_eve(cfg):
    with pytest.raises(ValueError, match="hardware"):
        leaked_fraction("bb84", "realistic", AttackScenario("edge_trigger", 3.0), cfg.system)
