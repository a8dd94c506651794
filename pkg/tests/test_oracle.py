import sys

import pytest

from instances import corpus, same_signal
from strel.logic import DistancePredicate
from strel.monitor import monitor
from strel.oracle import OracleTooLarge, oracle_monitor, simple_paths
from strel.signal import PiecewiseSignal, Trace
from strel.space import LocationService, SpatialModel


def line(n):
    return SpatialModel.undirected(n, [(i, 1.0, i + 1) for i in range(n - 1)])


def test_simple_paths_on_a_line():
    assert sorted(simple_paths(line(3), 0)) == [(0,), (0, 1), (0, 1, 2)]


def test_hand_worked_reach_on_a_line():
    # p p q along a line: only location 0 reaches q within 2 hops through p
    sigs = [PiecewiseSignal([0.0], [(v == "p", v == "q")], 2.0) for v in "ppq"]
    trace = Trace(["p", "q"], ["bool", "bool"], sigs)
    svc = LocationService.static(line(3))
    r = oracle_monitor(svc, trace, "p reach(hops)[<= 2] q")
    assert [r.at(loc, 0) for loc in range(3)] == [True, True, False]
    r = oracle_monitor(svc, trace, "p reach(hops)[<= 1] q")
    assert [r.at(loc, 0) for loc in range(3)] == [False, True, False]


def test_guard_rails():
    sigs = [PiecewiseSignal([0.0], [(True,)], 1.0) for _ in range(10)]
    with pytest.raises(OracleTooLarge):
        oracle_monitor(LocationService.static(SpatialModel(10)), Trace(["p"], ["bool"], sigs), "p")
    many = [PiecewiseSignal([float(k) for k in range(9)], [(k % 2 == 0,) for k in range(9)], 9.0)]
    with pytest.raises(OracleTooLarge):
        oracle_monitor(LocationService.static(SpatialModel(1)), Trace(["p"], ["bool"], many), "p")


def test_oracle_detects_a_broken_reach(monkeypatch):
    monitor_module = sys.modules["strel.monitor"]
    original = monitor_module.reach_fix

    def off_by_one(model, df, pred, s1, s2, domain, stats=None):
        looser = DistancePredicate("<=", pred.bound + 1) if pred.op == "<=" else pred
        return original(model, df, looser, s1, s2, domain, stats)

    monkeypatch.setattr(monitor_module, "reach_fix", off_by_one)
    diverged = sum(not same_signal(monitor(s, t, phi).signal, oracle_monitor(s, t, phi).signal)
                   for s, t, phi in corpus(51, 150, ops=["reach", "not", "and"]))
    assert diverged > 0
