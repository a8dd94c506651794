import io
import json

import pytest

from strel import io as sio
from strel.cli import run_cli
from strel.monitor import monitor
from strel.scenarios import ManetConfig, manet_generate, zigbee_fixture


@pytest.fixture
def zigbee_files(tmp_path):
    svc, tr = zigbee_fixture()
    sio.save_trace(tr, tmp_path / "trace.json")
    sio.save_space(svc, tmp_path / "space.json")
    return tmp_path


def write(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def small_trace(**over):
    data = {"horizon": 4, "channels": ["p", "x"],
            "locations": [{"id": 0, "segments": [{"t": 0, "values": [True, 1.5]}, {"t": 2, "values": [False, 2]}]},
                          {"id": 1, "segments": [{"t": 0, "values": [False, -1]}]}]}
    data.update(over)
    return data


def test_zigbee_round_trip(zigbee_files):
    svc, tr = zigbee_fixture()
    assert sio.load_trace(zigbee_files / "trace.json") == tr
    assert sio.load_space(zigbee_files / "space.json") == svc


def test_manet_round_trip(tmp_path):
    svc, tr = manet_generate(ManetConfig(nodes=8, steps=4, seed=2))
    sio.save_trace(tr, tmp_path / "t.json")
    sio.save_space(svc, tmp_path / "s.json")
    assert sio.load_trace(tmp_path / "t.json") == tr
    assert sio.load_space(tmp_path / "s.json") == svc


def test_trace_kinds_inferred(tmp_path):
    tr = sio.load_trace(write(tmp_path / "t.json", small_trace()))
    assert tr.kinds == ("bool", "float")
    assert tr.values_at(0, 3) == (False, 2.0)


def test_decreasing_times_name_location_and_index(tmp_path):
    data = small_trace()
    data["locations"][0]["segments"][1]["t"] = -1
    with pytest.raises(sio.SchemaError, match="location 0, segment 1"):
        sio.load_trace(write(tmp_path / "t.json", data))


def test_nan_rejected(tmp_path):
    p = tmp_path / "t.json"
    p.write_text(json.dumps(small_trace()).replace("1.5", "NaN"), encoding="utf-8")
    with pytest.raises(sio.SchemaError, match="NaN"):
        sio.load_trace(p)


def test_mixed_channel_kinds_rejected(tmp_path):
    data = small_trace()
    data["locations"][1]["segments"][0]["values"] = [1.0, -1]
    with pytest.raises(sio.SchemaError, match="mixes"):
        sio.load_trace(write(tmp_path / "t.json", data))


def test_duplicate_edge_in_space_file(tmp_path):
    data = {"locations": 2, "weightKind": "scalar",
            "snapshots": [{"t": 0, "edges": [[0, 1, 1], [0, 2, 1]]}]}
    with pytest.raises(sio.SchemaError, match="at most one label"):
        sio.load_space(write(tmp_path / "s.json", data))


def test_euclidean_space_input(tmp_path):
    data = {"snapshots": [{"t": 0, "positions": [[0, 0], [3, 4]], "relation": [[0, 1], [1, 0]]},
                          {"t": 2, "positions": [[0, 0], [6, 8]], "relation": [[0, 1]]}]}
    svc = sio.load_space(write(tmp_path / "s.json", data))
    assert svc.model_at(0).weight(1, 0) == (-3.0, -4.0)
    assert svc.model_at(3).weight(0, 1) == (6.0, 8.0)
    assert not svc.model_at(3).has_edge(1, 0)


def test_unsorted_snapshots_rejected(tmp_path):
    data = {"locations": 1, "snapshots": [{"t": 1, "edges": []}, {"t": 0, "edges": []}]}
    with pytest.raises(sio.SchemaError, match="snapshot 1"):
        sio.load_space(write(tmp_path / "s.json", data))


def test_csv_round_trip_boolean_and_maxmin():
    svc, tr = manet_generate(ManetConfig(nodes=6, steps=5, seed=3))
    for dom, text in [("boolean", "F[0, 1] (X_H > 100)"), ("maxmin", "escape(euclid)[>= 1] X_P < 150")]:
        res = monitor(svc, tr, text, domain=dom).signal
        back = sio.csv_to_trace(sio.verdicts_to_csv(res), res.horizon)
        assert [s.map(lambda v: v[0]) for s in back.signals] == [s for s in res]


def test_csv_tokens():
    assert sio.format_value(True) == "true"
    assert sio.format_value(float("-inf")) == "-inf"
    assert sio.format_value(0.1) == "0.1"
    assert sio.parse_value("inf") == float("inf")


def test_cli_monitor_writes_one_row_per_breakpoint(zigbee_files):
    (zigbee_files / "f.strel").write_text("end_dev reach(hops)[<= 1] router\n")
    out = zigbee_files / "out.csv"
    code = run_cli(["monitor", "--formula", str(zigbee_files / "f.strel"), "--trace", str(zigbee_files / "trace.json"),
                    "--space", str(zigbee_files / "space.json"), "--semantics", "boolean", "--output", str(out)])
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "location,t,value"
    assert len(rows) == 17
    assert rows[6] == "5,0.0,true"
    assert rows[8] == "7,0.0,false"


def test_cli_is_deterministic(zigbee_files):
    args = ["monitor", "--expr", "somewhere(hops)[<= 2] coord", "--trace", str(zigbee_files / "trace.json"),
            "--space", str(zigbee_files / "space.json"), "--format", "json"]
    a, b = io.StringIO(), io.StringIO()
    assert run_cli(args, a) == run_cli(args, b) == 0
    assert a.getvalue() == b.getvalue()
    assert json.loads(a.getvalue())["locations"][0]["id"] == 0


def test_cli_check_reports_parse_position(tmp_path, capsys):
    bad = tmp_path / "bad.strel"
    bad.write_text("end_dev reach(hops)[<= 1\n")
    assert run_cli(["check", "--formula", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "bad.strel:1:" in err and "parse error" in err


def test_cli_assert_all_violation(zigbee_files):
    args = ["monitor", "--expr", "everywhere(hops)[<= 2] router", "--trace", str(zigbee_files / "trace.json"),
            "--space", str(zigbee_files / "space.json"), "--semantics", "maxmin", "--assert-all"]
    assert run_cli(args, io.StringIO()) == 1
    args[2] = "somewhere(hops)[<= 4] coord"
    assert run_cli(args, io.StringIO()) == 0


def test_cli_error_codes(zigbee_files, tmp_path):
    base = ["monitor", "--expr", "router", "--trace", str(zigbee_files / "trace.json"), "--space"]
    assert run_cli(base + [str(tmp_path / "missing.json")]) == 2
    bad = write(tmp_path / "dup.json", {"locations": 16, "snapshots": [{"t": 0, "edges": [[0, 1, 1], [0, 1, 1]]}]})
    assert run_cli(base + [str(bad)]) == 3
    base[2] = "X_Q > 1"
    assert run_cli(base + [str(zigbee_files / "space.json")]) == 4
    assert run_cli(["frobnicate"]) == 2


def test_cli_simulate_then_monitor(tmp_path):
    assert run_cli(["simulate", "--nodes", "9", "--steps", "4", "--graph", "delaunay", "--seed", "3",
                    "--out-dir", str(tmp_path)], io.StringIO()) == 0
    out = io.StringIO()
    code = run_cli(["monitor", "--expr", "everywhere(hops)[< infinity] somewhere(hops)[< 10] X_S >= 1",
                    "--trace", str(tmp_path / "trace.json"), "--space", str(tmp_path / "space.json")], out)
    assert code == 0
    assert out.getvalue().count("\n") >= 10


def test_cli_filters(zigbee_files):
    out = io.StringIO()
    run_cli(["monitor", "--expr", "coord", "--trace", str(zigbee_files / "trace.json"),
             "--space", str(zigbee_files / "space.json"), "--location", "9", "--time", "0.5"], out)
    assert out.getvalue().splitlines() == ["location,t,value", "9,0.5,true"]
