import json
import os
import subprocess

import pytest

import loadgen

SHORT_FRAMES = {
    "load_percent": 25,
    "frame_len_p": 60,
    "line_rate": "100M",
    "feature": {"type": "duration", "duration_ns": 20_000_000},
}

LONG_FRAMES = {
    "load_percent": 25,
    "frame_len_p": 1514,
    "feature": {"type": "frames", "frames": 40},
}


def test_formulas():
    assert loadgen.slot_size(1514) == 1538
    assert loadgen.slot_size(1020, vlan=True) == 1048
    assert loadgen.extra_gap(1538, 25) == 4614
    assert loadgen.extra_gap(84, "30") == 196
    assert loadgen.total_gap(4614) == 4626
    assert loadgen.occupancy(1538) == 123_040
    assert loadgen.period(84, 252) == 26_880
    assert loadgen.occupancy(84, "1G") == 672
    assert loadgen.frames_for_duration(84, 25, "20ms") == 744
    assert loadgen.elapsed(744, 26_880) == 19_998_720
    assert loadgen.time_deficit("20ms", 19_998_720, 26_880) == 1280
    assert loadgen.format_duration(loadgen.parse_duration("492.16us")) == "492.16us"


def test_plan_matches_the_json_schema():
    plan = loadgen.make_plan(SHORT_FRAMES)
    assert plan["frames_total"] == 744
    assert plan["time_deficit_ns"] == 1280
    assert plan["achieved_load"] == "1/4"
    assert loadgen.make_plan(json.dumps(SHORT_FRAMES)) == plan


def test_errors_carry_code_and_field():
    with pytest.raises(loadgen.LoadgenError) as info:
        loadgen.make_plan({**SHORT_FRAMES, "load_percent": 0})
    assert info.value.code == "validation-error"
    assert info.value.field == "load_percent"
    with pytest.raises(loadgen.LoadgenError) as info:
        loadgen.make_plan({**SHORT_FRAMES, "feature": {"type": "frames", "frames": 3, "duration_ns": 5}})
    assert info.value.code == "feature-conflict"


def test_simulate_and_analyze(tmp_path):
    path = str(tmp_path / "long.pcap")
    result = loadgen.simulate(LONG_FRAMES, pcap_path=path)
    assert result["verdict"]["pass"]
    assert result["report"]["frame_count"] == 40
    assert os.path.getsize(path) == 24 + 40 * (16 + 1514)

    checked = loadgen.analyze_pcap(path, expect=LONG_FRAMES)
    assert checked["verdict"]["pass"]
    assert checked["report"]["measured_period_exact"] == "492160"
    wrong = loadgen.analyze_pcap(path, expect={**LONG_FRAMES, "load_percent": 50})
    assert not wrong["verdict"]["pass"]
    assert loadgen.analyze_pcap(path)["frame_count"] == 40


def test_write_pcap_size(tmp_path):
    path = str(tmp_path / "short.pcap")
    assert loadgen.write_pcap(SHORT_FRAMES, path) == 24 + 744 * (16 + 60)


def test_frame_round_trip():
    spec = {**LONG_FRAMES, "vlan": {"pcp": 7, "cfi": 0, "vid": 0}, "payload_fill": "inc"}
    raw = loadgen.build_frame(spec, seq=5)
    assert len(raw) == 1518
    assert raw[12:16] == bytes([0x81, 0x00, 0xE0, 0x00])
    parsed = loadgen.parse_frame(raw)
    assert parsed["seq"] == 5
    assert parsed["vlan"] == {"pcp": 7, "cfi": 0, "vid": 0}
    assert parsed["frame_len_p"] == 1514
    assert parsed["payload_fill"] == "inc"
    with pytest.raises(loadgen.LoadgenError):
        loadgen.parse_frame(raw[:59])


@pytest.mark.skipif("LOADGEN_BIN" not in os.environ, reason="CLI binary path not provided")
def test_cli_and_module_agree():
    out = subprocess.run(
        [os.environ["LOADGEN_BIN"], "--format", "json", "plan", "--load", "25", "--frame-size", "60", "--duration", "20ms"],
        check=True,
        capture_output=True,
        text=True,
    ).stdout
    assert json.loads(out) == loadgen.make_plan(SHORT_FRAMES)
