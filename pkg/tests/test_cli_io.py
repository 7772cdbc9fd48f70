import json
import subprocess
import sys
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from polysphere import corpus
from polysphere.cli import main
from polysphere.cli_io import (
    ReportEntry,
    VerificationReport,
    ball_from_dict,
    map_from_dict,
    parse_ball,
    parse_rational,
    serialize_ball,
    serialize_map,
)
from polysphere.errors import ParseError, ValidationError
from polysphere.sphere_map import linear_map, pwl_map

SQ2 = corpus.named("SQ2")


def write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(p)


# -- rationals -----------------------------------------------------------------------

@pytest.mark.parametrize("text,value", [("3/4", F(3, 4)), ("-2", F(-2)), ("6/8", F(3, 4)),
                                        (" 1 / 3 ", F(1, 3)), (5, F(5))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["1/0", "0.5", "abc", "", None, 0.5, True, "1/-2"])
def test_parse_rational_rejects(bad):
    with pytest.raises(ParseError):
        parse_rational(bad)


# -- balls -------------------------------------------------------------------------

def test_parse_square_file(tmp_path):
    path = write(tmp_path, "sq.json", {"dim": 2, "vertices": [["1", "1"], ["1", "-1"],
                                                               ["-1", "1"], ["-1", "-1"]]})
    ball = parse_ball(path)
    assert len(ball.vertices) == 4 and len(ball.facets) == 4


def test_zero_denominator_has_field_context(tmp_path):
    path = write(tmp_path, "bad.json", {"dim": 2, "vertices": [["1/0", "1"]]})
    with pytest.raises(ParseError, match=r"vertices\[0\]\[0\]"):
        parse_ball(path)


def test_invalid_json_has_line_context(tmp_path):
    path = write(tmp_path, "bad.json", '{\n  "dim": 2,\n  "vertices": [\n')
    with pytest.raises(ParseError, match="line"):
        parse_ball(path)


@pytest.mark.parametrize("payload", [[], {"dim": "2", "vertices": []}, {"dim": 2},
                                     {"dim": 2, "vertices": [["1"]]}])
def test_malformed_ball_payloads(payload):
    with pytest.raises(ParseError):
        ball_from_dict(payload)


def test_invalid_ball_is_validation_error():
    with pytest.raises(ValidationError):
        ball_from_dict({"dim": 2, "vertices": [["1", "0"], ["0", "1"]]})


def test_ball_round_trip(tmp_path):
    path = write(tmp_path, "hex.json", {"dim": 2, "vertices": [
        ["2/2", "0"], ["-1", "0"], ["0", "1"], ["0", "-1"], ["1", "1"], ["-1", "-1"]]})
    text = serialize_ball(parse_ball(path))
    again = tmp_path / "again.json"
    again.write_text(text)
    assert serialize_ball(parse_ball(str(again))) == text


@settings(max_examples=30, deadline=None)
@given(m=st.integers(2, 4), seed=st.integers(0, 10_000))
def test_ball_round_trip_random(m, seed):
    ball = corpus.random_ball(m, seed=seed)
    back = ball_from_dict(json.loads(serialize_ball(ball)))
    assert back.vertices == ball.vertices
    assert serialize_ball(back) == serialize_ball(ball)


# -- maps --------------------------------------------------------------------------

def test_map_round_trip_linear_and_pwl():
    f = linear_map(SQ2, SQ2, ((0, -1), (1, 0)))
    text = serialize_map(f)
    assert serialize_map(map_from_dict(json.loads(text), SQ2, SQ2)) == text
    g = pwl_map(SQ2, SQ2, {0: ((1, 0), (0, 1)), 1: ((F(1, 2), 0), (0, 1))})
    text = serialize_map(g)
    back = map_from_dict(json.loads(text), SQ2, SQ2)
    assert back.pieces == g.pieces and serialize_map(back) == text


@pytest.mark.parametrize("payload", [{"kind": "affine"}, {"kind": "linear", "matrix": [["1"]]},
                                     {"kind": "pwl", "pieces": {}}, "linear"])
def test_malformed_maps(payload):
    with pytest.raises(ParseError):
        map_from_dict(payload, SQ2, SQ2)


def test_pwl_bad_facet_id():
    with pytest.raises(ValidationError):
        map_from_dict({"kind": "pwl", "pieces": [{"facet_id": 9, "matrix": [["1", "0"], ["0", "1"]]}]},
                      SQ2, SQ2)


def test_non_isometry_map_parses():
    f = map_from_dict({"kind": "linear", "matrix": [["1", "0"], ["0", "1/2"]]}, SQ2, SQ2)
    assert f((0, 1)) == (0, F(1, 2))


def test_report_overall_pass():
    ok = ReportEntry("a", 1, 0.0, 0.0, True)
    bad = ReportEntry("b", 1, 1.0, 0.0, False)
    assert VerificationReport([ok]).overall_pass
    assert not VerificationReport([ok, bad]).overall_pass
    assert json.loads(VerificationReport([ok, bad]).to_json())["overall_pass"] is False


# -- CLI ---------------------------------------------------------------------------

@pytest.fixture
def map_files(tmp_path):
    return {
        "rot": write(tmp_path, "rot.json", {"kind": "linear", "matrix": [["0", "-1"], ["1", "0"]]}),
        "half": write(tmp_path, "half.json", {"kind": "linear", "matrix": [["1", "0"], ["0", "1/2"]]}),
        "sd": write(tmp_path, "sd.json", {"kind": "linear",
                                          "matrix": [["1/2", "1/2"], ["1/2", "-1/2"]]}),
        "defect": write(tmp_path, "defect.json", {"kind": "pwl", "pieces": [
            {"facet_id": 0, "matrix": [["1", "0"], ["1/2", "1/2"]]},
            {"facet_id": 1, "matrix": [["1", "0"], ["0", "1"]]}]}),
    }


def test_cli_ball_info_hex(capsys):
    assert main(["ball", "info", "HEX", "--json"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info == {"dim": 2, "vertices": 6, "facets": 6, "face_census": [6, 6]}


def test_cli_ball_dual(tmp_path, capsys):
    out = tmp_path / "dual.json"
    assert main(["ball", "dual", "SQ2", "--out", str(out)]) == 0
    assert parse_ball(str(out)).same_shape(corpus.named("DI2"))


def test_cli_extend_square_to_diamond(map_files, capsys):
    assert main(["map", "extend", "SQ2", "DI2", map_files["sd"]]) == 0
    assert "1/2" in capsys.readouterr().out
    assert main(["map", "extend", "SQ2", "DI2", map_files["sd"], "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["matrix"] == [["1/2", "1/2"], ["1/2", "-1/2"]]


def test_cli_extend_inconsistent(map_files, capsys):
    assert main(["map", "extend", "SQ2", "SQ2", map_files["defect"]]) == 1
    assert "ridge" in capsys.readouterr().out


def test_cli_map_check(map_files, capsys):
    assert main(["map", "check", "SQ2", "SQ2", map_files["rot"]]) == 0
    assert main(["map", "check", "SQ2", "SQ2", map_files["half"]]) == 1


def test_cli_search(capsys):
    assert main(["search", "iso", "CUBE3", "OCT3"]) == 0
    assert capsys.readouterr().out.strip() == "0 isometries"
    assert main(["search", "iso", "SQ2", "DI2", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["count"] == 8


def test_cli_input_errors(tmp_path, map_files, capsys):
    assert main(["ball", "info", str(tmp_path / "missing.json")]) == 2
    assert main(["ball", "info", write(tmp_path, "z.json", {"dim": 2, "vertices": [["1/0", "0"]]})]) == 2
    assert main(["ball", "info", write(tmp_path, "t.json", "{")]) == 2
    assert main(["verify", "lemmas", "SQ2", "SQ2", str(tmp_path / "nomap.json")]) == 2
    assert main(["verify", "lemmas", "SQ2", "SQ2", map_files["rot"], "--schedule-depth", "1"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_cli_verify_small_run(tmp_path, map_files, capsys):
    report = tmp_path / "r.json"
    assert main(["verify", "lemmas", "SQ2", "SQ2", map_files["rot"], "--seed", "7",
                 "--instances", "10", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["overall_pass"] and data["seed"] == 7
    assert all(e["max_residual"] <= 1e-8 for e in data["entries"])
    capsys.readouterr()
    assert main(["verify", "lemmas", "SQ2", "SQ2", map_files["half"], "--seed", "7",
                 "--instances", "10", "--json"]) == 1
    entries = {e["name"]: e for e in json.loads(capsys.readouterr().out)["entries"]}
    assert entries["isometry_residual"]["pass"] is False


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "polysphere.cli", "search", "iso", "SQ2", "SQ2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "8 isometries"
