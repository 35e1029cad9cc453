from __future__ import annotations

import json

import pytest

from treepatterns.cli import RunConfig, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_fig1_both(capsys):
    code, out, _ = run(capsys, "analyze", "--pattern", "paper:fig1", "--builder", "both", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["builders_agree"]
    assert [r["builder"] for r in doc["reports"]] == ["naive", "compact"]
    assert doc["reports"][0]["mu"]["approx"].startswith("0.031116917")
    assert doc["reports"][0]["sigma2"]["approx"].startswith("0.076458540")


def test_analyze_star3_text(capsys):
    code, out, _ = run(capsys, "analyze", "--pattern", "star:3", "--no-sigma2")
    assert code == 0
    assert "sigma2 = skipped" in out
    assert "mu     = 1/2*e^-1  ~ 0.1839397206" in out


def test_analyze_edge_closed_form(capsys):
    code, out, _ = run(capsys, "analyze", "--pattern", "edge")
    assert code == 0
    assert "closed form" in out


def test_analyze_show_system(capsys):
    code, out, _ = run(capsys, "analyze", "--pattern", "paper:fig1", "--show-system", "--no-sigma2")
    assert code == 0
    assert "a_3 = x a_0 (a_2+a_3u+a_1u^2)" in out


def test_emit_system_formats(capsys):
    for fmt in ("text", "json", "latex"):
        code, out, _ = run(capsys, "emit-system", "--pattern", "paper:fig1", "--format", fmt)
        assert code == 0 and out.strip()


@pytest.mark.parametrize("pattern", ["paper:fig1", "star:2", "edge"])
def test_verify_passes(capsys, pattern):
    code, out, _ = run(capsys, "verify", "--pattern", pattern, "--n", "7")
    assert code == 0
    assert out.strip().endswith("PASS")


def test_verify_edge_distribution(capsys):
    code, out, _ = run(capsys, "verify", "--pattern", "edge", "--n", "6", "--format", "json")
    doc = json.loads(out)
    assert doc["pass"]
    assert doc["results"][-1]["oracle"] == {"5": 6**4}


def test_expand_tables(capsys):
    code, out, _ = run(capsys, "expand", "--pattern", "star:3", "--n", "6")
    assert code == 0 and out.splitlines()[0] == "n\tm\tt"
    code, out, _ = run(capsys, "expand", "--pattern", "paper:fig1", "--n", "20", "--mode", "jet2")
    assert code == 0 and out.splitlines()[0].startswith("n\tmean")
    for table in ("forbidden", "forest"):
        code, out, _ = run(capsys, "expand", "--pattern", "star:3", "--n", "6", "--table", table, "--format", "json")
        assert code == 0 and json.loads(out)


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", "--pattern", "star:3", "--n", "5", "--format", "json")
    assert code == 0
    assert json.loads(out)["total"] == 125


def test_invalid_input_exit_code(capsys):
    code, out, err = run(capsys, "analyze", "--pattern", "no-such")
    assert code == 2 and not out
    assert json.loads(err)["error"] == "PatternError"
    code, _, err = run(capsys, "expand", "--pattern", "star:3", "--n", "99")
    assert code == 2 and json.loads(err)["error"] == "SeriesError"
    code, _, err = run(capsys, "oracle", "--pattern", "star:3", "--n", "0")
    assert code == 2


def test_class_limit_exit_code(capsys):
    code, _, err = run(capsys, "analyze", "--pattern", "paper:fig7", "--builder", "naive")
    assert code == 2
    assert json.loads(err)["error"] == "ClassLimitExceeded"


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(n=0)
    with pytest.raises(ValueError):
        RunConfig(builder="fancy")
