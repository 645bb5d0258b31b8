import json

import pytest

from cobarforge import __version__
from cobarforge.cache import Cache, fingerprint
from cobarforge.cli import main


@pytest.fixture(autouse=True)
def cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("COBARFORGE_CACHE", str(tmp_path / "cache"))
    return tmp_path / "cache"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_nabla_stable(capsys):
    code, out, _ = run(capsys, "nabla", "--mode", "stable", "xi2")
    assert code == 0 and out == "xi2 ⊗ 1 + xi1^2 ⊗ xi1 + 1 ⊗ xi2\n"


def test_operations(capsys):
    assert run(capsys, "eop", "2", "xi1")[1] == "xi1*xi2\n"
    assert run(capsys, "qop", "4", "xi1")[1] == "0\n"
    assert run(capsys, "cupk", "1", "xi1", "xi1")[1] == "xi0*xi2\n"
    assert run(capsys, "cobar-d", "[xi2]")[1] == "[xi1^2|xi1]\n"
    assert run(capsys, "cobar-cup", "0", "[xi1]", "[xi2]")[1] == "[xi1|xi2]\n"


def test_may_d(capsys):
    code, out, _ = run(capsys, "may-d", "h4^2", "--max-jump", "5")
    assert code == 0 and out.splitlines() == ["d3: h1*h3^4", "beyond max-jump: h2^8*g(2,1) + h1^16*g(3,1)"]


@pytest.mark.parametrize("argv", [
    ["ext-chart", "--max-stem", "-1"],
    ["may-d", "h4^^2"],
    ["cobar-d", "[xi1|"],
    ["nabla", "xi1", "--conventions", "no-such-table"],
    ["kervaire", "3"],
    ["bogus"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_parse_error_names_the_production(capsys):
    _, _, err = run(capsys, "may-d", "x7")
    assert "PS expression" in err


def test_verify_exit_codes_and_ledger(capsys):
    code, out, _ = run(capsys, "verify", "thm11")
    assert code == 0 and out.startswith("thm11: PASS") and "conventions: default" in out
    code, out, _ = run(capsys, "verify", "thm22", "--n", "3")
    assert code == 1 and "closed form hm1*h3 + h0*h2^2 + h1^4*g(2,0)" in out


def test_verify_thm22_base_cases_pass(capsys):
    code, out, _ = run(capsys, "verify", "thm22", "--n", "2")
    assert code == 0 and out.startswith("thm22: PASS")


def test_convention_gap_is_a_failure(capsys):
    code, _, err = run(capsys, "cupk", "1", "xi1", "xi2", "--conventions", "strict")
    assert code == 1 and "convention gap" in err


def test_ext_chart_json_cached_and_byte_stable(capsys):
    argv = ["ext-chart", "--max-stem", "5", "--max-filt", "3", "--format", "json"]
    code, first, err1 = run(capsys, *argv)
    code2, second, err2 = run(capsys, *argv)
    assert code == code2 == 0 and first == second
    assert "cached" not in err1 and "cached" in err2
    chart = json.loads(first)
    assert {(c["stem"], c["filt"]) for c in chart["cells"]} >= {(0, 0), (1, 1), (3, 1), (3, 2), (3, 3)}


def test_no_cache_flag_recomputes(capsys):
    argv = ["eop", "0", "xi1", "--no-cache"]
    run(capsys, *argv)
    assert "cached" not in run(capsys, *argv)[2]


def test_svg_is_drawn_from_the_chart(capsys):
    _, js, _ = run(capsys, "ext-chart", "--may-page", "2", "--max-stem", "6", "--max-filt", "3", "--format", "json")
    _, svg, _ = run(capsys, "ext-chart", "--may-page", "2", "--max-stem", "6", "--max-filt", "3", "--format", "svg")
    chart = json.loads(js)
    assert svg.count("<circle") == sum(c["dim"] for c in chart["cells"])
    assert svg.count("<line") == len(chart["differentials"])


def test_cache_fingerprint_inputs():
    base = fingerprint("ext-chart", {"max_stem": 4}, "", "abc")
    assert base != fingerprint("ext-chart", {"max_stem": 4}, "", "abd")
    assert base != fingerprint("ext-chart", {"max_stem": 4}, "", "abc", version=__version__ + ".1")
    assert base == fingerprint("ext-chart", {"max_stem": 4}, "", "abc")


def test_cache_corrupt_entry_is_evicted(cache_dir):
    c = Cache(cache_dir)
    c.store("k", b"payload")
    assert c.lookup("k") == b"payload"
    path = cache_dir / "k.out"
    path.write_bytes(path.read_bytes()[:-1] + b"X")
    assert c.lookup("k") is None and not path.exists()


def test_kervaire_reports_failure_code(capsys):
    code, out, _ = run(capsys, "kervaire", "4", "--format", "json")
    report = json.loads(out)
    assert code == 1 and report["low_vanish"] and not report["gh_vanishes_on_e2"]


def test_fho_verify(capsys):
    code, out, _ = run(capsys, "fho-verify")
    assert code == 0 and out.startswith("thm12: PASS")
