import json

import pytest

from rauzylab.cli import main

from conftest import TRIBONACCI_31


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_limitword(capsys):
    rc, out, _ = run(capsys, "limitword", "--directive", "tribonacci", "--n", "31", "--no-header")
    assert rc == 0 and out.strip() == TRIBONACCI_31


def test_limitword_zero_length(capsys):
    rc, out, _ = run(capsys, "limitword", "--directive", "tribonacci", "--n", "0", "--no-header")
    assert rc == 0 and out == ""


def test_parse_error_has_caret(capsys):
    rc, _, err = run(capsys, "limitword", "--directive", "", "--n", "3")
    assert rc == 2 and "error" in err
    rc, _, err = run(capsys, "limitword", "--directive", "brun:(1,2,x)^w", "--n", "3")
    assert rc == 2 and "^" in err


def test_expand_golden(capsys):
    rc, out, _ = run(capsys, "expand", "--x", "phi", "--depth", "10")
    assert rc == 0 and json.loads(out)["digits"] == [1] * 10


def test_fractal_svg_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for p in (a, b):
        assert main(["fractal", "--directive", "tribonacci", "--n", "2000", "--out", str(p)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.startswith("<svg") and "config" in text


def test_fractal_refuses_unbalanced(capsys, tmp_path):
    # eigenvalues 4 and 2: the projected prefixes drift without bound
    args = ["fractal", "--directive", "sub:1->1112,2->2221", "--n", "3000", "--out", str(tmp_path / "x.svg")]
    rc, _, err = run(capsys, *args)
    assert rc == 2 and "--force" in err
    rc, _, _ = run(capsys, *args, "--force")
    assert rc == 0 and (tmp_path / "x.svg").exists()


def test_dualplane(capsys, tmp_path):
    out = tmp_path / "p.svg"
    rc, text, _ = run(capsys, "dualplane", "--directive", "tribonacci", "--steps", "5", "--out", str(out))
    assert rc == 0 and out.exists()


def test_lyapunov_json(capsys):
    rc, out, _ = run(capsys, "lyapunov", "--family", "tribonacci", "--n", "2000", "--replicas", "2")
    data = json.loads(out)
    assert rc == 0 and data["verdict"] == "satisfied"


def test_code_and_exchange(capsys):
    rc, out, _ = run(capsys, "code", "--directive", "fibonacci", "--steps", "200")
    assert rc == 0 and json.loads(out)["full"]
    rc, out, _ = run(capsys, "exchange", "--directive", "tribonacci", "--steps", "200", "--cloud", "5000")
    assert rc == 0


def test_check_report(capsys):
    rc, out, _ = run(capsys, "check", "--directive", "tribonacci", "--skip", "lyapunov,radius_growth",
                     "--max-n", "8", "--cloud", "3000")
    data = json.loads(out)
    assert rc == 0 and data["geometric_coincidence"]["found"] and data["errors"] == []


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("directive = tribonacci\nn = 7\nno_header = true\n")
    rc, out, _ = run(capsys, "--config", str(cfg), "limitword")
    assert rc == 0 and out.strip() == TRIBONACCI_31[:7]


def test_fractal_in_u_perp(tmp_path, capsys):
    out = tmp_path / "u.svg"
    rc, _, _ = run(capsys, "fractal", "--directive", "tribonacci", "--n", "1000", "--plane", "u", "--out", str(out))
    assert rc == 0 and "plane=u-perp" in out.read_text()
