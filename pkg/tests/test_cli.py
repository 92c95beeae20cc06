import json

import numpy as np
import pytest

from afree.cli import main
from afree.torus import GridSpec, PeriodicField, read_afld, write_afld


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out.strip()


def test_help(capsys):
    assert main(["--help"]) == 0
    assert "synth" in capsys.readouterr().out


def test_synth_verify_roundtrip(tmp_path, capsys):
    out = tmp_path / "t.json"
    code, line = run(capsys, "synth", "--fixture", "div2", "--out", out, "--report", tmp_path / "r.txt")
    assert code == 0 and "l=2" in line and "deg_G=4" in line
    code, line = run(capsys, "verify", "--triple", out, "--expand")
    assert code == 0 and "status=pass" in line


def test_verify_fails_on_corrupted_triple(tmp_path, capsys):
    out = tmp_path / "t.json"
    run(capsys, "synth", "--fixture", "div2", "--out", out)
    data = json.loads(out.read_text())
    data["L"]["terms"][0]["matrix"][1][1] = "2"
    out.write_text(json.dumps(data))
    code, line = run(capsys, "verify", "--triple", out)
    assert code == 1 and "status=fail" in line


def test_malformed_inputs(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "verify", "--triple", bad)[0] == 2
    assert run(capsys, "synth", "--operator", bad, "--out", tmp_path / "o.json")[0] == 2
    junk = tmp_path / "junk.afld"
    junk.write_bytes(b"AFLDxxxx")
    assert run(capsys, "norm", "--field", junk)[0] == 2
    assert run(capsys, "verify", "--triple", tmp_path / "missing.json")[0] == 2
    assert main(["synth", "--bogus"]) == 2


def test_genfree_solve_norm(tmp_path, capsys):
    f = tmp_path / "u.afld"
    code, line = run(capsys, "genfree", "--fixture", "div2", "--grid", 32, "--band", 4, "--seed", 3, "--out", f)
    assert code == 0
    U = read_afld(f)
    assert U.grid.dims == (32, 32) and U.N == 2
    code, line = run(capsys, "solve", "--fixture", "div2", "--field", f, "--out", tmp_path / "phi.afld")
    assert code == 0 and "status=ok" in line
    assert read_afld(tmp_path / "phi.afld").N == 2
    code, line = run(capsys, "norm", "--field", f, "--p", 2, "--sobolev", 2)
    assert code == 0 and "sobolev=" in line


def test_solve_rejects_non_afree(tmp_path, capsys):
    grid = GridSpec.cube(2, 16)
    x, y = np.meshgrid(*(np.arange(16) / 16,) * 2, indexing="ij")
    # a gradient is not divergence free
    g = PeriodicField(grid, np.stack([np.cos(2 * np.pi * x), np.zeros_like(y)], axis=-1))
    f = tmp_path / "g.afld"
    write_afld(f, g)
    code, _ = run(capsys, "solve", "--fixture", "div2", "--field", f, "--out", tmp_path / "o.afld")
    assert code == 2
    assert not (tmp_path / "o.afld").exists()


def test_experiment_commands(tmp_path, capsys):
    code, line = run(capsys, "jensen", "--dim", 2, "--trials", 5, "--grid", 16, "--band", 3, "--seed", 1,
                     "--report", tmp_path / "j.csv")
    assert code == 0 and "violations=0" in line
    assert (tmp_path / "j.csv").read_text().splitlines()[0] == "trial,lhs,rhs,gap,satisfied"
    code, line = run(capsys, "probe", "--functional", "pnorm", "--trials", 3, "--seed", 2)
    assert code == 0
    code, line = run(capsys, "probe", "--functional", "negpnorm", "--trials", 3, "--seed", 2)
    assert code == 1 and "status=fail" in line
    code, line = run(capsys, "bound", "--fixture", "div2", "--grids", "16,32", "--trials", 3, "--seed", 0,
                     "--p", "2")
    assert code == 0
    base = tmp_path / "b.afld"
    run(capsys, "genfree", "--fixture", "symdiv2", "--grid", 32, "--band", 3, "--seed", 4, "--out", base)
    code, line = run(capsys, "lsc", "--fixture", "symdiv2", "--functional", "pnorm", "--base", base)
    assert code == 0 and "mode=lsc" in line


def test_fixtures_command(tmp_path, capsys):
    code, _ = run(capsys, "fixtures", "--out-dir", tmp_path)
    assert code == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"div2.json", "symdiv3.json", "div2_triple.json", "div2_report.txt"} <= names


def test_outputs_are_deterministic(tmp_path, capsys):
    paths = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        run(capsys, "synth", "--fixture", "curl2", "--out", d / "t.json")
        run(capsys, "genfree", "--fixture", "curl2", "--grid", 16, "--band", 3, "--seed", 9, "--out", d / "u.afld")
        run(capsys, "jensen", "--dim", 2, "--trials", 3, "--grid", 16, "--band", 2, "--seed", 5,
            "--report", d / "j.csv")
        paths.append(d)
    for name in ("t.json", "u.afld", "j.csv"):
        assert (paths[0] / name).read_bytes() == (paths[1] / name).read_bytes()


def test_genfree_dpt_shift_feeds_lsc(tmp_path, capsys):
    base = tmp_path / "s.afld"
    code, _ = run(capsys, "genfree", "--fixture", "symdiv2", "--grid", 64, "--band", 3, "--seed", 2,
                  "--dpt-shift", 1, "--out", base)
    assert code == 0
    code, line = run(capsys, "lsc", "--fixture", "symdiv2", "--functional", "detpow", "--base", base,
                     "--report", tmp_path / "l.csv")
    assert code == 0 and "mode=usc" in line and "spread=0 " in line + " "
    assert run(capsys, "genfree", "--fixture", "div2", "--grid", 16, "--band", 2, "--seed", 2,
               "--dpt-shift", 1, "--out", tmp_path / "x.afld")[0] == 2
