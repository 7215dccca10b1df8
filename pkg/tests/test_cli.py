import csv
import io
import json
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from tbsmatrix.cli import ConfigError, load_config, main


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def data_rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


CHAIN = """
    [run]
    geometry = chain1d
    count = 21
    [chain1d]
    n = 4
    v_l = 0.6
    v_r = 0.6
"""


def test_sweep_csv(tmp_path, capsys):
    assert main(["sweep", "--config", write(tmp_path, CHAIN)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# tbsmatrix 0.1.0 sweep")
    assert "# chain1d.n = 4" in out
    rows = data_rows(out)
    assert len(rows) == 21
    G = np.array([float(r["conductance"]) for r in rows])
    assert np.all((G >= 0) & (G <= 1 + 1e-12))


def test_sweep_to_file_and_json(tmp_path):
    out = tmp_path / "s.json"
    assert main(["sweep", "--config", write(tmp_path, CHAIN), "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["command"] == "sweep"
    assert doc["config"]["chain1d"]["n"] == 4
    assert len(doc["rows"]) == 21
    assert set(doc["rows"][0]) == set(doc["columns"])


def test_dot_case_c_zero_at_band_centre(tmp_path, capsys):
    cfg = write(tmp_path, """
        [run]
        geometry = dot2
        emin = -1.0
        emax = 1.0
        count = 21
        [dot2]
        case = C
        v_l = 1.0
        v_r = 0.7
    """)
    assert main(["sweep", "--config", cfg]) == 0
    rows = data_rows(capsys.readouterr().out)
    centre = [r for r in rows if abs(float(r["E"])) < 1e-12][0]
    assert float(centre["conductance"]) < 1e-28


def test_uncoupled_poles_have_zero_width(tmp_path, capsys):
    cfg = write(tmp_path, """
        [run]
        geometry = chain1d
        [chain1d]
        n = 3
        v_l = 0.0
        v_r = 0.0
        [poles]
        energy = 0.5
    """)
    assert main(["poles", "--config", cfg]) == 0
    rows = data_rows(capsys.readouterr().out)
    assert [float(r["width"]) for r in rows] == [0.0, 0.0, 0.0]
    assert np.allclose([float(r["re_z"]) for r in rows], [-np.sqrt(2), 0.0, np.sqrt(2)])


def test_double_pole_is_one_row(tmp_path, capsys):
    cfg = write(tmp_path, """
        [run]
        geometry = dot2
        [dot2]
        case = C
        v_l = 1.0
        v_r = 1.0
        [poles]
        energy = 0.0
    """)
    assert main(["poles", "--config", cfg]) == 0
    rows = data_rows(capsys.readouterr().out)
    assert len(rows) == 1
    assert rows[0]["multiplicity"] == "2" and rows[0]["defective"] == "1"


def test_track_reports_trapping(tmp_path, capsys):
    cfg = write(tmp_path, """
        [run]
        geometry = chain1d
        [chain1d]
        n = 2
        v_l = 1.0
        v_r = 1.0
        [track]
        parameter = coupling
        start = 0.0
        stop = 4.0
        count = 81
        energy = 0.0
    """)
    assert main(["track", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "broad = 2, trapped = 0" in out
    assert len(data_rows(out)) == 81 * 2


@pytest.mark.parametrize("geometry", ["chain1d", "rect2d"])
def test_validate_passes(tmp_path, capsys, geometry):
    extra = {"chain1d": "[chain1d]\nn = 3\nv_l = 0.8\nv_r = 1.2\n", "rect2d": "[rect2d]\nnx = 4\nny = 3\n"}
    cfg = write(tmp_path, f"[run]\ngeometry = {geometry}\n[validate]\ncount = 9\n" + extra[geometry])
    assert main(["validate", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "PASS" in out


def test_validate_fails_with_tiny_tolerance(tmp_path, capsys):
    cfg = write(tmp_path, CHAIN + "[validate]\ncount = 9\ntolerance_scale = 1e-30\n")
    assert main(["validate", "--config", cfg]) == 3


def test_config_errors_name_the_field(tmp_path, capsys):
    assert main(["sweep", "--config", write(tmp_path, CHAIN.replace("count = 21", "count = 1"))]) == 1
    assert "count" in capsys.readouterr().err
    assert main(["sweep", "--config", write(tmp_path, CHAIN + "    colour = red\n")]) == 1
    assert "colour" in capsys.readouterr().err
    assert main(["sweep", "--config", str(tmp_path / "missing.ini")]) == 1


def test_missing_config_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["sweep"])
    assert exc.value.code == 1


def test_load_config_rejects_unknown_section():
    with pytest.raises(ConfigError):
        load_config("[run]\ngeometry = chain1d\n[extra]\nx = 1\n")
    with pytest.raises(ConfigError):
        load_config("[run]\ngeometry = torus\n")


def test_output_is_deterministic(tmp_path):
    cfg = write(tmp_path, CHAIN)
    outs = [tmp_path / f"o{i}.csv" for i in range(2)]
    for o in outs:
        assert main(["sweep", "--config", cfg, "--out", str(o)]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "tbsmatrix", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "0.1.0" in res.stdout
