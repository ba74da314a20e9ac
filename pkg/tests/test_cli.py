from __future__ import annotations

import io
import json

import pytest

from fraclab import __version__
from fraclab.cli import ConfigError, main, parse_config, render_csv, run_and_report


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_json_report(capsys):
    code, out, _ = run(["constants", "--N", "2", "--s", "0.5"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"task", "inputs", "outputs", "diagnostics", "versions"}
    assert doc["outputs"]["C_s_derived"] == pytest.approx(0.5)
    assert doc["outputs"]["C_s_paper"] == pytest.approx(1.0)
    assert doc["versions"]["fraclab"] == __version__


def test_csv_header(capsys):
    code, out, _ = run(["eval", "--N", "1", "--s", "0.75", "--xi", "2", "--x", "0.3", "--preset", "fast"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == f"# fraclab v{__version__} schema=eval:1"
    assert lines[1].startswith("field,x,value")


def test_byte_identical_reports(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["wos", "--N", "2", "--s", "0.5", "--x", "1,0", "--g", "const", "--walks", "300", "--seed", "4", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("N = 1\ns = 0.3\nseed = 5\n[wos]\nx = 1\ng = const\nwalks = 100\n")
    c = parse_config(cfg.read_text(), {"task": "wos", "seed": "9"}, env={"FRACLAB_SEED": "1"})
    assert c.seed == 9
    c = parse_config(cfg.read_text(), {"task": "wos"}, env={"FRACLAB_SEED": "1"})
    assert c.seed == 5
    c = parse_config("N = 1\ns = 0.3\n[wos]\nx = 1\ng = const\n", {"task": "wos"}, env={"FRACLAB_SEED": "1"})
    assert c.seed == 1
    code, out, _ = run(["wos", "--config", str(cfg), "--format", "csv"], capsys)
    assert code == 0 and out.startswith("# fraclab")


@pytest.mark.parametrize(
    "text, key",
    [
        ("N = 1\ns = 0.3\nbogus = 1\n", "run.bogus"),
        ("N = 1\ns = abc\n", "--s"),
        ("N = 2\ns = 0.3\n[eval]\nx = 1\n", "eval.x"),
        ("N = 2\ns = 0.3\n[nope]\na = 1\n", "nope"),
        ("N = 2\ns = 0.3\n[eval]\nfield = sin\n", "eval.field"),
    ],
)
def test_config_errors_name_the_key(text, key):
    flags = {"task": "eval"}
    if key == "--s":
        flags["s"] = "abc"
        text = "N = 1\n"
    with pytest.raises(ConfigError) as exc:
        parse_config(text, flags, env={})
    assert exc.value.key == key


def test_domain_errors_exit_nonzero(capsys):
    code, _, err = run(["eval", "--N", "2", "--s", "1.5", "--x", "1,0"], capsys)
    assert code == 2 and "run.s" in err
    code, _, err = run(["wos", "--N", "2", "--s", "0.5", "--x", "-1,0", "--g", "const"], capsys)
    assert code == 2 and "wos.x" in err


def test_singular_kernel_exits_nonzero(capsys):
    code, out, _ = run(["kernel", "--N", "2", "--s", "0.5", "--name", "green_halfspace", "--x", "1,0", "--y", "1,0"], capsys)
    assert code == 1 and ",inf,True" in out


def test_verify_poly_exact(capsys):
    code, out, _ = run(["verify", "poly", "--N", "3", "--m", "4"], capsys)
    assert code == 0
    rows = out.splitlines()[2:]
    assert len(rows) == 9 and all(r.endswith(",0.0") for r in rows)


def test_wrong_constant_mode_fails(capsys):
    # the printed C_s does not close the Q_s identity: nonzero exit
    args = ["verify", "identity", "--N", "1", "--s", "0.4", "--which", "qs"]
    code, _, _ = run(args + ["--cs-mode", "paper"], capsys)
    assert code == 1
    code, _, _ = run(args + ["--cs-mode", "weak"], capsys)
    assert code == 0


def test_converge_and_negative_values(capsys):
    code, out, _ = run(["converge", "--N", "2", "--s", "0.5", "--study", "poisson", "--grid", "0.1,0.01,0.001", "--l1s", "false"], capsys)
    assert code == 0 and out.count("\n") == 5
    code, _, _ = run(["wos", "--N", "2", "--s", "0.5", "--x", "1,0", "--box-lo", "-2,-1", "--box-hi", "-1,1", "--walks", "4000"], capsys)
    assert code == 0


def test_render_csv_rows():
    text = render_csv("kernel", [{"name": "g", "x": [1.0, 2.0], "y": None, "value": 0.5, "singular": False}])
    assert text.splitlines()[2] == "g,1.0 2.0,,0.5,False"


def test_run_and_report_to_stream():
    cfg = parse_config("N = 3\n", {"task": "verify-poly", "m": "2"}, env={})
    buf = io.StringIO()
    assert run_and_report(cfg, buf) == 0
    assert "schema=verify-poly:1" in buf.getvalue()
