import io
import json

import numpy as np
import pytest

from wandering_lab.cli import load_config, run
from wandering_lab.qc_numerics import GridMap
from wandering_lab.render import SCHEMA, read_p6, read_points_csv


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def report(*argv):
    code, out, err = call(*argv)
    assert code == 0, err
    doc = json.loads(out)
    assert doc["schema"] == SCHEMA
    return doc


@pytest.fixture(autouse=True)
def no_env_out(monkeypatch):
    monkeypatch.delenv("WANDERING_LAB_OUT", raising=False)


def test_schwarz_check_example():
    doc = report("schwarz-check", "--trials", "1000", "--seed", "7")
    assert doc["violations"] == 0 and doc["trials"] == 1000


def test_template_check_example():
    doc = report("template-check", "--d", "2")
    assert doc["g_zk_residual"] < 1e-10 and doc["semiconjugacy_residual"] < 1e-10


def test_unknown_flag_is_usage_error():
    code, out, err = call("schwarz-check", "--nope")
    assert code == 64 and "usage" in err and out == ""
    assert call("no-such-command")[0] == 64
    assert call()[0] == 64


def test_precondition_failure_exits_two():
    code, out, err = call("blaschke-info", "--zeros", "1.5")
    assert code == 2 and "error" in err and out == ""
    assert call("equipotential", "--R", "0.5")[0] == 2


def test_complex_arguments_accept_i():
    doc = report("blaschke-info", "--zeros", "0.3,0.5i")
    assert doc["zeros"][2] == [0.0, 0.5]


def test_out_dir_and_env_override(tmp_path, monkeypatch):
    code, out, _ = call("template-check", "--out", str(tmp_path / "a"))
    assert code == 0 and out == ""
    assert json.loads((tmp_path / "a" / "report.json").read_text())["command"] == "template-check"
    monkeypatch.setenv("WANDERING_LAB_OUT", str(tmp_path / "b"))
    assert call("template-check")[0] == 0
    assert (tmp_path / "b" / "report.json").exists()


def test_config_roundtrip_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    first = report("schwarz-check", "--trials", "20", "--seed", "3", "--save-config", str(cfg))
    keys = load_config(cfg)
    assert keys["command"] == "schwarz-check" and keys["trials"] == "20"
    again = report("--config", str(cfg))
    assert again == first
    over = report("--config", str(cfg), "--trials", "5")
    assert over["trials"] == 5


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("command = schwarz-check\nfrobnicate = 1\n")
    assert call("--config", str(cfg))[0] == 64


def test_deterministic_reports():
    a = call("grand-orbit", "--backward", "4")[1]
    b = call("grand-orbit", "--backward", "4")[1]
    assert a == b


def test_glue_writes_rasters(tmp_path):
    code, _, err = call("glue", "--n-max", "1", "--lift-depth", "1", "--n-boundary", "128",
                        "--n-t", "64", "--out", str(tmp_path))
    assert code == 0, err
    g = GridMap.load_raster(tmp_path / "h_1.wlgrid")
    assert g.kind == "logpolar" and g.values.shape[0] == 64
    rep = json.loads((tmp_path / "report.json").read_text())
    assert max(rep["residuals"]) < 1e-6


def test_render_julia_raster(tmp_path):
    code, _, _ = call("render-julia", "--width", "40", "--height", "30", "--out", str(tmp_path))
    assert code == 0
    img = read_p6(tmp_path / "julia.ppm")
    assert img.shape == (30, 40, 3)
    # the attracting fixed point at 0 lies in the filled Julia set (black)
    assert np.all(img[15, 20] == 0)


def test_equipotential_and_riemann_from_file(tmp_path):
    assert call("equipotential", "--n", "1", "--samples", "256", "--out", str(tmp_path))[0] == 0
    pts = read_points_csv(tmp_path / "boundary.csv")
    assert len(pts) == 256
    doc = report("riemann-map", "--boundary", str(tmp_path / "boundary.csv"))
    assert doc["roundtrip_error"] < 1e-8


def test_transport_example():
    doc = report("transport")
    assert abs(complex(*doc["w"]) - (-1 / 3)) < 1e-8


def test_seq_subcommands():
    cert = report("seq-certify", "--n-max", "200")
    assert cert["contraction_average"] < 0.6
    assert cert["certificate"]["uniformly_hyperbolic"] is False
    assert report("seq-rate", "--preset", "power:2")["rate"] < 1


def test_bottcher_and_discreteness():
    doc = report("bottcher", "--z", "3", "--level", "1.0", "--theta", "0.25")
    assert abs(doc["ray_point_green"] - 1.0) < 1e-10
    assert report("discreteness", "--z", "0.03871")["verdict"] == "discrete-evidence"


@pytest.mark.slow
def test_coexistence_example(tmp_path):
    out = tmp_path / "run1"
    code, _, err = call("coexistence", "--lambda", "0.5", "--depth", "8", "--raster", "120",
                        "--out", str(out))
    assert code == 0, err
    rep = json.loads((out / "report.json").read_text())
    assert rep["verdicts"] == ["discrete-evidence", "indiscrete-evidence"]
    for name in rep["figures"]:
        assert (out / name).stat().st_size > 0
    assert read_p6(out / "coexistence.ppm").shape == (120, 120, 3)
