import csv
import io
import json

import pytest
from click.testing import CliRunner

from diolab import __version__
from diolab.cli import main
from diolab.errors import InvariantError
from diolab.plots import emit_plotdata, series


@pytest.fixture
def run():
    runner = CliRunner()

    def _run(*args, **kw):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False, **kw)

    return _run


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_cf_json_envelope(run):
    r = run("--seed", 7, "cf", "--alpha", "sqrt2m1", "--K", 6)
    assert r.exit_code == 0
    doc = json.loads(r.output)
    assert doc["diolab"] == __version__
    assert doc["command"] == "cf" and doc["params"]["seed"] == 7
    assert [row["q_k"] for row in doc["result"]["rows"]] == [1, 2, 5, 12, 29, 70, 169]


def test_cf_csv_has_header_line(run):
    r = run("--format", "csv", "cf", "--alpha", "golden", "--K", 20)
    lines = r.output.splitlines()
    assert lines[0].startswith(f"# diolab {__version__} cf alpha=golden K=20")
    assert len(lines) == 23
    assert csv_rows(r.output)[-1]["q_k"] == "10946"


def test_no_header_output_is_byte_stable(run):
    a = run("--no-header", "--format", "csv", "gaps", "--alpha", "sqrt3m1", "--k", 5)
    b = run("--no-header", "--format", "csv", "gaps", "--alpha", "sqrt3m1", "--k", 5)
    assert a.output == b.output and not a.output.startswith("#")
    doc = json.loads(run("--no-header", "gaps", "--alpha", "sqrt3m1", "--k", 5).output)
    assert "diolab" not in doc
    assert sum(doc["result"]["type_counts"].values()) == doc["result"]["q_k"]


def test_scan_command(run):
    doc = json.loads(run("scan", "--alpha", "golden", "--x", "1/2", "--qhi", 1000).output)
    assert abs(doc["result"]["argmin"]) == 4


def test_onesided_build_and_refute(run):
    doc = json.loads(run("onesided", "--alpha", "growing", "--eps", "1/25", "--K", 40, "--depth", 2).output)
    assert all(row["ok"] for row in doc["result"]["lemmas"])
    r = run("--threads", 1, "onesided", "--alpha", "growing", "--eps", "3/10", "--action", "refute",
            "--samples", 3)
    doc = json.loads(r.output)
    assert doc["result"]["survivors"] == 0 and len(doc["result"]["runs"]) == 3


def test_refute_is_thread_independent(run):
    args = ("onesided", "--alpha", "growing", "--eps", "3/10", "--action", "refute", "--samples", 4)
    one = run("--no-header", "--threads", 1, *args).output
    two = run("--no-header", "--threads", 2, *args).output
    assert one == two


def test_dims_variants(run):
    doc = json.loads(run("dims", "--alpha", "growing", "--depth", 3).output)
    assert doc["construction"] == "erdos-taylor:delta=1/3,M=72"
    doc = json.loads(run("dims", "--alpha", "golden", "--what", "survivor", "--depth", 3).output)
    assert all(row["ok"] for row in doc["result"]["rows"])


def test_singular_and_matrix(run):
    doc = json.loads(run("singular", "--alpha", "golden", "--N", 40, "--eta", "1/2").output)
    assert doc["result"]["N"] == 40 and "heaviness" in doc["result"]
    doc = json.loads(run("matrix", "--matrix", "sqrt2m1,sqrt3m1", "--ymax", 40, "--delta", "1/4").output)
    assert [it["Y"] for it in doc["result"]["items"]] == [1, 2, 3, 5, 21, 25, 35]
    assert doc["result"]["grids"]


def test_matrix_json_input(run, tmp_path, fx):
    from diolab.matrix import MatrixSpec

    p = tmp_path / "A.json"
    p.write_text(json.dumps(MatrixSpec.row(fx["golden"], fx["sqrt2m1"]).to_json()))
    r = run("--format", "csv", "matrix", "--matrix", p, "--ymax", 10)
    assert r.exit_code == 0
    assert set(csv_rows(r.output)[0]) == {"i", "Y", "y1", "M_lo", "M_hi"}


def test_exit_precondition(run):
    r = run("scan", "--alpha", "golden", "--x", "1/3", "--qlo", 10, "--qhi", 5)
    assert r.exit_code == 2


def test_exit_bad_rational(run):
    r = run("scan", "--alpha", "golden", "--x", "one-third", "--qhi", 5)
    assert r.exit_code == 2


def test_exit_precision(run, monkeypatch):
    monkeypatch.setenv("DIOLAB_MAX_DEPTH", "30")
    r = run("cf", "--alpha", "golden", "--K", 60)
    assert r.exit_code == 3


def test_exit_budget(run):
    r = run("matrix", "--matrix", "golden,sqrt2m1,sqrt3m1", "--ymax", 500)
    assert r.exit_code == 4


def test_exit_invariant(run, monkeypatch):
    import diolab.singular as sg

    def broken(report):
        raise InvariantError("forced")

    monkeypatch.setattr(sg, "check_block_structure", broken)
    r = run("singular", "--alpha", "golden", "--N", 10)
    assert r.exit_code == 5


def test_config_precedence(run, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("format = csv\nseed = 11\ncf.K = 4\n# comment line\n")
    r = run("--config", cfg, "cf", "--alpha", "golden")
    assert "K=4" in r.output.splitlines()[0] and "seed=11" in r.output.splitlines()[0]
    r = run("--config", cfg, "--format", "json", "cf", "--alpha", "golden", "--K", 3)
    doc = json.loads(r.output)
    assert doc["params"]["K"] == 3 and doc["params"]["seed"] == 11


def test_report_files_and_figures(run, tmp_path):
    out = tmp_path / "rep" / "sing.json"
    r = run("-o", out, "singular", "--alpha", "sqrt2m1", "--N", 30, "--growth-K", 10)
    assert r.exit_code == 0 and out.exists()
    for kind in ("density", "growth"):
        assert (tmp_path / "rep" / f"sing_{kind}.png").stat().st_size > 0
        assert (tmp_path / "rep" / f"sing_{kind}.csv").read_text().count("\n") > 1
    again = tmp_path / "rep2.json"
    run("--no-plots", "-o", again, "cf", "--alpha", "golden", "--K", 5)
    assert not (tmp_path / "rep2_growth.png").exists()


def test_plot_data_empty_report():
    assert emit_plotdata(None, "density") == "N,density\n"
    assert series([], "dimension") == []
