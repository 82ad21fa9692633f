import csv
import json

import pytest

from robin_spectra import cli
from robin_spectra.concurrency import max_workers, ordered_map
from robin_spectra.mesh import generate_disk_mesh, write_mesh


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    write_mesh(generate_disk_mesh(1.0, 0.1), d / "mesh.txt")
    (d / "spec.json").write_text(json.dumps({"p": 2, "beta": 1}))
    return d


def run(*args):
    return cli.main([str(a) for a in args])


def test_solve_writes_result(workdir):
    out = workdir / "result.json"
    assert run("solve", "--spec", workdir / "spec.json", "--mesh", workdir / "mesh.txt", "--out", out) == 0
    res = json.loads(out.read_text())
    assert res["converged"] is True
    assert {"lambda", "residual", "iterations", "converged", "u", "config_hash"} <= set(res)
    assert res["lambda"] == pytest.approx(1.58, rel=1e-2)


def test_solve_from_config(workdir):
    cfg = workdir / "solve.json"
    cfg.write_text(json.dumps({"spec": {"p": 3, "beta": 2}, "mesh": {"shape": "ellipse", "h": 0.15, "a": 2, "b": 1},
                               "solver": {"tol_residual": 1e-8}}))
    assert run("solve", "--config", cfg, "--out", workdir / "out_cfg") == 0
    summary = json.loads((workdir / "out_cfg" / "solve.json").read_text())
    assert summary["config"]["solver"] == {"tol_residual": 1e-8}


def test_scaling_report_and_determinism(workdir):
    cfg = workdir / "scaling.json"
    cfg.write_text(json.dumps({"spec": {"p": 2, "beta": 1}, "mesh": {"path": str(workdir / "mesh.txt")}, "ts": [2]}))
    assert run("scaling", "--config", cfg, "--out", workdir / "s1") == 0
    assert run("scaling", "--config", cfg, "--out", workdir / "s2") == 0
    a = (workdir / "s1" / "scaling.json").read_bytes()
    assert a == (workdir / "s2" / "scaling.json").read_bytes()
    assert (workdir / "s1" / "scaling.csv").read_bytes() == (workdir / "s2" / "scaling.csv").read_bytes()
    rep = json.loads(a)
    assert rep["checks"]["scaling_identity"]["worst_rel_diff"] <= 1e-8
    assert rep["checks"]["scaling_identity"]["threshold"] == 1e-8
    assert len(rep["config_hash"]) == 64
    rows = list(csv.reader((workdir / "s1" / "scaling.csv").open(newline="")))
    assert rows[0] == ["t", "lambda_base", "lambda_scaled", "rescaled", "rel_diff"]


def test_config_hash_tracks_content(workdir):
    a = cli.config_hash({"experiment": "solve", "spec": {"p": 2, "beta": 1}})
    b = cli.config_hash({"spec": {"beta": 1, "p": 2}, "experiment": "solve", "out": "x"})
    c = cli.config_hash({"experiment": "solve", "spec": {"p": 2, "beta": 2}})
    assert a == b != c


def test_malformed_json_exits_2(workdir):
    bad = workdir / "bad.json"
    bad.write_text("{")
    assert run("solve", "--config", bad) == 2


def test_unknown_field_exits_2(workdir):
    bad = workdir / "unknown.json"
    bad.write_text(json.dumps({"spec": {"p": 2, "beta": 1}, "mesh": {"shape": "disk", "h": 0.2}, "tolerence": 1}))
    assert run("solve", "--config", bad) == 2


def test_invalid_spec_exits_2(workdir):
    (workdir / "p1.json").write_text(json.dumps({"p": 1, "beta": 1}))
    assert run("solve", "--spec", workdir / "p1.json", "--mesh", workdir / "mesh.txt") == 2


def test_numerical_failure_exits_1(workdir, capsys):
    cfg = workdir / "slow.json"
    cfg.write_text(json.dumps({"spec": {"p": 3, "beta": 1}, "mesh": {"path": str(workdir / "mesh.txt")},
                               "solver": {"max_iter": 2}}))
    assert run("solve", "--config", cfg) == 1
    assert '"converged": false' in capsys.readouterr().out


def test_sweep_csv_columns(workdir):
    out = workdir / "sweep"
    assert run("sweep-beta", "--spec", workdir / "spec.json", "--mesh", workdir / "mesh.txt",
               "--betas", "0.5,1,2", "--out", out) == 0
    rows = list(csv.DictReader((out / "sweep-beta.csv").open(newline="")))
    assert list(rows[0])[:7] == ["beta", "lambda", "dldb_formula", "dldb_fd", "rel_err", "sandwich_lower",
                                 "sandwich_upper"]
    assert [float(r["beta"]) for r in rows] == [0.5, 1.0, 2.0]


def test_unsorted_betas_exit_2(workdir):
    assert run("sweep-beta", "--spec", workdir / "spec.json", "--mesh", workdir / "mesh.txt",
               "--betas", "2,1") == 2


def test_shape_deriv_csv(workdir):
    out = workdir / "shape"
    assert run("shape-deriv", "--spec", workdir / "spec.json", "--mesh", workdir / "mesh.txt",
               "--field", "dilate", "--out", out) == 0
    header = (out / "shape-deriv.csv").read_text().splitlines()[0].split(",")
    assert header == ["grad_term", "potential_term", "eigen_term", "curvature_term", "robin_term", "formula",
                      "alt_form", "fd", "rel_err"]


def test_field_file(workdir, tmp_path):
    import numpy as np

    from robin_spectra.mesh import read_mesh

    m = read_mesh(workdir / "mesh.txt")
    np.savetxt(tmp_path / "v.txt", m.vertices)
    assert run("hadamard", "--mesh", workdir / "mesh.txt", "--field", "file", "--field-file", tmp_path / "v.txt",
               "--out", tmp_path / "h") == 0
    rep = json.loads((tmp_path / "h" / "hadamard.json").read_text())
    assert rep["volume"]["predicted"] == pytest.approx(2 * m.area, rel=1e-12)


def test_potential_modes(workdir, tmp_path):
    base = ["--spec", workdir / "spec.json", "--mesh", workdir / "mesh.txt"]
    assert run("potential-check", "--mode", "shift", *base, "--out", tmp_path / "a") == 0
    assert run("potential-check", "--mode", "coercive", "--samples", "20", *base, "--out", tmp_path / "b") == 0
    assert run("potential-check", "--mode", "mono", "--V1", "const:1", "--V2", "const:0", *base) == 2


def test_radial_and_mesh_commands(tmp_path):
    assert run("radial", "--p", "2", "--beta", "1", "--V", "const:0", "--size", "5000", "--out", tmp_path / "r") == 0
    rep = json.loads((tmp_path / "r" / "radial.json").read_text())
    assert rep["checks"]["bessel_oracle"]["pass"]
    assert run("radial", "--V", "poly:0,0,1", "--p", "2.5") == 0
    assert run("radial", "--V", "bogus") == 2
    assert run("mesh", "--shape", "rect", "--h", "0.2", "--width", "1", "--height", "1",
               "--out", tmp_path / "m" / "rect.txt") == 0
    assert (tmp_path / "m" / "rect.txt").exists()
    assert json.loads((tmp_path / "m" / "rect.json").read_text())["mesh"]["area"] == pytest.approx(1.0)


def test_convergence_study_inputs(tmp_path):
    (tmp_path / "cs.json").write_text(json.dumps({"spec": {"p": 2, "beta": 1}, "hs": []}))
    assert run("convergence-study", "--config", tmp_path / "cs.json") == 2
    (tmp_path / "cs2.json").write_text(json.dumps({"spec": {"p": 2, "beta": 1}, "hs": [0.1, 0.2]}))
    assert run("convergence-study", "--config", tmp_path / "cs2.json") == 2


def test_richardson_helper():
    hs = [0.4, 0.2, 0.1]
    lams = [1.0 + 3 * h ** 2 for h in hs]
    out = cli.richardson(hs, lams)
    assert out["order"] == pytest.approx(2.0)
    assert out["limit"] == pytest.approx(1.0, abs=1e-12)


def test_non_monotone_error_warns(monkeypatch):
    from robin_spectra.model import ProblemSpec

    values = iter([1.6, 1.575, 1.58])

    class Fake:
        converged = True

        def __init__(self):
            self.lambda_ = next(values)

    monkeypatch.setattr(cli, "solve_first_eigenpair", lambda *a, **k: Fake())
    with pytest.warns(UserWarning, match="not monotone"):
        cli.convergence_study(ProblemSpec(2.0, 1.0), {"shape": "disk"}, [0.3, 0.2, 0.15], reference=1.577)


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("ROBIN_SPECTRA_THREADS", "3")
    assert max_workers() == 3
    monkeypatch.setenv("ROBIN_SPECTRA_THREADS", "2")
    assert ordered_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]


def test_usage_error_exits_2():
    assert run("solve", "--nope") == 2
    assert run("not-a-command") == 2
