import csv
import subprocess
import sys

import numpy as np
import pytest

from ewpfista.cli import main
from ewpfista.gridio import read_grid


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_phantom_commands(work):
    assert main(["phantom", "--kind", "shepp", "--size", "256", "--out", "p.ewp"]) == 0
    assert read_grid("p.ewp", "image").shape == (256, 256)
    assert main(["phantom", "--kind", "piecewise", "--regions", "5", "--seed", "7",
                 "--out", "q.ewp", "--edges", "e.ewp"]) == 0
    assert read_grid("e.ewp", "edgemap").data.max() == 1.0


def test_usage_errors_exit_2(work):
    assert main(["phantom", "--kind", "brain", "--out", "x"]) == 2
    assert main(["mask", "--kind", "cartesian", "--af", "0.5", "--out", "m.ewp"]) == 2
    assert main(["experiment", "--methods", "uniform,magic", "--csv", "x.csv"]) == 2
    assert main([]) == 2


def test_runtime_errors_exit_1(work):
    assert main(["eval", "--ref", "missing.ewp", "--recon", "missing.ewp"]) == 1
    main(["mask", "--kind", "full", "--size", "16", "--out", "m.ewp"])
    assert main(["eval", "--ref", "m.ewp", "--recon", "m.ewp"]) == 1  # kind mismatch


def test_mask_cardinality(work):
    assert main(["mask", "--kind", "cartesian", "--af", "8", "--size", "256", "--seed", "1",
                 "--out", "m.ewp"]) == 0
    assert read_grid("m.ewp", "mask").data.any(axis=0).sum() == 32
    assert main(["mask", "--kind", "random2d", "--rate", "0.18", "--size", "256", "--seed", "1",
                 "--out", "r.ewp"]) == 0
    assert read_grid("r.ewp", "mask").count == 11796


def test_recon_outputs(work, capsys):
    main(["phantom", "--kind", "piecewise", "--size", "64", "--seed", "2", "--out", "p.ewp",
          "--edges", "e.ewp"])
    main(["mask", "--kind", "cartesian", "--af", "4", "--size", "64", "--out", "m.ewp"])
    args = ["recon", "--image", "p.ewp", "--mask", "m.ewp", "--lambda", "1e-4", "--iters", "20",
            "--csv", "results.csv"]
    assert main(args + ["--edge", "none", "--out", "r.ewp", "--pgm", "r.pgm"]) == 0
    assert main(args + ["--edge", "oracle", "--oracle", "e.ewp", "--out", "o.ewp",
                        "--edges-out", "used.ewp", "--error-map", "o.err"]) == 0
    assert "rlne=" in capsys.readouterr().out
    ref = read_grid("p.ewp", "image")
    rec = read_grid("r.ewp", "image")
    err = read_grid("r.ewp.err", "real")
    assert np.allclose(err.data, np.abs(ref.data - rec.data))
    assert read_grid("used.ewp", "edgemap") == read_grid("e.ewp", "edgemap")
    assert (work / "r.pgm").read_bytes().startswith(b"P5\n64 64\n255\n")
    rows = list(csv.DictReader(open("results.csv")))
    assert [r["method"] for r in rows] == ["uniform", "oracle-edge"]
    assert all(float(r["rlne"]) > 0 and r["psnr_std"] and r["psnr_paper"] for r in rows)
    assert main(["recon", "--image", "p.ewp", "--mask", "m.ewp", "--edge", "oracle", "--out", "z"]) == 2


def test_recon_canny_on_constant_image_equals_uniform(work):
    from ewpfista.core import ComplexImage
    from ewpfista.gridio import write_grid

    write_grid(ComplexImage(np.full((32, 32), 0.5)), "c.ewp")
    main(["mask", "--kind", "cartesian", "--af", "2", "--size", "32", "--out", "m.ewp"])
    base = ["recon", "--image", "c.ewp", "--mask", "m.ewp", "--iters", "10"]
    main(base + ["--edge", "detected", "--detector", "canny", "--lambda", "1e-3", "--out", "a.ewp",
                 "--edges-out", "w.ewp"])
    main(base + ["--edge", "none", "--lambda", "1e-2", "--out", "b.ewp"])
    assert not read_grid("w.ewp", "edgemap").data.any()
    a, b = read_grid("a.ewp", "image").data, read_grid("b.ewp", "image").data
    assert np.abs(a - b).max() <= 1e-12


def test_experiment_deterministic_30_rows(work):
    args = ["experiment", "--size", "32", "--iters", "3", "--masks", "cartesian:6,cartesian:8"]
    assert main(args + ["--csv", "a.csv"]) == 0
    assert main(args + ["--csv", "b.csv", "--workers", "2"]) == 0
    a, b = (work / "a.csv").read_bytes(), (work / "b.csv").read_bytes()
    assert a == b
    assert len(a.decode().splitlines()) == 31


def test_detector_comparison_table_shape(work):
    args = ["experiment", "--size", "32", "--iters", "2", "--masks", "cartesian:4,random2d:0.3",
            "--methods", "tv-edge,sobel-edge,canny-edge", "--lambdas", "1e-3", "--csv", "d.csv"]
    assert main(args) == 0
    rows = list(csv.DictReader(open("d.csv")))
    assert [(r["detector"], r["mask_kind"]) for r in rows] == [
        ("tv", "cartesian"), ("tv", "random2d"), ("sobel", "cartesian"),
        ("sobel", "random2d"), ("canny", "cartesian"), ("canny", "random2d"),
    ]


def test_eval_and_export(work, capsys):
    main(["phantom", "--kind", "shepp", "--size", "32", "--out", "p.ewp"])
    assert main(["eval", "--ref", "p.ewp", "--recon", "p.ewp"]) == 0
    assert "rlne=0.0 psnr_std=inf" in capsys.readouterr().out
    assert main(["export", "--in", "p.ewp", "--out", "p.pgm", "--scaling", "absolute01"]) == 0
    assert (work / "p.pgm").stat().st_size == len(b"P5\n32 32\n255\n") + 32 * 32


def test_module_entry_point(work):
    out = subprocess.run([sys.executable, "-m", "ewpfista", "mask", "--kind", "cartesian",
                          "--af", "0.5", "--out", "m.ewp"], capture_output=True)
    assert out.returncode == 2
