import time

import numpy as np
import pytest

from bathyscatter.config import ExperimentConfig, load_config
from bathyscatter.dispersion import WaveParams
from bathyscatter.experiment import (
    METRIC_COLUMNS,
    compute_metrics,
    interpolate_to_grid,
    metrics_csv,
    run_experiment,
)
from bathyscatter.forward import incoming_field
from bathyscatter.grid import ComplexField, Grid, RealField, read_field
from bathyscatter.topography import generate_topography, preset

SMALL = dict(samples_per_side=40, topographies=("d1",), omegas=(1.0,))


class TestMetrics:
    def test_identical(self):
        g = Grid(10.0, 8)
        d = RealField(g, np.full(g.shape, 1.5))
        m = compute_metrics(d, d, ComplexField(g, np.ones(g.shape, complex)))
        assert m.relative_l2 == m.paper_normalization == m.max_abs == 0.0

    def test_constant_guess_closed_form(self):
        g = Grid(100.0, 100)
        d = generate_topography(preset("d1"), g).base
        flat = RealField(g, np.full(g.shape, 1.5))
        eta = incoming_field(g, WaveParams(1.0, 1.5))
        m = compute_metrics(d, flat, eta)
        h = 1.5 - d.values
        assert m.relative_l2 == pytest.approx(np.linalg.norm(h) / np.linalg.norm(d.values), rel=1e-14)
        assert m.paper_normalization == pytest.approx(np.linalg.norm(h) / (0.3 * 100), rel=1e-12)
        assert m.max_abs == pytest.approx(h.max())

    def test_grid_mismatch(self):
        a = RealField(Grid(1.0, 8), np.ones((8, 8)))
        b = RealField(Grid(2.0, 8), np.ones((8, 8)))
        with pytest.raises(ValueError):
            compute_metrics(a, b, ComplexField(Grid(1.0, 8), np.ones((8, 8), complex)))


def test_interpolation_coincident_nodes():
    fine = Grid(10.0, 20)
    x1, x2 = fine.coordinates()
    f = ComplexField(fine, (3 * x1 - 2 * x2 + 1) * (1 + 1j))
    out = interpolate_to_grid(f, Grid(10.0, 10))
    c1, c2 = Grid(10.0, 10).coordinates()
    assert np.allclose(out.values, (3 * c1 - 2 * c2 + 1) * (1 + 1j), atol=1e-13)
    assert np.array_equal(out.values, f.values[::2, ::2])


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("default")
    t = time.perf_counter()
    report = run_experiment(ExperimentConfig(output_dir=str(out)))
    return report, out, time.perf_counter() - t


class TestDefaultExperiment:
    def test_completes(self, default_run):
        report, out, elapsed = default_run
        assert not report.failed and elapsed < 600
        assert len(report.cells) == 4

    def test_outputs(self, default_run):
        _, out, _ = default_run
        header = (out / "metrics.csv").read_text().splitlines()[0]
        assert header == ",".join(METRIC_COLUMNS)
        cell = out / "d1_omega1"
        for name in ("depth_true", "eta", "measurement", "k_eps", "depth_rec", "relative_error"):
            read_field(cell / f"{name}.bscf")
        assert (cell / "depth_rec.pgm").read_text().startswith("P2")
        assert "seed = 0" in (out / "manifest.txt").read_text()

    def test_noise_is_ten_percent(self, default_run):
        report, _, _ = default_run
        for c in report.cells:
            assert abs(c.values["noise_level"] - 0.1) <= 1e-12

    def test_shorter_waves_do_worse(self, default_run):
        report, _, _ = default_run
        for topo in ("d1", "d2"):
            assert report.cell(topo, 1.0).values["relative_l2"] < report.cell(topo, 2.0).values["relative_l2"]

    def test_measurement_matches_clean_plus_noise(self, default_run):
        _, out, _ = default_run
        eta = read_field(out / "d2_omega2" / "eta.bscf").values
        m = read_field(out / "d2_omega2" / "measurement.bscf").values
        assert np.linalg.norm(m - eta) / np.linalg.norm(eta) == pytest.approx(0.1, abs=1e-12)


def test_flat_pipeline(tmp_path):
    cfg = ExperimentConfig(topographies=("flat",), omegas=(1.0,), output_dir=str(tmp_path))
    report = run_experiment(cfg)
    assert report.cells[0].values["relative_l2"] <= 0.05


def test_deterministic(tmp_path):
    a = run_experiment(ExperimentConfig(**SMALL, output_dir=str(tmp_path / "a")))
    b = run_experiment(ExperimentConfig(**SMALL, output_dir=str(tmp_path / "b")))
    assert (tmp_path / "a" / "metrics.csv").read_bytes() == (tmp_path / "b" / "metrics.csv").read_bytes()
    assert metrics_csv(a) == metrics_csv(b)


def test_manifest_reproduces_outputs(tmp_path):
    run_experiment(ExperimentConfig(**SMALL, seed=5, output_dir=str(tmp_path / "a")))
    cfg = load_config(tmp_path / "a" / "manifest.txt").with_overrides(output_dir=str(tmp_path / "b"))
    assert cfg.seed == 5
    run_experiment(cfg)
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(files) > 5
    for rel in files:
        if rel.name == "manifest.txt":
            continue
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes(), rel


def test_seed_changes_noise(tmp_path):
    a = run_experiment(ExperimentConfig(**SMALL, seed=1), write=False)
    b = run_experiment(ExperimentConfig(**SMALL, seed=2), write=False)
    assert a.cells[0].values["relative_l2"] != b.cells[0].values["relative_l2"]


def test_partial_failure_is_isolated(tmp_path):
    # d1 bumps reach past a 60 m domain, the flat cell still runs
    cfg = ExperimentConfig(side_length_m=60.0, samples_per_side=60, topographies=("flat", "d1"),
                           omegas=(1.0,), output_dir=str(tmp_path))
    report = run_experiment(cfg)
    assert [c.status for c in report.cells] == ["ok", "failed"]
    assert "frame" in report.cells[1].error
    assert "failed" in (tmp_path / "metrics.csv").read_text()


def test_thread_cap(monkeypatch, tmp_path):
    monkeypatch.setenv("BATHY_THREADS", "1")
    serial = run_experiment(ExperimentConfig(**{**SMALL, "omegas": (1.0, 2.0)}), write=False)
    monkeypatch.setenv("BATHY_THREADS", "4")
    par = run_experiment(ExperimentConfig(**{**SMALL, "omegas": (1.0, 2.0)}), write=False)
    assert metrics_csv(serial) == metrics_csv(par)
