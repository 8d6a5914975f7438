"""
Tests for evaluation/metrics.py and evaluation/report.py
"""

import csv

import numpy as np
import pytest

from evaluation.metrics import (
    MetricsError,
    extract_traces,
    pca_noise_std,
    r_squared,
    ssim,
    ssim_map,
    ssim_region,
    summarize,
)
from evaluation.report import REPORT_COLUMNS, MetricsReport, write_trace_comparison
from ingest.gather import Gather


def _rank_one(m=256, n=256, amplitude=10.0):
    t = np.sin(np.linspace(0, 6 * np.pi, m))
    x = np.cos(np.linspace(0, 2 * np.pi, n)) + 1.5
    return amplitude * np.outer(t, x)


class TestSsim:

    def test_identity_is_exactly_one(self, rng):
        x = rng.standard_normal((40, 30))
        assert ssim(x, x) == 1.0

    def test_gather_inputs(self, toy_gather):
        assert ssim(toy_gather, toy_gather) == 1.0

    def test_anticorrelated_checkerboard(self):
        i, j = np.indices((64, 64))
        x = np.where((i + j) % 2 == 0, 1.0, -1.0)
        assert ssim(x, -x) < -0.99

    def test_zero_reference_is_defined(self):
        zero = np.zeros((16, 16))
        assert ssim(zero, zero) == 1.0
        assert np.isfinite(ssim(np.ones((16, 16)), zero))

    def test_degrades_with_noise(self, rng):
        x = _rank_one(64, 64)
        light = ssim(x + 0.1 * rng.standard_normal(x.shape), x)
        heavy = ssim(x + 5.0 * rng.standard_normal(x.shape), x)
        assert 1.0 > light > heavy

    def test_small_gather_shrinks_window(self, rng):
        x = rng.standard_normal((6, 40))
        assert ssim_map(x, x).shape == (2, 30)
        assert ssim(x, x) == 1.0

    def test_shape_mismatch(self, rng):
        with pytest.raises(MetricsError, match="shape mismatch"):
            ssim(rng.standard_normal((8, 8)), rng.standard_normal((8, 9)))

    def test_even_window_rejected(self, rng):
        x = rng.standard_normal((16, 16))
        with pytest.raises(MetricsError):
            ssim(x, x, window=10)

    def test_region(self, rng):
        truth = rng.standard_normal((32, 32))
        recon = truth.copy()
        recon[:, 16:] = 0
        assert ssim_region(recon, truth, (0, 32), (0, 16)) == 1.0
        assert ssim_region(recon, truth, (0, 32), (16, 32)) < 0.5

    def test_region_outside_gather(self, rng):
        x = rng.standard_normal((16, 16))
        with pytest.raises(MetricsError):
            ssim_region(x, x, (0, 20), (0, 8))


class TestRSquared:

    def test_identity(self, rng):
        x = rng.standard_normal((20, 20))
        assert r_squared(x, x) == 1.0

    def test_mean_predictor(self, rng):
        truth = rng.standard_normal((20, 20))
        assert r_squared(np.full_like(truth, truth.mean()), truth) == pytest.approx(0.0, abs=1e-12)

    def test_unit_noise_on_unit_truth(self, rng):
        truth = rng.standard_normal((256, 256))
        pred = truth + rng.standard_normal(truth.shape)
        assert r_squared(pred, truth) == pytest.approx(0.0, abs=0.05)

    def test_never_exceeds_one(self, rng):
        truth = rng.standard_normal((16, 16))
        for _ in range(20):
            assert r_squared(truth + rng.standard_normal(truth.shape), truth) <= 1.0

    def test_constant_truth(self):
        with pytest.raises(MetricsError, match="constant"):
            r_squared(np.ones((4, 4)), np.full((4, 4), 3.0))


class TestPcaNoise:

    def test_pure_noise(self):
        rng = np.random.default_rng(99)
        for _ in range(20):
            noise = rng.normal(0.0, 10.0, size=(256, 256))
            assert pca_noise_std(noise) == pytest.approx(10.0, rel=0.15)

    def test_noiseless_rank_one(self):
        assert pca_noise_std(_rank_one()) < 1e-6 * 10.0

    def test_rank_one_plus_noise(self, rng):
        noisy = _rank_one() + rng.standard_normal((256, 256))
        assert pca_noise_std(noisy) == pytest.approx(1.0, rel=0.15)

    def test_column_permutation_and_sign(self, rng):
        noisy = _rank_one(64, 48) + rng.standard_normal((64, 48))
        base = pca_noise_std(noisy)
        assert pca_noise_std(noisy[:, rng.permutation(48)]) == pytest.approx(base, rel=1e-9)
        assert pca_noise_std(-noisy) == pytest.approx(base, rel=1e-9)

    def test_zero_gather(self):
        assert pca_noise_std(np.zeros((8, 8))) == 0.0

    @pytest.mark.parametrize("shape", [(1, 10), (10, 1)])
    def test_degenerate_shape(self, shape):
        with pytest.raises(MetricsError):
            pca_noise_std(np.ones(shape))

    @pytest.mark.parametrize("threshold", [0.0, 1.0])
    def test_threshold_range(self, threshold, rng):
        with pytest.raises(MetricsError):
            pca_noise_std(rng.standard_normal((8, 8)), threshold)


class TestTraceExtraction:

    def test_evenly_spaced(self, rng):
        x = rng.standard_normal((5, 10))
        indices, traces = extract_traces(x, 4)
        assert indices.tolist() == [0, 3, 6, 9]
        np.testing.assert_array_equal(traces, x[:, [0, 3, 6, 9]])

    def test_count_capped_at_width(self, rng):
        indices, _ = extract_traces(rng.standard_normal((5, 3)), 10)
        assert indices.tolist() == [0, 1, 2]

    def test_comparison_csv(self, tmp_path, rng):
        x = rng.standard_normal((4, 6))
        indices, traces = extract_traces(x, 2)
        path = write_trace_comparison(indices, traces, traces, tmp_path / "t.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "trace,sample,recon,truth"
        assert len(lines) == 1 + 2 * 4


class TestReport:

    def test_summarize_identity(self, toy_gather):
        values = summarize(toy_gather, toy_gather)
        assert values["ssim"] == 1.0 and values["r_squared"] == 1.0
        assert values["noise_std_mu"] == values["original_mu"]

    def test_csv_columns(self, tmp_path):
        report = MetricsReport(ssim=0.9, r_squared=0.8, noise_std_mu=0.1, regions={"0:8,0:8": 0.7})
        with open(report.to_csv(tmp_path / "r.csv"), newline="", encoding="utf-8") as f:
            header, row = list(csv.reader(f))
        assert header == REPORT_COLUMNS + ["ssim[0:8,0:8]"]
        assert row == ["0.9", "0.8", "0.1", "", "", "", "0.7"]

    def test_text_summary(self):
        text = MetricsReport(ssim=0.95, r_squared=0.9, noise_std_mu=0.01, missing_fraction=0.5).to_text()
        assert "SSIM            0.9500" in text
        assert "missing         50%" in text

    @pytest.mark.parametrize("fields", [
        dict(ssim=1.5, r_squared=0.5, noise_std_mu=0.0),
        dict(ssim=0.5, r_squared=1.5, noise_std_mu=0.0),
        dict(ssim=0.5, r_squared=0.5, noise_std_mu=-1.0),
        dict(ssim=float("nan"), r_squared=0.5, noise_std_mu=0.0),
    ])
    def test_validate(self, fields):
        with pytest.raises(MetricsError):
            MetricsReport(**fields).validate()

    def test_gather_and_array_agree(self, toy_gather, rng):
        other = toy_gather.amplitudes + 0.1 * rng.standard_normal(toy_gather.shape)
        assert r_squared(Gather(other), toy_gather) == pytest.approx(r_squared(other, toy_gather.amplitudes), rel=1e-6)
