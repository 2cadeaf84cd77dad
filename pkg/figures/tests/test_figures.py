import csv
import os
import warnings

import numpy as np
import pytest

from rbm_mlmc_figures import SchemaError, plot_error_complexity, plot_mse_band
from rbm_mlmc_figures.cli import main

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))
DEMO_RECORDS = os.path.join(REPO_ROOT, "data", "records_demo.csv")
DEMO_SUMMARY = os.path.join(REPO_ROOT, "data", "mse_demo.csv")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    return str(path)


def read_column(path, name):
    with open(path, newline="") as handle:
        return [float(row[name]) for row in csv.DictReader(handle) if row[name] != ""]


class TestErrorComplexityFigure:
    def test_demo_records_series_match_csv(self, tmp_path):
        """Acceptance criterion: plotted series reproduce the shipped demo CSV."""
        out = tmp_path / "joint.png"
        fig = plot_error_complexity(DEMO_RECORDS, out)
        assert out.stat().st_size > 0
        assert (tmp_path / "joint.svg").stat().st_size > 0

        with open(DEMO_RECORDS, newline="") as handle:
            rows = list(csv.DictReader(handle))
        gammas = sorted({float(r["gamma"]) for r in rows})
        ax_err, ax_cost = fig.axes
        for axis, column in ((ax_err, "abs_error"), (ax_cost, "total_seeds")):
            series = {}
            for line in axis.get_lines():
                label = line.get_label()
                if label.startswith("gamma="):
                    series[float(label.split("=")[1])] = line.get_xydata()
            assert sorted(series) == gammas
            for gamma, points in series.items():
                sel = [r for r in rows if float(r["gamma"]) == gamma]
                dims = sorted({int(r["d"]) for r in sel})
                # spot-check three dimensions per series against the CSV means
                for d in (dims[0], dims[len(dims) // 2], dims[-1]):
                    expected = np.mean([float(r[column]) for r in sel if int(r["d"]) == d])
                    got = points[points[:, 0] == d][0, 1]
                    assert got == pytest.approx(expected, rel=1e-12)

    def test_synthetic_linear_seeds_align_with_reference(self, tmp_path):
        path = write_csv(tmp_path / "rec.csv",
                         ["d", "gamma", "epsilon", "abs_error", "total_seeds"],
                         [[d, 0.05, 0.05, 0.01, 100 * d] for d in (5, 10, 20, 40)])
        fig = plot_error_complexity(path, tmp_path / "fig.png")
        ax_cost = fig.axes[1]
        series = {line.get_label(): line.get_xydata() for line in ax_cost.get_lines()}
        points = series["gamma=0.05"]
        reference = series["linear reference"]
        assert np.allclose(points, reference)  # collinear with the linear guide

    def test_missing_columns_schema_error(self, tmp_path):
        path = write_csv(tmp_path / "bad.csv", ["d", "gamma"], [[5, 0.05]])
        with pytest.raises(SchemaError, match="abs_error"):
            plot_error_complexity(path, tmp_path / "fig.png")

    def test_empty_csv_schema_error(self, tmp_path):
        path = write_csv(tmp_path / "empty.csv",
                         ["d", "gamma", "abs_error", "total_seeds"], [])
        with pytest.raises(SchemaError, match="no data"):
            plot_error_complexity(path, tmp_path / "fig.png")


class TestMseBandFigure:
    def test_demo_summary_series_match_csv(self, tmp_path):
        """Acceptance criterion: MSE line and band match the shipped summary."""
        out = tmp_path / "mse.png"
        fig = plot_mse_band(DEMO_SUMMARY, out)
        assert out.stat().st_size > 0
        assert (tmp_path / "mse.svg").stat().st_size > 0
        ax = fig.axes[0]
        line = next(l for l in ax.get_lines() if l.get_label() == "MSE")
        points = line.get_xydata()
        dims = read_column(DEMO_SUMMARY, "d")
        mses = read_column(DEMO_SUMMARY, "mse")
        order = np.argsort(dims)
        for pick in (0, len(dims) // 2, len(dims) - 1):
            d, mse = dims[int(order[pick])], mses[int(order[pick])]
            got = points[points[:, 0] == d][0, 1]
            assert got == pytest.approx(mse, rel=1e-12)
        assert len(ax.collections) == 1  # the shaded band

    def test_flat_mse_below_guide(self, tmp_path):
        rows = [[d, 0.05, 5e-4, 4e-4, 6e-4] for d in (10, 20, 30)]
        path = write_csv(tmp_path / "sum.csv",
                         ["d", "epsilon", "mse", "band_low", "band_high"], rows)
        fig = plot_mse_band(path, tmp_path / "fig.png")
        ax = fig.axes[0]
        guide = [l for l in ax.get_lines() if l.get_label().startswith("eps^2")]
        assert guide and guide[0].get_ydata()[0] == pytest.approx(0.0025)
        mse_line = next(l for l in ax.get_lines() if l.get_label() == "MSE")
        assert np.all(mse_line.get_ydata() < 0.0025)

    def test_band_columns_absent_warns_and_omits(self, tmp_path):
        path = write_csv(tmp_path / "sum.csv", ["d", "mse"],
                         [[10, 5e-4], [20, 6e-4]])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fig = plot_mse_band(path, tmp_path / "fig.png")
        assert any("band" in str(w.message) for w in caught)
        assert len(fig.axes[0].collections) == 0

    def test_single_row_becomes_point_plot(self, tmp_path):
        path = write_csv(tmp_path / "sum.csv",
                         ["d", "mse", "band_low", "band_high"], [[10, 5e-4, 4e-4, 6e-4]])
        fig = plot_mse_band(path, tmp_path / "fig.png")
        line = next(l for l in fig.axes[0].get_lines() if l.get_label() == "MSE")
        assert line.get_linestyle() == "None"
        assert len(fig.axes[0].collections) == 0


class TestCli:
    def test_plot_both_kinds(self, tmp_path, capsys):
        assert main(["plot", "error_complexity", "--in", DEMO_RECORDS,
                     "--out", str(tmp_path / "a.png")]) == 0
        assert main(["plot", "mse_band", "--in", DEMO_SUMMARY,
                     "--out", str(tmp_path / "b.png"), "--logy"]) == 0
        assert (tmp_path / "a.png").exists() and (tmp_path / "a.svg").exists()
        assert (tmp_path / "b.png").exists() and (tmp_path / "b.svg").exists()

    def test_schema_error_exit_code(self, tmp_path):
        path = write_csv(tmp_path / "bad.csv", ["d"], [[5]])
        assert main(["plot", "mse_band", "--in", str(path),
                     "--out", str(tmp_path / "x.png")]) == 2
