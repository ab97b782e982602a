import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mixedreduce import DataError, kde, render_density, render_stripplot
from mixedreduce.plots import silverman_bandwidth

from helpers import count_glyphs, svg_group_ids


class TestKde:
    def test_symmetric_two_point_sample(self):
        curve = kde(np.array([-1.0, 1.0]), bandwidth=1.0)
        assert np.max(np.abs(curve.density - curve.density[::-1])) < 1e-12

    def test_integral_near_one(self):
        rng = np.random.default_rng(0)
        curve = kde(rng.normal(size=500))
        integral = np.trapezoid(curve.density, curve.grid)
        assert 0.99 <= integral <= 1.01

    def test_standard_normal_peak(self):
        rng = np.random.default_rng(1)
        curve = kde(rng.normal(size=10_000))
        at_zero = curve.density[np.argmin(np.abs(curve.grid))]
        assert abs(at_zero - 0.3989) / 0.3989 < 0.15

    def test_silverman_formula(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=100)
        sd = x.std(ddof=1)
        q75, q25 = np.percentile(x, [75, 25])
        expected = 0.9 * min(sd, (q75 - q25) / 1.34) * 100 ** (-0.2)
        assert silverman_bandwidth(x) == pytest.approx(expected)

    def test_rejects_degenerate_input(self):
        with pytest.raises(DataError):
            kde(np.array([1.0]))
        with pytest.raises(DataError):
            kde(np.array([2.0, 2.0, 2.0]))

    def test_grid_span(self):
        curve = kde(np.array([0.0, 10.0]), bandwidth=2.0)
        assert curve.grid[0] == pytest.approx(-6.0)
        assert curve.grid[-1] == pytest.approx(16.0)
        assert curve.grid.size == 512


class TestStripplot:
    def test_glyph_counts_match_inputs(self, tmp_path):
        out = tmp_path / "strip.svg"
        observed = {"v": np.array([1.0, 2.0, 3.0])}
        imputed = {"v": np.array([2.5])}
        render_stripplot(observed, imputed, out, seed=3)
        assert count_glyphs(out, "strip-observed-0") == 3
        assert count_glyphs(out, "strip-imputed-0") == 1

    def test_multiple_bands(self, tmp_path):
        rng = np.random.default_rng(4)
        observed = {"a": rng.normal(size=40), "b": rng.normal(size=25)}
        imputed = {"a": rng.normal(size=5), "b": np.array([])}
        out = tmp_path / "strip.svg"
        render_stripplot(observed, imputed, out, seed=1)
        assert count_glyphs(out, "strip-observed-0") == 40
        assert count_glyphs(out, "strip-imputed-0") == 5
        assert count_glyphs(out, "strip-observed-1") == 25
        assert "strip-imputed-1" not in svg_group_ids(out)

    def test_legend_omits_imputed_series_when_absent(self, tmp_path):
        out = tmp_path / "strip.svg"
        render_stripplot({"v": np.arange(5.0)}, {}, out, seed=0)
        text = out.read_text()
        assert "observed" in text and "imputed" not in text

    def test_byte_identical_rerender(self, tmp_path):
        rng = np.random.default_rng(5)
        observed = {"v": rng.normal(size=30)}
        imputed = {"v": rng.normal(size=4)}
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        render_stripplot(observed, imputed, a, seed=9)
        render_stripplot(observed, imputed, b, seed=9)
        assert a.read_bytes() == b.read_bytes()

    def test_empty_input_rejected(self, tmp_path):
        with pytest.raises(DataError):
            render_stripplot({}, {}, tmp_path / "strip.svg")

    def test_well_formed_xml(self, tmp_path):
        out = tmp_path / "strip.svg"
        render_stripplot({"v": np.arange(10.0)}, {"v": np.array([1.5])}, out)
        ET.parse(out)  # raises on malformed XML


class TestDensityPlot:
    def test_identical_series_coincide(self):
        rng = np.random.default_rng(6)
        values = rng.normal(size=200)
        a = kde(values)
        b = kde(values.copy())
        assert np.max(np.abs(a.density - b.density)) < 1e-12

    def test_disjoint_supports_have_separated_modes(self):
        rng = np.random.default_rng(7)
        low = rng.normal(loc=-10, size=300)
        high = rng.normal(loc=10, size=300)
        mode_low = kde(low).grid[np.argmax(kde(low).density)]
        mode_high = kde(high).grid[np.argmax(kde(high).density)]
        assert mode_low < -5 < 5 < mode_high

    def test_render_and_determinism(self, tmp_path):
        rng = np.random.default_rng(8)
        obs = rng.normal(size=150)
        imp = rng.normal(loc=0.3, size=40)
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        render_density(obs, imp, a)
        render_density(obs, imp, b)
        assert a.read_bytes() == b.read_bytes()
        ids = svg_group_ids(a)
        assert {"density-observed", "density-imputed"} <= ids
        ET.parse(a)

    def test_degenerate_series_rejected(self, tmp_path):
        with pytest.raises(DataError):
            render_density(np.array([1.0, 2.0]), np.array([3.0]), tmp_path / "d.svg")
