import json

import numpy as np
import pytest

from infogauge import (
    AllZero,
    DimensionMismatch,
    DomainTooSmall,
    GaussianComponent,
    GaussianMixture,
    GridSpec,
    NotPositiveDefinite,
    discretize,
    grid_moments,
    load_density,
    normalize,
    rescale,
    surprisal_field,
)
from infogauge.density import density_from_dict


class TestGridSpec:
    def test_derived_quantities(self):
        spec = GridSpec((8.0,), (256,))
        assert spec.dims == 1
        assert spec.spacing == (0.0625,)
        assert spec.cell_volume == 0.0625
        assert spec.axes()[0][0] == -8.0
        assert spec.axes()[0][-1] == pytest.approx(8.0 - 0.0625)

    def test_rejects_odd_or_tiny_axes(self):
        with pytest.raises(ValueError):
            GridSpec((1.0,), (15,))
        with pytest.raises(ValueError):
            GridSpec((1.0,), (4,))

    def test_rejects_budget_overflow(self):
        with pytest.raises(ValueError):
            GridSpec((1.0, 1.0, 1.0), (256, 256, 256))

    def test_rejects_four_axes(self):
        with pytest.raises(DimensionMismatch):
            GridSpec((1.0,) * 4, (8,) * 4)

    def test_extent_points_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            GridSpec((1.0, 2.0), (16,))


class TestNormalize:
    def test_uniform_field(self):
        spec = GridSpec((1.0,), (16,))
        d = normalize(spec, np.full(16, 2.0))
        assert np.allclose(d.values, 0.5)

    def test_idempotent_on_normalized(self):
        spec = GridSpec((8.0,), (256,))
        x = spec.axes()[0]
        vals = np.exp(-0.5 * x**2)
        d1 = normalize(spec, vals)
        d2 = normalize(d1.spec, d1.values)
        assert np.max(np.abs(d1.values - d2.values)) < 1e-12

    def test_gaussian_mass(self):
        spec = GridSpec((8.0,), (256,))
        x = spec.axes()[0]
        d = normalize(spec, np.exp(-0.5 * x**2))
        assert abs(np.sum(d.values) * spec.cell_volume - 1.0) < 1e-10

    def test_scale_equivariance(self):
        spec = GridSpec((4.0,), (64,))
        vals = np.abs(np.sin(spec.axes()[0])) + 0.1
        a = normalize(spec, vals)
        b = normalize(spec, 37.5 * vals)
        assert np.max(np.abs(a.values - b.values)) < 1e-12

    def test_all_zero_rejected(self):
        with pytest.raises(AllZero):
            normalize(GridSpec((1.0,), (16,)), np.zeros(16))


class TestDiscretize:
    def test_peak_at_mode(self, unit_gaussian_grid):
        idx = int(np.argmax(unit_gaussian_grid.values))
        assert unit_gaussian_grid.spec.axes()[0][idx] == 0.0

    def test_symmetric_bimodal_maxima(self):
        mix = GaussianMixture(
            [0.5, 0.5],
            (GaussianComponent([-3.0], [[1.0]]), GaussianComponent([3.0], [[1.0]])),
        )
        d = discretize(mix, GridSpec((12.0,), (256,)))
        x = d.spec.axes()[0]
        peak = d.values.max()
        peaks_at = x[d.values >= peak * (1 - 1e-12)]
        assert set(np.round(peaks_at, 6)) == {-3.0, 3.0}

    def test_domain_too_small(self, unit_gaussian):
        with pytest.raises(DomainTooSmall):
            discretize(unit_gaussian, GridSpec((2.0,), (64,)))

    def test_boundary_mass_invariant(self, unit_gaussian_grid):
        assert unit_gaussian_grid.boundary_mass_fraction() < 1e-9

    def test_moments_match_analytic(self):
        mix = GaussianMixture(
            [0.7, 0.3],
            (GaussianComponent([0.0], [[1.0]]), GaussianComponent([2.5], [[4.0]])),
        )
        d = discretize(mix, GridSpec((16.0,), (512,)))
        mean, cov, _ = grid_moments(d)
        assert abs(mean[0] - 0.75) < 1e-6
        # var = sum w (s^2 + m^2) - mean^2
        expected_var = 0.7 * 1.0 + 0.3 * (4.0 + 2.5**2) - 0.75**2
        assert abs(cov[0, 0] - expected_var) < 1e-6


class TestSurprisal:
    def test_uniform_is_log2(self):
        d = normalize(GridSpec((1.0,), (16,)), np.full(16, 2.0))
        s = surprisal_field(d)
        assert np.allclose(s.values, np.log(2.0))

    def test_gaussian_center_value(self, unit_gaussian_grid):
        s = surprisal_field(unit_gaussian_grid)
        center = np.argmin(np.abs(unit_gaussian_grid.spec.axes()[0]))
        assert s.values[center] == pytest.approx(0.5 * np.log(2 * np.pi), rel=1e-6)

    def test_floor_applied_and_flagged(self):
        # sigma = 0.5 on [-8, 8): tails fall below max * 1e-14
        d = discretize(GaussianComponent([0.0], [[0.25]]), GridSpec((8.0,), (256,)))
        s = surprisal_field(d)
        assert s.floored.any()
        assert np.all(np.isfinite(s.values))
        cap = -np.log(d.values.max() * d.log_floor)
        assert s.values.max() == pytest.approx(cap)


class TestRescale:
    def test_gaussian_pushforward(self, unit_gaussian):
        g = rescale(unit_gaussian, 2.0)
        assert g.covariance[0, 0] == 4.0

    def test_identity(self, unit_gaussian):
        g = rescale(unit_gaussian, 1.0)
        assert np.array_equal(g.covariance, unit_gaussian.covariance)

    def test_mixture_componentwise(self):
        mix = GaussianMixture(
            [0.5, 0.5],
            (GaussianComponent([-1.0], [[1.0]]), GaussianComponent([1.0], [[1.0]])),
        )
        out = rescale(mix, 3.0)
        assert [c.mean[0] for c in out.components] == [-3.0, 3.0]
        assert [c.covariance[0, 0] for c in out.components] == [9.0, 9.0]

    def test_grid_mass_preserved_exactly(self, unit_gaussian_grid):
        r = rescale(unit_gaussian_grid, 2.5)
        assert abs(np.sum(r.values) * r.spec.cell_volume - 1.0) < 1e-10
        assert r.spec.extent == (20.0,)


class TestGaussianTypes:
    def test_asymmetric_covariance_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            GaussianComponent([0.0, 0.0], [[1.0, 0.5], [0.2, 1.0]])

    def test_indefinite_covariance_rejected(self):
        with pytest.raises(NotPositiveDefinite):
            GaussianComponent([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])

    def test_weights_must_sum_to_one(self, unit_gaussian):
        with pytest.raises(ValueError):
            GaussianMixture([0.6, 0.6], (unit_gaussian, unit_gaussian))

    def test_mixture_needs_components(self):
        with pytest.raises(ValueError):
            GaussianMixture([], ())

    def test_logpdf_matches_scipy(self, far_bimodal):
        from scipy.stats import norm

        x = np.linspace(-15, 15, 7)[:, None]
        expected = np.log(0.5 * norm.pdf(x[:, 0], -10, 1) + 0.5 * norm.pdf(x[:, 0], 10, 1))
        assert np.allclose(far_bimodal.logpdf(x), expected)


class TestDensityFiles:
    def test_gaussian_mixture_roundtrip(self, tmp_path):
        spec = {
            "kind": "gaussian_mixture",
            "weights": [0.5, 0.5],
            "means": [[-1.0], [1.0]],
            "covariances": [[[1.0]], [[2.0]]],
        }
        path = tmp_path / "mix.json"
        path.write_text(json.dumps(spec))
        mix = load_density(path)
        assert len(mix.components) == 2
        assert mix.components[1].covariance[0, 0] == 2.0

    def test_grid_values_from_csv(self, tmp_path):
        spec = GridSpec((8.0,), (256,))
        x = spec.axes()[0]
        vals = np.exp(-0.5 * x**2)
        np.savetxt(tmp_path / "values.csv", vals, delimiter=",")
        obj = {"kind": "grid", "extent": [8.0], "points": [256],
               "values_file": "values.csv"}
        d = density_from_dict(obj, base_dir=tmp_path)
        assert abs(np.sum(d.values) * d.spec.cell_volume - 1.0) < 1e-10

    def test_grid_values_from_flat_binary(self, tmp_path):
        spec = GridSpec((8.0,), (256,))
        x = spec.axes()[0]
        vals = np.exp(-0.5 * x**2)
        vals.astype(np.float64).tofile(tmp_path / "values.bin")
        obj = {"kind": "grid", "extent": [8.0], "points": [256],
               "values_file": "values.bin"}
        d = density_from_dict(obj, base_dir=tmp_path)
        assert abs(np.sum(d.values) * d.spec.cell_volume - 1.0) < 1e-10

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            density_from_dict({"kind": "histogram"})
