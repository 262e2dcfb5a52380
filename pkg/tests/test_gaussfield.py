"""Covariance assembly, Cholesky with jitter, and exact Gaussian sampling."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from stormfields import (
    AnisotropicModel,
    AnisotropyTransform,
    BernsteinModel,
    GneitingModel,
    JitterPolicy,
    MaMixtureModel,
    PoweredExponential,
    SeparableModel,
    SpaceTimeGrid,
    build_covariance_matrix,
    cholesky,
    sample_field,
    sample_replications,
    substream,
)
from stormfields.errors import DomainError, FactorizationError

GNEITING = GneitingModel(a=0.03, b=0.03, nu=1.5, gamma=1.0)

CATALOGUE = {
    "gneiting": GNEITING,
    "separable": SeparableModel(spatial_range=4.0, temporal_decay=0.5),
    "ma_mixture": MaMixtureModel(
        atoms=((0.5, 2.0, 0.3), (1.5, 0.5, 0.7)),
        base_spatial=PoweredExponential(scale=0.2, exponent=1.5),
        base_temporal=PoweredExponential(scale=0.4, exponent=1.0),
    ),
    "bernstein": BernsteinModel(
        spatial_scales=(0.5, 1.25),
        spatial_exponents=(0.8, 0.8),
        temporal_scale=0.6,
        temporal_exponent=0.5,
        atoms=((0.4, 1.0, 0.25), (1.2, 0.3, 0.75)),
    ),
    "aniso_gneiting": AnisotropicModel(
        base=GNEITING,
        transform=AnisotropyTransform(a_max=3.0, a_min=1.0, angle=math.radians(45.0)),
    ),
}


class TestSpaceTimeGrid:
    def test_flattening_is_time_major(self):
        grid = SpaceTimeGrid(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.0, 5.0]))
        coords, times = grid.flat_coordinates()
        assert grid.size == 4
        assert_array_equal(times, [0.0, 0.0, 5.0, 5.0])
        assert_array_equal(coords, [[0, 0], [1, 0], [0, 0], [1, 0]])

    def test_regular_constructor_row_major(self):
        grid = SpaceTimeGrid.regular(shape=(2, 3), spacing=1.0, origin=(0.0, 0.0), times=(0.0,))
        assert grid.n_space == 6
        assert_array_equal(grid.spatial_points[:3], [[0, 0], [0, 1], [0, 2]])
        assert_array_equal(grid.spatial_points[3:], [[1, 0], [1, 1], [1, 2]])

    def test_duplicate_points_rejected(self):
        with pytest.raises(DomainError):
            SpaceTimeGrid(np.array([[0.0, 0.0], [0.0, 0.0]]), np.array([0.0]))
        with pytest.raises(DomainError):
            SpaceTimeGrid(np.array([[0.0, 0.0]]), np.array([1.0, 1.0]))


class TestBuildCovariance:
    def test_single_point(self):
        grid = SpaceTimeGrid(np.array([[0.0, 0.0]]), np.array([0.0]))
        assert_array_equal(build_covariance_matrix(GNEITING, grid), [[1.0]])

    def test_zero_lag_pair_gives_ones(self):
        # scaling by (0, 0) collapses every lag to the origin
        grid = SpaceTimeGrid(np.array([[0.0, 0.0], [3.0, 1.0]]), np.array([0.0]))
        matrix = build_covariance_matrix(GNEITING, grid, scale=(0.0, 0.0))
        assert_array_equal(matrix, np.ones((2, 2)))

    def test_pure_time_lag_matches_correlation(self):
        grid = SpaceTimeGrid(np.array([[0.0, 0.0]]), np.array([0.0, 10.0]))
        matrix = build_covariance_matrix(GNEITING, grid)
        assert matrix[0, 1] == pytest.approx(0.25, rel=1e-15)
        assert matrix[1, 0] == matrix[0, 1]
        assert_array_equal(np.diag(matrix), [1.0, 1.0])

    def test_rescaled_lags(self):
        grid = SpaceTimeGrid(np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([0.0, 4.0]))
        matrix = build_covariance_matrix(GNEITING, grid, scale=(0.5, 0.25))
        direct = GNEITING.rho(np.array([1.0, 0.0]), 1.0)  # lags scaled to (1, 0) and u = 1
        assert matrix[0, 3] == pytest.approx(float(direct), rel=1e-15)

    def test_symmetric_unit_diagonal_in_bounds(self):
        grid = SpaceTimeGrid.regular(shape=(4, 4), times=(0.0, 1.0, 2.0))
        matrix = build_covariance_matrix(GNEITING, grid)
        assert_array_equal(matrix, matrix.T)
        assert_array_equal(np.diag(matrix), np.ones(grid.size))
        assert np.all(matrix > 0.0)
        assert np.all(matrix <= 1.0)

    def test_dimension_mismatch(self):
        grid = SpaceTimeGrid(np.array([[0.0, 0.0, 0.0]]), np.array([0.0]))
        with pytest.raises(DomainError):
            build_covariance_matrix(GNEITING, grid)


class TestCholesky:
    def test_identity(self):
        factor = cholesky(np.eye(3))
        assert_array_equal(factor.lower, np.eye(3))
        assert factor.jitter_used == 0.0

    def test_hand_factor(self):
        factor = cholesky(np.array([[1.0, 0.25], [0.25, 1.0]]))
        expected = np.array([[1.0, 0.0], [0.25, 0.96824583655185422129]])
        assert_allclose(factor.lower, expected, rtol=1e-15)

    def test_rank_deficient_needs_jitter(self):
        factor = cholesky(np.ones((2, 2)))
        assert factor.jitter_used > 0.0
        reconstructed = factor.lower @ factor.lower.T
        assert np.max(np.abs(reconstructed - np.ones((2, 2)))) <= 1e-8 * 2

    def test_indefinite_fails_with_diagnostic(self):
        with pytest.raises(FactorizationError, match="-1.0"):
            cholesky(np.diag([1.0, -1.0]))

    def test_asymmetric_rejected(self):
        with pytest.raises(DomainError):
            cholesky(np.array([[1.0, 0.5], [0.2, 1.0]]))

    def test_custom_policy(self):
        policy = JitterPolicy(initial=1e-10, maximum=1e-9, growth=10.0)
        with pytest.raises(FactorizationError):
            cholesky(np.diag([1.0, -1e-3]), policy)

    @pytest.mark.parametrize("model", CATALOGUE.values(), ids=CATALOGUE.keys())
    def test_catalogued_models_factor_with_small_jitter(self, model):
        grid = SpaceTimeGrid.regular(shape=(10, 10), times=(0.0, 1.0, 2.0, 3.0, 4.0))
        matrix = build_covariance_matrix(model, grid)
        assert_array_equal(matrix, matrix.T)
        assert_array_equal(np.diag(matrix), np.ones(grid.size))
        factor = cholesky(matrix)
        assert factor.jitter_used <= 1e-8
        reconstructed = factor.lower @ factor.lower.T
        assert np.max(np.abs(reconstructed - matrix)) <= 1e-8 * grid.size


class TestSampling:
    def test_single_point_moments(self):
        grid = SpaceTimeGrid(np.array([[0.0, 0.0]]), np.array([0.0]))
        factor = cholesky(build_covariance_matrix(GNEITING, grid))
        draws = sample_replications(factor, substream(123, 0, 0), 100_000)[:, 0]
        assert abs(draws.mean()) <= 0.02
        assert 0.97 <= draws.var() <= 1.03

    def test_pair_correlation(self):
        grid = SpaceTimeGrid(np.array([[0.0, 0.0]]), np.array([0.0, 10.0]))
        factor = cholesky(build_covariance_matrix(GNEITING, grid))  # rho = 0.25
        draws = sample_replications(factor, substream(42, 0, 0), 100_000)
        empirical = np.corrcoef(draws[:, 0], draws[:, 1])[0, 1]
        assert abs(empirical - 0.25) <= 0.02

    def test_determinism_same_stream(self):
        grid = SpaceTimeGrid.regular(shape=(3, 3), times=(0.0, 1.0))
        factor = cholesky(build_covariance_matrix(GNEITING, grid))
        a = sample_field(factor, grid, substream(7, 0, 4), seed_info=(7, 4))
        b = sample_field(factor, grid, substream(7, 0, 4), seed_info=(7, 4))
        assert_array_equal(a.values, b.values)
        assert a.seed_info == (7, 4)

    def test_distinct_streams_differ(self):
        grid = SpaceTimeGrid.regular(shape=(3, 3), times=(0.0,))
        factor = cholesky(build_covariance_matrix(GNEITING, grid))
        a = sample_field(factor, grid, substream(7, 0, 0))
        b = sample_field(factor, grid, substream(7, 0, 1))
        c = sample_field(factor, grid, substream(8, 0, 0))
        assert not np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_factor_grid_size_mismatch(self):
        grid = SpaceTimeGrid.regular(shape=(3, 3), times=(0.0,))
        with pytest.raises(DomainError):
            sample_field(cholesky(np.eye(4)), grid, substream(0, 0, 0))

    def test_covariance_reproduced_on_small_grid(self):
        # empirical covariance of many replications approaches the target
        grid = SpaceTimeGrid(np.array([[0.0, 0.0], [1.5, 0.0], [0.0, 2.0]]), np.array([0.0, 1.0]))
        matrix = build_covariance_matrix(GNEITING, grid)
        draws = sample_replications(cholesky(matrix), substream(99, 0, 0), 60_000)
        empirical = np.cov(draws.T)
        assert np.max(np.abs(empirical - matrix)) <= 0.03
