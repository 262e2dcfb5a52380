"""Exact sampling of stationary Gaussian fields on finite space-time grids.

Sampling is dense: assemble the full correlation matrix over the flattened
grid, factor it once, and draw replications as L z with z i.i.d. standard
normal.  Grid sizes are therefore memory bound; N = n_space * n_time up to
roughly 12 000 points is practical, which covers typical visual-simulation
grids (a 30 x 30 x 4 grid is N = 3 600) with room to spare.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covmodels import CorrelationModel
from .errors import DomainError, FactorizationError

__all__ = [
    "SpaceTimeGrid",
    "FieldSample",
    "CholeskyFactor",
    "JitterPolicy",
    "build_covariance_matrix",
    "cholesky",
    "sample_field",
    "sample_replications",
]


@dataclass(frozen=True, eq=False)
class SpaceTimeGrid:
    """Ordered spatial points and time points with a fixed flattening order.

    The flattened index runs time-major: entry k corresponds to time
    ``time_points[k // n_space]`` and spatial point
    ``spatial_points[k % n_space]``.  File outputs always carry explicit
    coordinates so the order is re-derivable from the data alone.
    """

    spatial_points: np.ndarray
    time_points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.spatial_points, dtype=float))
        times = np.atleast_1d(np.asarray(self.time_points, dtype=float))
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] not in (1, 2, 3):
            raise DomainError("spatial_points must be an (n, d) array with d in {1, 2, 3}")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(times)):
            raise DomainError("grid coordinates must be finite")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise DomainError("spatial points must be distinct")
        if len(np.unique(times)) != len(times):
            raise DomainError("time points must be distinct")
        pts = pts.copy()
        times = times.copy()
        pts.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "spatial_points", pts)
        object.__setattr__(self, "time_points", times)

    @property
    def dimension(self) -> int:
        return self.spatial_points.shape[1]

    @property
    def n_space(self) -> int:
        return self.spatial_points.shape[0]

    @property
    def n_time(self) -> int:
        return self.time_points.shape[0]

    @property
    def size(self) -> int:
        return self.n_space * self.n_time

    def flat_coordinates(self):
        """Return (coords, times) arrays of length ``size`` in flat order."""
        coords = np.tile(self.spatial_points, (self.n_time, 1))
        times = np.repeat(self.time_points, self.n_space)
        return coords, times

    @staticmethod
    def regular(shape, spacing=1.0, origin=(0.0, 0.0), times=(0.0,)) -> "SpaceTimeGrid":
        """Axis-aligned rectangular grid, row-major in space."""
        shape = tuple(int(s) for s in np.atleast_1d(shape))
        if any(s < 1 for s in shape):
            raise DomainError("grid shape entries must be >= 1")
        spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (len(shape),))
        origin = np.broadcast_to(np.asarray(origin, dtype=float), (len(shape),))
        axes = [origin[i] + spacing[i] * np.arange(shape[i]) for i in range(len(shape))]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        return SpaceTimeGrid(pts, np.asarray(times, dtype=float))


@dataclass(frozen=True, eq=False)
class FieldSample:
    """One realized field on a grid, tagged with its reproducibility key."""

    grid: SpaceTimeGrid
    values: np.ndarray
    seed_info: tuple = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise DomainError("values length must match the flattened grid size")
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class JitterPolicy:
    """Escalating diagonal jitter for nearly singular correlation matrices."""

    initial: float = 1e-12
    maximum: float = 1e-6
    growth: float = 10.0


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    lower: np.ndarray
    jitter_used: float = 0.0

    @property
    def size(self) -> int:
        return self.lower.shape[0]


def build_covariance_matrix(model: CorrelationModel, grid: SpaceTimeGrid,
                            scale=None) -> np.ndarray:
    """Correlation matrix of the model over the flattened grid.

    Parameters
    ----------
    model : CorrelationModel
    grid : SpaceTimeGrid
    scale : (s, t) pair, optional
        Rescaling factors applied to spatial and temporal lags; used to
        evaluate the model at shrunken lags (s_n h, t_n u) when sampling
        the triangular-array construction.

    Returns
    -------
    ndarray, shape (N, N)
        Symmetric with unit diagonal; entries are correlations in (0, 1].
    """
    if grid.dimension != model.dimension:
        raise DomainError(
            f"grid dimension {grid.dimension} does not match model dimension "
            f"{model.dimension}"
        )
    s_scale, t_scale = (1.0, 1.0) if scale is None else (float(scale[0]), float(scale[1]))
    pts = grid.spatial_points * s_scale
    times = grid.time_points * t_scale
    ns, nt = grid.n_space, grid.n_time

    spatial_lags = pts[:, None, :] - pts[None, :, :]
    out = np.empty((grid.size, grid.size))
    for i in range(nt):
        for j in range(i + 1):
            block = np.asarray(model.rho(spatial_lags, times[i] - times[j]), dtype=float)
            out[i * ns:(i + 1) * ns, j * ns:(j + 1) * ns] = block
            if i != j:
                # rho(h, u) = rho(-h, -u), so the mirrored block is the transpose
                out[j * ns:(j + 1) * ns, i * ns:(i + 1) * ns] = block.T
    return out


def cholesky(matrix: np.ndarray, policy: JitterPolicy = JitterPolicy()) -> CholeskyFactor:
    """Lower Cholesky factor, adding escalating jitter if needed.

    Jitter starts at ``policy.initial`` and grows by ``policy.growth`` up to
    ``policy.maximum``; the amount actually used is recorded on the factor.

    Raises
    ------
    FactorizationError
        If the matrix is still not positive definite at maximum jitter; the
        message names the most negative eigenvalue found.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError("matrix must be square")
    scale = max(1.0, float(np.abs(matrix).max()))
    if float(np.abs(matrix - matrix.T).max()) > 1e-12 * scale:
        raise DomainError("matrix must be symmetric")

    try:
        return CholeskyFactor(np.linalg.cholesky(matrix), 0.0)
    except np.linalg.LinAlgError:
        pass

    eye = np.eye(matrix.shape[0])
    jitter = policy.initial
    while jitter <= policy.maximum * (1.0 + 1e-15):
        try:
            lower = np.linalg.cholesky(matrix + jitter * eye)
            return CholeskyFactor(lower, jitter)
        except np.linalg.LinAlgError:
            jitter *= policy.growth

    most_negative = float(np.linalg.eigvalsh(matrix)[0])
    raise FactorizationError(
        f"matrix is not positive definite at maximum jitter {policy.maximum:g}; "
        f"most negative pivot (eigenvalue) is {most_negative:.6e}"
    )


def sample_field(factor: CholeskyFactor, grid: SpaceTimeGrid,
                 rng: np.random.Generator, seed_info=None) -> FieldSample:
    """Draw one zero-mean unit-variance field as L z from the given stream."""
    if factor.size != grid.size:
        raise DomainError("factor dimension does not match the grid size")
    z = rng.standard_normal(grid.size)
    return FieldSample(grid=grid, values=factor.lower @ z, seed_info=seed_info)


def sample_replications(factor: CholeskyFactor, rng: np.random.Generator,
                        count: int) -> np.ndarray:
    """Draw ``count`` independent replications as rows of a (count, N) array."""
    if count < 1:
        raise DomainError("count must be >= 1")
    z = rng.standard_normal((factor.size, count))
    return (factor.lower @ z).T
