"""Closed-form dependence quantities of the max-stable constructions.

All bivariate distribution functions here are driven by a single scalar
dependence parameter delta >= 0: delta = 0 is complete dependence, and
delta -> infinity is independence.  For the rescaled-Gaussian construction
delta comes from the correlation model's small-lag expansion; for the
storm-profile model it is a Mahalanobis-type function of the lag and the
storm shape, and the two parameterizations agree exactly (see
``delta_from_storm``).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, UndefinedEstimateError
from .maxstable import StormModelParams
from .numerics import std_normal_cdf

__all__ = [
    "bivariate_cdf_hr",
    "exponent_measure",
    "pickands",
    "tail_dependence",
    "bivariate_cdf_smith",
    "smith_cdf_spatial",
    "smith_cdf_temporal",
    "storm_spatial_distance",
    "delta_from_storm",
    "empirical_tail_dependence",
    "compute_bn",
]

# Phi(40) rounds to 1 in double precision with error < 1e-300, so larger
# sqrt(delta) is treated as exact independence instead of overflowing logs.
_INDEPENDENT_SQRT_DELTA = 40.0


def _check_thresholds(y1, y2):
    y1 = float(y1)
    y2 = float(y2)
    if not (math.isfinite(y1) and math.isfinite(y2) and y1 > 0.0 and y2 > 0.0):
        raise DomainError("thresholds must be finite and > 0")
    return y1, y2


def _check_delta(delta):
    delta = float(delta)
    if math.isnan(delta) or delta < 0.0:
        raise DomainError("delta must be >= 0")
    return delta


def exponent_measure(y1, y2, delta) -> float:
    """Exponent measure V(y1, y2; delta) with joint CDF exp(-V).

    V is homogeneous of order -1 and satisfies
    max(1/y1, 1/y2) <= V <= 1/y1 + 1/y2, the two bounds being the
    complete-dependence and independence cases.
    """
    y1, y2 = _check_thresholds(y1, y2)
    delta = _check_delta(delta)
    if delta == 0.0:
        return 1.0 / min(y1, y2)
    root = math.sqrt(delta)
    if root > _INDEPENDENT_SQRT_DELTA:
        return 1.0 / y1 + 1.0 / y2
    log_ratio = math.log(y2 / y1)
    term1 = std_normal_cdf(log_ratio / (2.0 * root) + root) / y1
    term2 = std_normal_cdf(-log_ratio / (2.0 * root) + root) / y2
    return term1 + term2


def bivariate_cdf_hr(y1, y2, delta) -> float:
    """Bivariate CDF exp(-V(y1, y2; delta)) of the max-stable limit field.

    delta = 0 gives the complete-dependence boundary exp(-1/min(y1, y2));
    delta = inf (or sqrt(delta) beyond double precision) gives independence
    exp(-1/y1 - 1/y2).
    """
    return math.exp(-exponent_measure(y1, y2, delta))


def pickands(lam, delta) -> float:
    """Pickands dependence function A(lam; delta) on 0 < lam < 1.

    Convex, symmetric about 1/2, and pinched between max(lam, 1 - lam)
    (complete dependence) and 1 (independence).
    """
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise DomainError("lam must lie strictly inside (0, 1)")
    delta = _check_delta(delta)
    if delta == 0.0:
        return max(lam, 1.0 - lam)
    root = math.sqrt(delta)
    if root > _INDEPENDENT_SQRT_DELTA:
        return 1.0
    log_ratio = math.log(lam / (1.0 - lam))
    return lam * std_normal_cdf(log_ratio / (2.0 * root) + root) + (
        1.0 - lam
    ) * std_normal_cdf(-log_ratio / (2.0 * root) + root)


def tail_dependence(delta):
    """Tail dependence coefficient chi = 2 (1 - Phi(sqrt(delta))).

    Accepts scalars or arrays; decreasing from 1 (complete dependence at
    delta = 0) to 0 (asymptotic independence as delta grows).
    """
    arr = np.asarray(delta, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0.0):
        raise DomainError("delta must be >= 0")
    out = np.zeros_like(arr)
    finite = np.isfinite(arr)
    if np.any(finite):
        out[finite] = 2.0 * (1.0 - std_normal_cdf(np.sqrt(arr[finite])))
    return float(out) if arr.ndim == 0 else out


def storm_spatial_distance(params: StormModelParams, h) -> float:
    """Mahalanobis length a(h) = (h^T sigma_space^{-1} h)^{1/2} of a space lag."""
    h = np.asarray(h, dtype=float)
    if h.shape != (2,):
        raise DomainError("h must be a 2-vector")
    return float(math.sqrt(h @ params.spatial_precision @ h))


def delta_from_storm(params: StormModelParams, h, u) -> float:
    """Dependence parameter of the storm model at lag (h, u).

    delta(h, u) = a(h)^2 / 4 + u^2 / (4 sigma_time_sq).  The temporal
    coefficient 1/(4 sigma_time_sq) follows from matching the storm-model
    CDF to the rescaled-Gaussian form (and equally from the quadratic
    expansion correspondence sigma_time_sq = 1/(4 C2)); ``bivariate_cdf_smith``
    agrees with ``bivariate_cdf_hr`` at this delta to machine precision.
    """
    a = storm_spatial_distance(params, h)
    u = float(u)
    return 0.25 * a * a + 0.25 * u * u / params.sigma_time_sq


def bivariate_cdf_smith(y1, y2, h, u, params: StormModelParams) -> float:
    """Bivariate CDF of the storm-profile field at space lag h and time lag u.

    With a = a(h) the Mahalanobis space lag and s3^2 the temporal variance,

        F(y1, y2) = exp{ -Phi(A12)/y1 - Phi(A21)/y2 },
        Aij = (2 s3^2 log(yj/yi) + s3^2 a^2 + u^2) / (2 s3 sqrt(s3^2 a^2 + u^2)),

    valid for (h, u) != (0, 0); the zero lag is the complete-dependence
    boundary exp(-1/min(y1, y2)).
    """
    y1, y2 = _check_thresholds(y1, y2)
    a = storm_spatial_distance(params, h)
    u = float(u)
    if a == 0.0 and u == 0.0:
        return math.exp(-1.0 / min(y1, y2))
    s3sq = params.sigma_time_sq
    s3 = math.sqrt(s3sq)
    denom = 2.0 * s3 * math.sqrt(s3sq * a * a + u * u)
    shift = s3sq * a * a + u * u
    log_ratio = math.log(y2 / y1)
    term1 = std_normal_cdf((2.0 * s3sq * log_ratio + shift) / denom) / y1
    term2 = std_normal_cdf((-2.0 * s3sq * log_ratio + shift) / denom) / y2
    return math.exp(-term1 - term2)


def smith_cdf_spatial(y1, y2, h, params: StormModelParams) -> float:
    """Zero-time-lag reduction of the storm-model CDF (purely spatial pairs).

    F(y1, y2) = exp{ -Phi(a/2 + log(y2/y1)/a)/y1 - Phi(a/2 + log(y1/y2)/a)/y2 }
    with a = a(h); this is the classical bivariate law of the spatial
    Gaussian-profile model.
    """
    y1, y2 = _check_thresholds(y1, y2)
    a = storm_spatial_distance(params, h)
    if a == 0.0:
        return math.exp(-1.0 / min(y1, y2))
    log_ratio = math.log(y2 / y1)
    term1 = std_normal_cdf(0.5 * a + log_ratio / a) / y1
    term2 = std_normal_cdf(0.5 * a - log_ratio / a) / y2
    return math.exp(-term1 - term2)


def smith_cdf_temporal(y1, y2, u, params: StormModelParams) -> float:
    """Zero-space-lag reduction of the storm-model CDF (single-site pairs).

    The temporal profile is a one-dimensional Gaussian bump with standard
    deviation s3, so the spatial formula applies with the scaled lag
    r = |u|/s3 in place of a(h):

    F(y1, y2) = exp{ -Phi(r/2 + log(y2/y1)/r)/y1 - Phi(r/2 + log(y1/y2)/r)/y2 }.
    """
    y1, y2 = _check_thresholds(y1, y2)
    u = float(u)
    if u == 0.0:
        return math.exp(-1.0 / min(y1, y2))
    r = abs(u) / math.sqrt(params.sigma_time_sq)
    log_ratio = math.log(y2 / y1)
    term1 = std_normal_cdf(0.5 * r + log_ratio / r) / y1
    term2 = std_normal_cdf(0.5 * r - log_ratio / r) / y2
    return math.exp(-term1 - term2)


def empirical_tail_dependence(realizations, pair, q) -> float:
    """Finite-level tail dependence estimate from field realizations.

    Counts joint exceedances of the per-site empirical q-quantiles and
    divides by the average marginal exceedance count.  The estimate lies in
    [0, 1]; under independence it concentrates near 1 - q rather than 0,
    the usual finite-level behaviour.

    Parameters
    ----------
    realizations : sequence of FieldSample
        At least 100 independent realizations on a common grid.
    pair : (int, int)
        Flat grid indices of the two sites.
    q : float
        Quantile level, 0.5 < q < 1.
    """
    if len(realizations) < 100:
        raise DomainError("at least 100 realizations are required")
    q = float(q)
    if not 0.5 < q < 1.0:
        raise DomainError("q must lie strictly between 0.5 and 1")
    i, j = (int(pair[0]), int(pair[1]))
    x = np.array([r.values[i] for r in realizations])
    y = np.array([r.values[j] for r in realizations])
    exceed_x = x > np.quantile(x, q)
    exceed_y = y > np.quantile(y, q)
    marginal = 0.5 * (int(exceed_x.sum()) + int(exceed_y.sum()))
    if marginal == 0:
        raise UndefinedEstimateError("no marginal exceedances at this level")
    return float(int((exceed_x & exceed_y).sum()) / marginal)


def compute_bn(n) -> float:
    """Normalizing constant b_n of the n-fold maximum of standard normals.

    b_n = sqrt(2 log n) - (log log n + log(4 pi)) / (2 sqrt(2 log n)),
    defined for n >= 3 so that log log n is positive.  It satisfies
    Phi^n(b_n + log(y)/b_n) -> exp(-1/y).
    """
    n = int(n)
    if n < 3:
        raise DomainError("n must be >= 3")
    log_n = math.log(n)
    root = math.sqrt(2.0 * log_n)
    return root - (math.log(log_n) + math.log(4.0 * math.pi)) / (2.0 * root)
