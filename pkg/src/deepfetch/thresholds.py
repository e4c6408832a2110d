"""Ambiguity threshold for the depth-k classifier.

Each class of the current ambiguous set is summarized by a k-variate
Gaussian (moment-matched mean and covariance). Points whose Mahalanobis
distance to a class exceeds the chi-square quantile sqrt(Ginv(p_th; k))
are treated as tail outliers; the region where both classes remain
plausible is the intersection of the two trimmed ellipsoids. The
distance threshold d_bar is the largest hyperplane distance over that
intersection, found by seeded sampling (the intersection has no closed
form), and it is shared by both classes so neither side is favored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import CounterRng
from .svm import Hyperplane, margin_distances


class InsufficientDataError(ValueError):
    """Raised when a class has fewer than 2 points to fit."""


# ---------------------------------------------------------------------------
# Regularized lower incomplete gamma and the chi-square quantile
# ---------------------------------------------------------------------------

_EPS = 1e-16
_MAX_TERMS = 600


def _gammainc_lower_reg(a: float, x: float) -> float:
    """P(a, x) = gamma(a, x) / Gamma(a), for a > 0, x >= 0.

    Series expansion for x < a + 1, Lentz continued fraction otherwise
    (both converge to near machine precision in this regime).
    """
    if a <= 0.0:
        raise ValueError(f"shape parameter must be positive, got {a}")
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    log_prefactor = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        # gamma(a,x) = x^a e^-x sum_n x^n / (a (a+1) ... (a+n))
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(_MAX_TERMS):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        return min(1.0, total * math.exp(log_prefactor))
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    q = math.exp(log_prefactor) * h
    return min(1.0, max(0.0, 1.0 - q))


def chi_square_cdf(r: float, k: int) -> float:
    """CDF of the chi-square distribution with k degrees of freedom at r."""
    if r <= 0.0:
        return 0.0
    return _gammainc_lower_reg(k / 2.0, r / 2.0)


def chi_square_quantile(p_th: float, k: int) -> float:
    """sqrt of the chi-square p_th-quantile with k degrees of freedom.

    This is the Mahalanobis radius containing probability mass p_th of a
    k-variate Gaussian. The inner inversion is bisected until the CDF
    matches p_th to 1e-12.
    """
    if not 0.0 < p_th < 1.0:
        raise ValueError(f"probability level must lie in (0, 1), got {p_th}")
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError(f"degrees of freedom must be a positive integer, got {k}")
    lo, hi = 0.0, float(k) + 10.0
    while chi_square_cdf(hi, k) < p_th:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if chi_square_cdf(mid, k) < p_th:
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    assert abs(chi_square_cdf(r, k) - p_th) <= 1e-10
    return math.sqrt(r)


# ---------------------------------------------------------------------------
# Per-class Gaussians and Mahalanobis distance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassGaussian:
    """Moment-matched Gaussian for one class at one depth."""

    mean: np.ndarray
    cov: np.ndarray
    cov_chol: np.ndarray  # lower-triangular factor of the (regularized) cov
    class_id: int

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def fit_class_gaussian(points: np.ndarray, class_id: int) -> ClassGaussian:
    """Sample mean / covariance (denominator N) with Cholesky-safe regularization.

    Singular covariances get +eps*I with eps = 1e-6 * trace / k, escalated
    tenfold until the factorization succeeds (an absolute floor covers the
    all-identical-points case where the trace itself is zero).
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InsufficientDataError(
            f"need at least 2 points to fit class {class_id}, got {0 if X.ndim != 2 else X.shape[0]}"
        )
    n, k = X.shape
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / n
    cov = 0.5 * (cov + cov.T)
    eps = 1e-6 * np.trace(cov) / k
    if eps <= 0.0:
        eps = 1e-12
    reg = cov
    for _ in range(40):
        try:
            chol = np.linalg.cholesky(reg)
            return ClassGaussian(mean=mean, cov=reg, cov_chol=chol, class_id=class_id)
        except np.linalg.LinAlgError:
            reg = cov + eps * np.eye(k)
            eps *= 10.0
    raise np.linalg.LinAlgError(f"covariance for class {class_id} not factorizable")


def _solve_lower(L: np.ndarray, B: np.ndarray) -> np.ndarray:
    # forward substitution; L is (k, k) lower-triangular, B is (k, m)
    Z = np.empty_like(B)
    for i in range(L.shape[0]):
        Z[i] = (B[i] - L[i, :i] @ Z[:i]) / L[i, i]
    return Z


def mahalanobis(g: ClassGaussian, x: np.ndarray) -> float:
    """Covariance-normalized distance of x to the class, via triangular solves."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.dim,):
        raise ValueError(f"expected vector of dimension {g.dim}, got shape {x.shape}")
    z = _solve_lower(g.cov_chol, (x - g.mean)[:, None])
    return float(np.sqrt((z * z).sum()))


def mahalanobis_many(g: ClassGaussian, X: np.ndarray) -> np.ndarray:
    """Vectorized mahalanobis over the rows of X."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != g.dim:
        raise ValueError(f"expected (n, {g.dim}) matrix, got shape {X.shape}")
    Z = _solve_lower(g.cov_chol, (X - g.mean).T)
    return np.sqrt((Z * Z).sum(axis=0))


def sample_gaussian(g: ClassGaussian, rng: CounterRng, n: int) -> np.ndarray:
    """n seeded draws from the class Gaussian."""
    z = rng.normals(n * g.dim).reshape(n, g.dim)
    return g.mean + z @ g.cov_chol.T


# ---------------------------------------------------------------------------
# Distance threshold over the two-class plausibility overlap
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of the threshold search at one depth."""

    delta_bar: float
    d_bar: float
    p_th: float
    overlap_empty: bool
    candidate_count: int = 0


def compute_d_bar(
    h: Hyperplane,
    g0: ClassGaussian,
    g1: ClassGaussian,
    p_th: float,
    points_in_s: np.ndarray,
    seed: int,
    n_mc: int = 20_000,
) -> ThresholdResult:
    """Largest hyperplane distance over the overlap of the trimmed class regions.

    Candidates are the current training points inside the overlap plus n_mc
    seeded Gaussian draws per class filtered to it. An empty candidate set
    means the trimmed regions are disjoint: every sample is then clearly
    classified and d_bar degenerates to 0.
    """
    k = h.depth
    if g0.dim != k or g1.dim != k:
        raise ValueError(f"class fits ({g0.dim}, {g1.dim}) do not match hyperplane depth {k}")
    delta_bar = chi_square_quantile(p_th, k)

    rng = CounterRng(seed, 0xD1BA)
    blocks = []
    points_in_s = np.asarray(points_in_s, dtype=np.float64).reshape(-1, k)
    if points_in_s.shape[0]:
        blocks.append(points_in_s)
    for g in (g0, g1):
        blocks.append(sample_gaussian(g, rng, n_mc))
    candidates = np.vstack(blocks)
    inside = (mahalanobis_many(g0, candidates) <= delta_bar) & (
        mahalanobis_many(g1, candidates) <= delta_bar
    )
    count = int(inside.sum())
    if count == 0:
        return ThresholdResult(
            delta_bar=delta_bar, d_bar=0.0, p_th=p_th, overlap_empty=True, candidate_count=0
        )
    d_bar = float(margin_distances(h, candidates[inside]).max())
    return ThresholdResult(
        delta_bar=delta_bar, d_bar=d_bar, p_th=p_th, overlap_empty=False, candidate_count=count
    )
