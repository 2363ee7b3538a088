"""Two-sample Hotelling statistics, filtered on a graph basis or on principal components."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .distributions import f_isf, f_sf
from .spectral import SpectralBasis

COND_MAX = 1e12


class SingularCovarianceError(np.linalg.LinAlgError):
    """The (projected) pooled covariance cannot be inverted reliably."""


@dataclass(frozen=True)
class TwoSampleData:
    """Observations of two groups over the same ordered variables.

    Attributes
    ----------
    X1, X2 : ndarray of shape (n1, p) and (n2, p)
    node_ids : tuple of str, optional
        Column labels, aligned with a graph's node order.
    """

    X1: np.ndarray
    X2: np.ndarray
    node_ids: tuple | None = None

    def __post_init__(self):
        X1 = np.atleast_2d(np.asarray(self.X1, dtype=float))
        X2 = np.atleast_2d(np.asarray(self.X2, dtype=float))
        if X1.ndim != 2 or X2.ndim != 2 or X1.shape[1] != X2.shape[1]:
            raise ValueError(f"incompatible sample shapes {X1.shape} and {X2.shape}")
        if X1.shape[0] < 2 or X2.shape[0] < 2:
            raise ValueError("each group needs at least two observations")
        if not (np.all(np.isfinite(X1)) and np.all(np.isfinite(X2))):
            raise ValueError("observations must be finite")
        if self.node_ids is not None and len(self.node_ids) != X1.shape[1]:
            raise ValueError("node_ids length does not match the number of columns")
        object.__setattr__(self, "X1", X1)
        object.__setattr__(self, "X2", X2)
        if self.node_ids is not None:
            object.__setattr__(self, "node_ids", tuple(self.node_ids))

    @classmethod
    def from_labels(cls, X, y, node_ids=None) -> "TwoSampleData":
        """Split rows of ``X`` by labels ``y``; the smaller label is group 1."""
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        groups = np.unique(y)
        if len(groups) != 2:
            raise ValueError(f"expected exactly two groups, got labels {groups.tolist()}")
        return cls(X[y == groups[0]], X[y == groups[1]], node_ids)

    @property
    def n1(self) -> int:
        return self.X1.shape[0]

    @property
    def n2(self) -> int:
        return self.X2.shape[0]

    @property
    def p(self) -> int:
        return self.X1.shape[1]

    @property
    def scale(self) -> float:
        """``n1 n2 / (n1 + n2)``."""
        return self.n1 * self.n2 / (self.n1 + self.n2)

    def mean_difference(self) -> np.ndarray:
        return self.X1.mean(axis=0) - self.X2.mean(axis=0)

    def subset(self, columns) -> "TwoSampleData":
        columns = list(columns)
        ids = None if self.node_ids is None else tuple(self.node_ids[c] for c in columns)
        return TwoSampleData(self.X1[:, columns], self.X2[:, columns], ids)

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """All observations and a boolean mask of group-1 rows."""
        X = np.vstack([self.X1, self.X2])
        mask = np.zeros(len(X), dtype=bool)
        mask[: self.n1] = True
        return X, mask


@dataclass(frozen=True)
class TestResult:
    statistic: float
    k: int
    df1: int
    df2: int
    pvalue: float
    scaling: float

    __test__ = False  # not a pytest class

    @property
    def f_statistic(self) -> float:
        return self.scaling * self.statistic


def pooled_covariance(data: TwoSampleData) -> np.ndarray:
    """Pooled covariance with divisor ``n1 + n2 - 2``."""
    R1 = data.X1 - data.X1.mean(axis=0)
    R2 = data.X2 - data.X2.mean(axis=0)
    S = (R1.T @ R1 + R2.T @ R2) / (data.n1 + data.n2 - 2)
    return 0.5 * (S + S.T)


def f_scaling(k: int, n1: int, n2: int) -> float:
    """Factor ``N`` such that ``N T^2`` is F(k, n1 + n2 - k - 1) under the null."""
    return (n1 + n2 - k - 1) / ((n1 + n2 - 2) * k)


def critical_value(alpha: float, k: int, n1: int, n2: int) -> float:
    """Level-``alpha`` critical value on the T^2 scale."""
    d2 = n1 + n2 - k - 1
    return f_isf(alpha, k, d2) / f_scaling(k, n1, n2)


def mahalanobis(delta: np.ndarray, S: np.ndarray) -> float:
    """``delta^T S^-1 delta`` via Cholesky; raises if ``S`` is (near) singular."""
    if S.shape == (0, 0):
        return 0.0
    w = np.linalg.eigvalsh(S)
    if w[-1] <= 0 or w[0] <= w[-1] / COND_MAX:
        raise SingularCovarianceError(
            f"covariance is singular or ill-conditioned (eigenvalues {w[0]:.3g} .. {w[-1]:.3g})"
        )
    try:
        factor = linalg.cho_factor(S, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularCovarianceError(str(exc)) from exc
    return float(delta @ linalg.cho_solve(factor, delta, check_finite=False))


def _result(stat: float, k: int, n1: int, n2: int) -> TestResult:
    d2 = n1 + n2 - k - 1
    if d2 < 1:
        raise ValueError(f"n1 + n2 - k - 1 must be >= 1 (n1={n1}, n2={n2}, k={k})")
    N = f_scaling(k, n1, n2)
    return TestResult(float(stat), k, k, d2, float(f_sf(N * stat, k, d2)), N)


def filtered_t2(data: TwoSampleData, directions: np.ndarray) -> TestResult:
    """Hotelling statistic restricted to the span of ``directions`` (p x k, orthonormal)."""
    k = directions.shape[1]
    if data.n1 + data.n2 - k - 1 < 1:
        raise ValueError(f"n1 + n2 - k - 1 must be >= 1 (n1={data.n1}, n2={data.n2}, k={k})")
    d = directions.T @ data.mean_difference()
    S = directions.T @ pooled_covariance(data) @ directions
    stat = data.scale * mahalanobis(d, 0.5 * (S + S.T))
    return _result(stat, k, data.n1, data.n2)


def hotelling_t2(data: TwoSampleData) -> TestResult:
    """Full-space two-sample Hotelling T^2 test."""
    if data.n1 + data.n2 - data.p - 1 < 1:
        raise ValueError(
            f"n1 + n2 - p - 1 must be >= 1 (n1={data.n1}, n2={data.n2}, p={data.p})"
        )
    stat = data.scale * mahalanobis(data.mean_difference(), pooled_covariance(data))
    return _result(stat, data.p, data.n1, data.n2)


def graph_t2(data: TwoSampleData, basis: SpectralBasis, k: int) -> TestResult:
    """Hotelling test on the first ``k`` coefficients of a graph basis."""
    if basis.p != data.p:
        raise ValueError(f"basis dimension {basis.p} does not match data dimension {data.p}")
    return filtered_t2(data, basis.components(k))


def principal_directions(data: TwoSampleData, k: int) -> np.ndarray:
    """Top-``k`` eigenvectors of the pooled covariance, by decreasing eigenvalue."""
    if not 1 <= k <= data.p:
        raise ValueError(f"k must be in [1, {data.p}], got {k}")
    _, V = np.linalg.eigh(pooled_covariance(data))
    return V[:, ::-1][:, :k]


def pca_t2(data: TwoSampleData, k: int) -> TestResult:
    """Hotelling test on the first ``k`` principal components of the pooled covariance."""
    return filtered_t2(data, principal_directions(data, k))


def bh_fdr(pvalues, q: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Benjamini-Hochberg step-up procedure.

    Returns
    -------
    rejected : ndarray of bool
    adjusted : ndarray of float
        BH-adjusted p-values, in the input order.
    """
    p = np.asarray(pvalues, dtype=float)
    if p.ndim != 1:
        raise ValueError("pvalues must be one-dimensional")
    m = len(p)
    if m == 0:
        return np.zeros(0, dtype=bool), np.zeros(0)
    if np.any((p < 0) | (p > 1) | np.isnan(p)):
        raise ValueError("pvalues must lie in [0, 1]")
    order = np.argsort(p, kind="stable")
    ranked = p[order] * m / np.arange(1, m + 1)
    adj_sorted = np.minimum.accumulate(ranked[::-1])[::-1]
    adjusted = np.empty(m)
    adjusted[order] = np.minimum(adj_sorted, 1.0)

    passing = np.flatnonzero(p[order] <= q * np.arange(1, m + 1) / m)
    rejected = np.zeros(m, dtype=bool)
    if len(passing):
        rejected[order[: passing[-1] + 1]] = True
    return rejected, adjusted
