"""Smooth graph bases from symmetric eigendecompositions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import StructureMatrix

TIE_RTOL = 1e-8
_SIGN_ATOL = 1e-10


@dataclass(frozen=True)
class SpectralBasis:
    """Orthonormal eigenbasis with eigenvalues in ascending order.

    Attributes
    ----------
    U : ndarray of shape (p, p)
        Columns are eigenvectors; column ``i`` has energy ``eigenvalues[i]``.
    eigenvalues : ndarray of shape (p,)
    """

    U: np.ndarray
    eigenvalues: np.ndarray

    @property
    def p(self) -> int:
        return self.U.shape[0]

    def components(self, k: int) -> np.ndarray:
        """The first ``k`` basis vectors as a (p, k) matrix."""
        _check_k(k, self.p)
        return self.U[:, :k]

    def tie_groups(self) -> list[tuple[int, ...]]:
        """Index groups of eigenvalues treated as equal."""
        return _tie_groups(self.eigenvalues)

    def multiplicities(self) -> list[tuple[float, int]]:
        return [(float(self.eigenvalues[g[0]]), len(g)) for g in self.tie_groups()]

    def eigengap(self, k: int) -> float:
        """Gap between the last retained and the first discarded eigenvalue."""
        _check_k(k, self.p)
        if k == self.p:
            return float("inf")
        return float(self.eigenvalues[k] - self.eigenvalues[k - 1])


def resolve_k(p: int, k: int | None = None, k_frac: float = 0.2) -> int:
    """Retained dimension: ``k`` if given, else ``max(1, round(k_frac * p))`` (halves round up)."""
    if k is None:
        k = max(1, int(np.floor(k_frac * p + 0.5)))
    return min(int(k), p)


def _check_k(k: int, p: int) -> None:
    if not 1 <= k <= p:
        raise ValueError(f"k must be in [1, {p}], got {k}")


def _tie_groups(w: np.ndarray) -> list[tuple[int, ...]]:
    if len(w) == 0:
        return []
    tol = TIE_RTOL * max(1.0, float(np.max(np.abs(w))))
    groups, current = [], [0]
    for i in range(1, len(w)):
        if w[i] - w[current[0]] <= tol:
            current.append(i)
        else:
            groups.append(tuple(current))
            current = [i]
    groups.append(tuple(current))
    return groups


def canonical_signs(U: np.ndarray) -> np.ndarray:
    """Flip columns so that the first entry of largest magnitude is positive."""
    U = np.array(U, dtype=float, copy=True)
    for j in range(U.shape[1]):
        col = U[:, j]
        mag = np.abs(col)
        lead = np.flatnonzero(mag >= mag.max() - _SIGN_ATOL)[0]
        if col[lead] < 0:
            U[:, j] = -col
    return U


def eigenbasis(Q: StructureMatrix | np.ndarray) -> SpectralBasis:
    """Eigenbasis of a symmetric PSD structure matrix.

    Eigenvalues in ``[-1e-9 * max, 0)`` are clipped to zero. Columns follow the
    sign convention of :func:`canonical_signs`; within a group of tied
    eigenvalues, columns are ordered lexicographically.
    """
    M = Q.Q if isinstance(Q, StructureMatrix) else np.asarray(Q, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * scale):
        raise ValueError("structure matrix is not symmetric")
    w, U = np.linalg.eigh(0.5 * (M + M.T))
    top = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -1e-9 * max(top, 1e-300):
        raise ValueError(f"structure matrix is not PSD (smallest eigenvalue {w[0]:.3g})")
    w = np.where(w < 0, 0.0, w)

    U = canonical_signs(U)
    order = []
    for group in _tie_groups(w):
        idx = list(group)
        if len(idx) > 1:
            idx.sort(key=lambda j: tuple(np.round(U[:, j], 10)), reverse=True)
        order.extend(idx)
    U = U[:, order]
    U.setflags(write=False)
    w = np.array(w)
    w.setflags(write=False)
    return SpectralBasis(U, w)


def project(basis: SpectralBasis, k: int, x) -> np.ndarray:
    """Coefficients of ``x`` on the first ``k`` basis vectors.

    ``x`` may be a single p-vector or an (n, p) matrix of row vectors.
    """
    Uk = basis.components(k)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != basis.p:
        raise ValueError(f"x has {x.shape[-1]} coordinates, basis has {basis.p}")
    return x @ Uk
