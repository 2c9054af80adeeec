"""Kernels, Gram matrices, and a finite feature factorization.

Every kernelized supremum downstream operates on a finite-dimensional
feature matrix Phi with Phi Phi^T equal to the Gram matrix: the objectives
depend on a hypothesis w only through the products w . Psi(x_t), so the
restriction to the span of the data is exact and any orthogonal completion
of Phi gives the same optimal values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionMismatch, NonFiniteData, NotPSD

_KINDS = ("linear", "polynomial", "rbf")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel selector: linear, polynomial (degree, offset), or rbf (gamma)."""

    kind: str
    degree: int = 2
    offset: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "polynomial" and self.degree < 1:
            raise ValueError("polynomial degree must be >= 1")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError("rbf gamma must be positive")


def linear_kernel() -> KernelSpec:
    return KernelSpec(kind="linear")


def polynomial_kernel(degree: int, offset: float = 0.0) -> KernelSpec:
    return KernelSpec(kind="polynomial", degree=degree, offset=float(offset))


def rbf_kernel(gamma: float) -> KernelSpec:
    return KernelSpec(kind="rbf", gamma=float(gamma))


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric kernel matrix k(x_i, x_j).

    Symmetry is validated here; positive semi-definiteness is validated where
    the matrix is eigendecomposed (feature_factorize raises NotPSD).
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"Gram matrix must be square, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteData("Gram matrix contains NaN or Inf")
        scale = 1.0 + float(np.max(np.abs(arr))) if arr.size else 1.0
        if float(np.max(np.abs(arr - arr.T), initial=0.0)) > 1e-12 * scale:
            raise DimensionMismatch("Gram matrix is not symmetric within 1e-12")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])


@dataclass(frozen=True)
class FeatureMatrix:
    """Explicit feature rows Phi (n x r) with Phi Phi^T reproducing a Gram matrix."""

    rows: np.ndarray

    def __post_init__(self):
        arr = np.array(self.rows, dtype=float)
        if arr.ndim != 2:
            raise DimensionMismatch(f"feature rows must be 2-d, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteData("feature rows contain NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "rows", arr)

    @property
    def rank(self) -> int:
        return int(self.rows.shape[1])


def _pairwise(kernel: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kernel values for all row pairs of a (n x m) and b (k x m)."""
    if kernel.kind == "linear":
        return a @ b.T
    if kernel.kind == "polynomial":
        return (a @ b.T + kernel.offset) ** kernel.degree
    # rbf: exp(-gamma ||a_i - b_j||^2) via the expanded square
    sq = (
        np.sum(a * a, axis=1)[:, None]
        - 2.0 * (a @ b.T)
        + np.sum(b * b, axis=1)[None, :]
    )
    return np.exp(-kernel.gamma * np.maximum(sq, 0.0))


def _check_features(features) -> np.ndarray:
    arr = np.asarray(features, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DimensionMismatch(f"features must be a non-empty 2-d array, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteData("features contain NaN or Inf")
    return arr


def gram(kernel: KernelSpec, features) -> GramMatrix:
    """Gram matrix of the kernel over the feature rows.

    Parameters
    ----------
    kernel : KernelSpec
    features : array_like, shape (n, m)

    Returns
    -------
    GramMatrix
        entries[i][j] = k(row_i, row_j), symmetrized against rounding.
    """
    arr = _check_features(features)
    g = _pairwise(kernel, arr, arr)
    return GramMatrix(entries=(g + g.T) / 2.0)


def feature_factorize(g: GramMatrix, tol: float = 1e-8) -> FeatureMatrix:
    """Factor a Gram matrix as Phi Phi^T by symmetric eigendecomposition.

    Eigenvalues below tol * lambda_max are dropped (the clipped subspace
    cannot affect any data-dependent quadratic); columns of Phi are ordered
    by decreasing spectral weight.

    Raises
    ------
    NotPSD
        If the minimum eigenvalue is below -1e-6 * lambda_max.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    lam, vec = np.linalg.eigh(g.entries)
    lam_max = float(lam[-1])
    if lam_max <= 0.0:
        if float(lam[0]) < -1e-6 * max(1.0, abs(lam_max)):
            raise NotPSD(f"minimum eigenvalue {lam[0]:.3e} is too negative")
        # zero matrix: keep a single zero column so downstream shapes stay valid
        return FeatureMatrix(rows=np.zeros((g.n, 1)))
    if float(lam[0]) < -1e-6 * lam_max:
        raise NotPSD(f"minimum eigenvalue {lam[0]:.3e} < -1e-6 * {lam_max:.3e}")
    keep = np.flatnonzero(lam >= tol * lam_max)
    order = keep[np.argsort(lam[keep])[::-1]]
    if order.size == 0:
        return FeatureMatrix(rows=np.zeros((g.n, 1)))
    phi = vec[:, order] * np.sqrt(lam[order])[None, :]
    return FeatureMatrix(rows=phi)


def feature_rows(kernel: KernelSpec, features, tol: float = 1e-8) -> FeatureMatrix:
    """Feature matrix realizing the kernel on the given rows.

    The linear kernel short-circuits to the raw rows (already an exact
    factorization of X X^T); other kernels factorize the Gram matrix.
    """
    arr = _check_features(features)
    if kernel.kind == "linear":
        return FeatureMatrix(rows=arr.copy())
    return feature_factorize(gram(kernel, arr), tol=tol)


def kernel_radius(kernel: KernelSpec, features) -> float:
    """max_t sqrt(k(x_t, x_t)) over the feature rows."""
    arr = _check_features(features)
    if kernel.kind == "linear":
        diag = np.sum(arr * arr, axis=1)
    elif kernel.kind == "polynomial":
        diag = (np.sum(arr * arr, axis=1) + kernel.offset) ** kernel.degree
    else:
        diag = np.ones(arr.shape[0])
    return float(np.sqrt(np.max(diag)))
