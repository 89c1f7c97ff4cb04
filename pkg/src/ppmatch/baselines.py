"""Seedless spectral baselines whose output can seed the power iterations.

Both methods build an ``n x n`` vertex similarity from the eigendecompositions
of the two adjacency matrices and round it with the same greedy projection
used everywhere else in the package, so exactly one rounding rule exists
repo-wide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError, NumericalError
from .matching import gmwm
from .models import Permutation

DEFAULT_GRAMPA_ETA = 0.2


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def spectral_decomposition(m: np.ndarray) -> SpectralDecomposition:
    """Symmetric eigendecomposition with ascending eigenvalues."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise DimensionMismatchError(f"expected equal square matrices, got {a.shape} and {b.shape}")


def umeyama_similarity(
    da: SpectralDecomposition, db: SpectralDecomposition
) -> np.ndarray:
    """Absolute-eigenvector similarity ``|U_a| |U_b|^T``.

    Columns are ordered by ascending eigenvalue on both sides; entrywise
    absolute values remove the per-eigenvector sign ambiguity.
    """
    return np.abs(da.eigenvectors) @ np.abs(db.eigenvectors).T


def umeyama(a: np.ndarray, b: np.ndarray) -> Permutation:
    """Classic spectral alignment: greedy rounding of ``|U_a| |U_b|^T``."""
    _check_pair(a, b)
    return gmwm(umeyama_similarity(spectral_decomposition(a), spectral_decomposition(b)))


def grampa_similarity(
    da: SpectralDecomposition, db: SpectralDecomposition, eta: float
) -> np.ndarray:
    """Cauchy-kernel spectral similarity.

    ``X = sum_ij [eta / ((lam_i - mu_j)^2 + eta^2)] u_i u_i^T J v_j v_j^T``
    with ``J`` the all-ones matrix scaled by ``1/n``. Every kernel weight is
    bounded by ``1/eta``, so the similarity is finite for any ``eta > 0``.
    """
    if eta <= 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    lam = da.eigenvalues
    mu = db.eigenvalues
    u = da.eigenvectors
    v = db.eigenvectors
    n = lam.size
    weights = eta / ((lam[:, None] - mu[None, :]) ** 2 + eta * eta)
    # u_i^T J v_j factors through the eigenvector column sums.
    coeff = weights * np.outer(u.sum(axis=0), v.sum(axis=0)) / n
    return u @ coeff @ v.T


def grampa(a: np.ndarray, b: np.ndarray, eta: float = DEFAULT_GRAMPA_ETA) -> Permutation:
    """Spectral alignment through the Cauchy-kernel similarity, greedily rounded."""
    _check_pair(a, b)
    if eta <= 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    da = spectral_decomposition(a)
    db = spectral_decomposition(b)
    return gmwm(grampa_similarity(da, db, eta))
