"""Sparsification transforms and threshold calibration for weighted pairs.

Three schemes, all symmetry preserving:

* ``Binarize(tau)``   -> 0/1 matrix keeping the pattern ``|M_ij| >= tau``;
* ``HardThreshold(tau)`` -> weighted matrix ``M_ij 1{|M_ij| >= tau}``;
* ``TopK(k)``         -> keep the k largest-magnitude entries of each row,
  then OR the row/column keep-masks so the result stays symmetric with
  per-row degree at least k.

For a GOE matrix the tail identity ``P(|M_ij| >= tau_p) = 2 Phi(-tau_p
sqrt(n)) = p`` calibrates the threshold so the binarized graph has edge
density ``p``; :func:`threshold_for_density` inverts it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Union

import numpy as np

from .errors import InfeasibleRangeError, InvalidParameterError

_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class Binarize:
    """Keep the 0/1 pattern of entries with magnitude at least ``tau``."""

    tau: float

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise InvalidParameterError(f"tau must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class HardThreshold:
    """Zero out entries with magnitude below ``tau``, keep the rest as-is."""

    tau: float

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise InvalidParameterError(f"tau must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class TopK:
    """Keep each row's k largest-magnitude entries (OR-symmetrized)."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidParameterError(f"k must be >= 1, got {self.k}")


SparsifyScheme = Union[Binarize, HardThreshold, TopK]


def default_top_k(n: int) -> int:
    """Default per-row budget ``ceil(log n)`` (at least 1)."""
    if n < 1:
        raise InvalidParameterError(f"matrix size must be >= 1, got {n}")
    return max(1, math.ceil(math.log(n)))


def apply_scheme(m: np.ndarray, scheme: SparsifyScheme) -> np.ndarray:
    """Apply a sparsification scheme to a symmetric matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {m.shape}")
    n = m.shape[0]
    magnitude = np.abs(m)
    if isinstance(scheme, Binarize):
        return (magnitude >= scheme.tau).astype(float)
    if isinstance(scheme, HardThreshold):
        return m * (magnitude >= scheme.tau)
    if isinstance(scheme, TopK):
        if scheme.k > n:
            raise InvalidParameterError(f"k must be <= n = {n}, got {scheme.k}")
        # Stable sort on negated magnitude: ties keep the smaller column.
        order = np.argsort(-magnitude, axis=1, kind="stable")[:, : scheme.k]
        keep = np.zeros((n, n), dtype=bool)
        np.put_along_axis(keep, order, True, axis=1)
        keep |= keep.T
        return m * keep
    raise InvalidParameterError(f"unknown sparsification scheme: {scheme!r}")


def threshold_for_density(p: float, n: int) -> float:
    """Threshold ``tau_p`` such that ``2 Phi(-tau_p sqrt(n)) = p``.

    ``tau_p = -Phi^{-1}(p/2) / sqrt(n)``; the rational-approximation inverse
    CDF keeps the residual ``|2 Phi(-tau sqrt(n)) - p|`` below 1e-10.
    """
    if not 0.0 < p <= 1.0:
        raise InvalidParameterError(f"density must lie in (0, 1], got {p}")
    if n < 1:
        raise InvalidParameterError(f"matrix size must be >= 1, got {n}")
    return -_STD_NORMAL.inv_cdf(p / 2.0) / math.sqrt(n)


def density_of_threshold(tau: float, n: int) -> float:
    """Tail mass ``2 Phi(-tau sqrt(n))`` kept by a threshold ``tau``."""
    if tau < 0:
        raise InvalidParameterError(f"tau must be >= 0, got {tau}")
    if n < 1:
        raise InvalidParameterError(f"matrix size must be >= 1, got {n}")
    return 2.0 * _STD_NORMAL.cdf(-tau * math.sqrt(n))


def density_range(n: int, epsilon: float, r_const: float) -> tuple[float, float]:
    """Admissible edge-density interval for the sparse-regime guarantees.

    Returns ``((1 + epsilon) log(n) / n, n^(1/(r_const log log n) - 1))``;
    raises if the interval is empty.
    """
    if n < 3:
        raise InvalidParameterError(f"n must be >= 3 for log log n, got {n}")
    if epsilon <= 0:
        raise InvalidParameterError(f"epsilon must be > 0, got {epsilon}")
    if r_const <= 0:
        raise InvalidParameterError(f"r_const must be > 0, got {r_const}")
    p_lo = (1.0 + epsilon) * math.log(n) / n
    p_hi = n ** (1.0 / (r_const * math.log(math.log(n))) - 1.0)
    if not p_lo < p_hi:
        raise InfeasibleRangeError(
            f"empty density range: p_lo={p_lo:.6g} >= p_hi={p_hi:.6g}"
        )
    return p_lo, p_hi
