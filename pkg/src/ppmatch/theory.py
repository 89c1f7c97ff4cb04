"""Metrics, guarantee constants, and probability-bound evaluators.

The success guarantees for one projected power iteration have the shape
``1 - poly(n) * exp(-rate(sigma) * (1 - theta^2/2)^2 * n)`` where ``theta``
measures the seed quality through ``||X0 - X*||_F <= theta sqrt(n)``. At
desk-scale ``n`` these lower bounds are typically vacuous (negative); the
evaluators therefore report both the raw value and a clamped-to-[0, 1] value
and never pretend tightness. Empirical behaviour is checked by Monte Carlo in
the experiment harness instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError
from .models import Permutation


def overlap(x: Permutation, y: Permutation) -> float:
    """Fraction of indices on which two permutations agree."""
    if x.n != y.n:
        raise DimensionMismatchError(f"size mismatch: {x.n} vs {y.n}")
    return float(np.count_nonzero(x.map == y.map)) / x.n


def frobenius_seed_distance(x: Permutation, y: Permutation) -> float:
    """Frobenius distance between the matrix forms, computed combinatorially.

    Equal to ``sqrt(2 (n - #agreements))``: each disagreeing column
    contributes two unit entries to the difference of the 0/1 matrices.
    """
    if x.n != y.n:
        raise DimensionMismatchError(f"size mismatch: {x.n} vs {y.n}")
    agreements = int(np.count_nonzero(x.map == y.map))
    return math.sqrt(2.0 * (x.n - agreements))


def _check_sigma(sigma: float) -> None:
    if not 0.0 <= sigma < 1.0:
        raise InvalidParameterError(f"sigma must lie in [0, 1), got {sigma}")


def one_iteration_rate_constant(sigma: float) -> float:
    """Exponential rate constant of the one-iteration success bounds.

    Equals ``(1 - sigma^2) / (384 (1 + 2 sigma sqrt(1 - sigma^2)))``; strictly
    decreasing in the noise level, with value ``1/384`` at ``sigma = 0``.
    """
    _check_sigma(sigma)
    s2 = sigma * sigma
    return (1.0 - s2) / (1.0 + 2.0 * sigma * math.sqrt(1.0 - s2)) / 384.0


def seed_corruption_tolerance(sigma: float) -> float:
    """Largest seed corruption fraction covered by the multi-iteration guarantee.

    Equals ``(9/410)^2 (1 - sigma^2)``: a seed agreeing with the truth on at
    least ``(1 - kappa) n`` positions suffices, uniformly over such seeds.
    """
    _check_sigma(sigma)
    return (9.0 / 410.0) ** 2 * (1.0 - sigma * sigma)


@dataclass(frozen=True)
class BoundReport:
    """A probability lower bound together with its evaluation point.

    ``raw_value`` may be negative (vacuous bound); ``value`` is clamped to
    [0, 1] for reporting.
    """

    n: int
    theta: float
    sigma: float
    raw_value: float
    value: float
    r: int | None = None


def _check_one_iteration_hypotheses(n: int, theta: float, sigma: float) -> None:
    _check_sigma(sigma)
    if n < 10:
        raise InvalidParameterError(f"bound requires n >= 10, got {n}")
    theta_max = math.sqrt(2.0 * (1.0 - 10.0 / n))
    if not 0.0 <= theta <= theta_max:
        raise InvalidParameterError(
            f"theta must lie in [0, sqrt(2(1-10/n))] = [0, {theta_max:.6g}], got {theta}"
        )


def one_iteration_success_bound(n: int, theta: float, sigma: float) -> BoundReport:
    """Lower bound on exact recovery by a single power-and-project step.

    Raw value: ``1 - 5 n^2 exp(-c(sigma) (1 - theta^2/2)^2 n)``.
    """
    _check_one_iteration_hypotheses(n, theta, sigma)
    rate = one_iteration_rate_constant(sigma)
    margin = 1.0 - theta * theta / 2.0
    raw = 1.0 - 5.0 * n * n * math.exp(-rate * margin * margin * n)
    return BoundReport(n=n, theta=theta, sigma=sigma, raw_value=raw, value=_clamp01(raw))


def partial_recovery_bound(n: int, theta: float, sigma: float, r: int) -> BoundReport:
    """Lower bound on recovering an overlap above ``r / n`` in one step.

    Raw value: ``1 - 16 r n exp(-c(sigma) (1 - theta^2/2)^2 n)``.
    """
    _check_one_iteration_hypotheses(n, theta, sigma)
    if not 1 <= r <= n:
        raise InvalidParameterError(f"r must lie in [1, {n}], got {r}")
    rate = one_iteration_rate_constant(sigma)
    margin = 1.0 - theta * theta / 2.0
    raw = 1.0 - 16.0 * r * n * math.exp(-rate * margin * margin * n)
    return BoundReport(
        n=n, theta=theta, sigma=sigma, raw_value=raw, value=_clamp01(raw), r=r
    )


def _clamp01(v: float) -> float:
    return min(max(v, 0.0), 1.0)


def _check_square(c: np.ndarray) -> int:
    c = np.asarray(c)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {c.shape}")
    return c.shape[0]


def is_diag_dominant(c: np.ndarray) -> bool:
    """True iff every diagonal entry strictly exceeds all entries in its row.

    This is the weak, row-wise notion (ties count as failures); it guarantees
    that the greedy projection returns the identity.
    """
    c = np.asarray(c, dtype=float)
    n = _check_square(c)
    if n == 1:
        return True
    off = c.copy()
    np.fill_diagonal(off, -np.inf)
    return bool(np.all(np.diag(c) > off.max(axis=1)))


def is_row_col_dominant(c: np.ndarray, i: int) -> bool:
    """True iff ``c[i, i]`` strictly dominates both its row and its column."""
    c = np.asarray(c, dtype=float)
    n = _check_square(c)
    if not 0 <= i < n:
        raise InvalidParameterError(f"index {i} out of range for size {n}")
    if n == 1:
        return True
    pivot = c[i, i]
    row = np.delete(c[i, :], i)
    col = np.delete(c[:, i], i)
    return bool(pivot > row.max() and pivot > col.max())


def expected_power_step_entry(x: Permutation, i: int, j: int) -> float:
    """Expected entry of the noiseless aligned power step ``A X A``.

    For a GOE matrix ``A`` and seed ``x`` with fixed-point fraction ``s``:
    ``E[C_ii] = s + 1{x(i)=i}/n`` and ``E[C_ij] = 1{x(j)=i}/n`` for ``i != j``.
    """
    n = x.n
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidParameterError(f"indices ({i}, {j}) out of range for size {n}")
    if i == j:
        s = float(np.count_nonzero(x.map == np.arange(n))) / n
        return s + (1.0 / n if x.map[i] == i else 0.0)
    return 1.0 / n if x.map[j] == i else 0.0
