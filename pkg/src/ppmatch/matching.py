"""Core matching algorithms: greedy projection and projected power iterations.

The similarity matrix of one power step is ``C[i, j] = sum_k A[i, k] B[x(k), j]``,
i.e. ``C = A X B`` with ``X`` the row-to-column matrix form ``X[k, x(k)] = 1``.
Its vectorization equals ``(B kron A) vec(X)`` for symmetric inputs, but the
Kronecker product is never materialized: the step is computed as a row gather
followed by a single dense product, for Theta(n^3) time and Theta(n^2) memory
per iteration.

The projection onto permutations is the greedy maximum weight matching
(:func:`gmwm`): repeatedly take the largest remaining entry ``(i, j)``, set
``pi(i) = j`` and mask row ``i`` and column ``j``. It is idempotent and
right-equivariant under column permutations, which is what makes relabeling
arguments work.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InstanceTooLargeError,
    InvalidInputError,
    InvalidParameterError,
)
from .models import Permutation
from .theory import overlap

_BRUTE_FORCE_MAX_N = 9
_BRUTE_FORCE_CHUNK = 40320


@dataclass(frozen=True)
class PpmOptions:
    """Options for :func:`ppmgm`.

    ``remove_diagonal`` zeroes the diagonals of both inputs before iterating
    (the variant used by the multi-iteration guarantee). ``early_stop_on_fixpoint``
    stops as soon as an iterate repeats; the projection is deterministic, so a
    fixpoint is absorbing. Off by default: the reference procedure always runs
    ``max_iterations`` steps.
    """

    max_iterations: int = 1
    remove_diagonal: bool = False
    early_stop_on_fixpoint: bool = False

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise InvalidParameterError(
                f"max_iterations must be >= 1, got {self.max_iterations}"
            )


@dataclass(frozen=True)
class MatchResult:
    """Result of a projected power run.

    ``trace`` holds the per-iteration overlap with the ground truth and is
    only populated when a ground truth was supplied; its length equals
    ``iterations_run``.
    """

    estimate: Permutation
    iterations_run: int
    converged_early: bool = False
    trace: list[float] | None = field(default=None)


def _as_square(c: np.ndarray, name: str = "matrix") -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {c.shape}")
    return c


def gmwm(cost: np.ndarray) -> Permutation:
    """Greedy maximum weight matching on a square cost matrix.

    Repeatedly selects the globally largest unmasked entry ``(i, j)``, assigns
    ``pi(i) = j`` and masks row ``i`` and column ``j``. Ties are broken
    deterministically: smallest row index first, then smallest column index.

    Uses a lazily revalidated per-row argmax heap: a row is rescanned only
    when its cached best column has been masked, giving the usual
    O(n^2 log n)-type behaviour on generic inputs.
    """
    cost = _as_square(cost, "cost")
    if not np.isfinite(cost).all():
        raise InvalidInputError("cost matrix must be finite (no NaN/inf entries)")
    n = cost.shape[0]
    row_open = np.ones(n, dtype=bool)
    col_open = np.ones(n, dtype=bool)

    def best_in_row(i: int) -> tuple[float, int]:
        masked = np.where(col_open, cost[i], -np.inf)
        j = int(np.argmax(masked))  # first occurrence: smallest column wins ties
        return float(cost[i, j]), j

    heap: list[tuple[float, int, int]] = []
    for i in range(n):
        v, j = best_in_row(i)
        heap.append((-v, i, j))
    heapq.heapify(heap)

    out = np.empty(n, dtype=np.int64)
    assigned = 0
    while assigned < n:
        _, i, j = heapq.heappop(heap)
        if not row_open[i]:
            continue
        if not col_open[j]:
            # Cached argmax got masked; rescan this row.
            v, j = best_in_row(i)
            heapq.heappush(heap, (-v, i, j))
            continue
        out[i] = j
        row_open[i] = False
        col_open[j] = False
        assigned += 1
    return Permutation(out)


def power_step(a: np.ndarray, b: np.ndarray, x: Permutation) -> np.ndarray:
    """One power step: ``C[i, j] = sum_k a[i, k] b[x(k), j]``.

    Computed as ``a @ b[x.map]`` (row gather plus one dense product); the
    ``n^2 x n^2`` Kronecker form is never materialized.
    """
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape or x.n != a.shape[0]:
        raise DimensionMismatchError(
            f"dimension mismatch: a {a.shape}, b {b.shape}, permutation size {x.n}"
        )
    return a @ b[x.map]


def remove_diagonal(m: np.ndarray) -> np.ndarray:
    """Copy of ``m`` with the diagonal zeroed."""
    out = np.array(m, dtype=float)
    _as_square(out)
    np.fill_diagonal(out, 0.0)
    return out


def ppmgm(
    a: np.ndarray,
    b: np.ndarray,
    seed: Permutation,
    options: PpmOptions | None = None,
    ground_truth: Permutation | None = None,
) -> MatchResult:
    """Projected power method for graph matching.

    Iterates ``x_{k+1} = gmwm(power_step(a, b, x_k))`` starting from ``seed``
    for ``options.max_iterations`` steps (optionally stopping at a fixpoint)
    and returns the last iterate. When ``ground_truth`` is given, the overlap
    of every iterate with it is recorded; the trace is diagnostic only and
    never influences the iteration.
    """
    opts = options if options is not None else PpmOptions()
    a_eff = remove_diagonal(a) if opts.remove_diagonal else _as_square(a, "a")
    b_eff = remove_diagonal(b) if opts.remove_diagonal else _as_square(b, "b")
    if ground_truth is not None and ground_truth.n != seed.n:
        raise DimensionMismatchError("ground truth size does not match seed")

    current = seed
    trace: list[float] | None = [] if ground_truth is not None else None
    iterations_run = 0
    converged_early = False
    for _ in range(opts.max_iterations):
        nxt = gmwm(power_step(a_eff, b_eff, current))
        iterations_run += 1
        if trace is not None:
            trace.append(overlap(nxt, ground_truth))
        if opts.early_stop_on_fixpoint and nxt == current:
            current = nxt
            converged_early = True
            break
        current = nxt
    return MatchResult(
        estimate=current,
        iterations_run=iterations_run,
        converged_early=converged_early,
        trace=trace,
    )


def qap_objective(a: np.ndarray, b: np.ndarray, x: Permutation) -> float:
    """Quadratic assignment objective ``sum_ij a[i, j] b[x(i), x(j)]``."""
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape or x.n != a.shape[0]:
        raise DimensionMismatchError(
            f"dimension mismatch: a {a.shape}, b {b.shape}, permutation size {x.n}"
        )
    p = x.map
    return float(np.sum(a * b[np.ix_(p, p)]))


def brute_force_qap(a: np.ndarray, b: np.ndarray) -> Permutation:
    """Exhaustive maximizer of the assignment objective; oracle for small n.

    Enumerates all of S_n in lexicographic order and breaks ties in favour of
    the lexicographically smallest permutation. Limited to ``n <= 9``.
    """
    a = _as_square(a, "a")
    b = _as_square(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    n = a.shape[0]
    if n > _BRUTE_FORCE_MAX_N:
        raise InstanceTooLargeError(
            f"exhaustive search limited to n <= {_BRUTE_FORCE_MAX_N}, got {n}"
        )

    best_value = -np.inf
    best: np.ndarray | None = None

    def consider(chunk: list[tuple[int, ...]]) -> None:
        nonlocal best_value, best
        perms = np.array(chunk, dtype=np.int64)
        gathered = b[perms[:, :, None], perms[:, None, :]]
        values = np.einsum("ij,kij->k", a, gathered)
        k = int(np.argmax(values))  # first occurrence keeps lexicographic order
        if values[k] > best_value:
            best_value = float(values[k])
            best = perms[k]

    chunk: list[tuple[int, ...]] = []
    for perm in itertools.permutations(range(n)):
        chunk.append(perm)
        if len(chunk) == _BRUTE_FORCE_CHUNK:
            consider(chunk)
            chunk = []
    if chunk:
        consider(chunk)
    assert best is not None
    return Permutation(best)
