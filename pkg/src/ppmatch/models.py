"""Correlated random graph models and reproducible samplers.

Two generative models for a pair of weighted graphs ``(A, B)`` hiding a
ground-truth vertex correspondence:

* the correlated Gaussian Wigner model ``W(n, sigma, x*)``, where ``A`` is a
  GOE matrix and ``B`` is a relabeled noisy mixture of ``A``, and
* the correlated Erdos-Renyi model ``G(n, q, s, x*)``, where ``B`` is obtained
  from ``A`` by conditional Bernoulli resampling followed by relabeling.

Symmetric weighted adjacency matrices are plain float64 ``numpy`` arrays and
are exactly symmetric by construction: only one triangle is drawn, then
mirrored. Randomness is managed through a master 64-bit seed; every sampled
object draws from a child generator derived from ``(master_seed, *path)`` via
:func:`substream`, so parallel runs are reproducible regardless of scheduling.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    InfeasibleOverlapError,
    InvalidParameterError,
)


def substream(master_seed: int, *path: int | str) -> np.random.Generator:
    """Derive an independent child generator from a master seed and a path.

    String path components are hashed with CRC-32, so tags like
    ``("pair", sigma_index, run_index)`` give stable, collision-free streams
    across processes and platforms.
    """
    if master_seed < 0:
        raise InvalidParameterError("master seed must be a non-negative integer")
    key = tuple(
        p if isinstance(p, int) else zlib.crc32(p.encode("utf-8")) for p in path
    )
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection on ``{0, ..., n-1}``; ``map[i]`` is the image of ``i``.

    The 0/1 matrix form used throughout the package is ``M[map[i], i] = 1``
    (column ``i`` carries the image of ``i``), so a pair with ground truth
    ``x*`` satisfies ``B = M A M^T`` in the noiseless case.
    """

    map: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.map, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidParameterError("permutation map must be a non-empty 1-d array")
        n = arr.size
        if arr.min() < 0 or arr.max() >= n:
            raise InvalidParameterError("permutation values must lie in [0, n)")
        if not np.array_equal(np.bincount(arr, minlength=n), np.ones(n, dtype=np.int64)):
            raise InvalidParameterError("permutation map must be a bijection")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "map", arr)

    @property
    def n(self) -> int:
        return int(self.map.size)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.int64))

    def inverse(self) -> "Permutation":
        inv = np.empty(self.n, dtype=np.int64)
        inv[self.map] = np.arange(self.n, dtype=np.int64)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """Composition ``self o other``: maps ``i`` to ``self(other(i))``."""
        if other.n != self.n:
            raise DimensionMismatchError("cannot compose permutations of different sizes")
        return Permutation(self.map[other.map])

    def matrix(self) -> np.ndarray:
        """Matrix form ``M`` with ``M[map[i], i] = 1`` (``M @ M.T == Id``)."""
        m = np.zeros((self.n, self.n))
        m[self.map, np.arange(self.n)] = 1.0
        return m

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return bool(np.array_equal(self.map, other.map))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Permutation({self.map.tolist()!r})"


@dataclass(frozen=True)
class CgwModel:
    """Correlated Gaussian Wigner noise parameters (``0 <= sigma < 1``)."""

    sigma: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.sigma < 1.0:
            raise InvalidParameterError(f"sigma must lie in [0, 1), got {self.sigma}")


@dataclass(frozen=True)
class CerModel:
    """Correlated Erdos-Renyi noise parameters.

    Requires ``q (1-s) <= 1-q`` so the conditional edge probability
    ``q (1-s) / (1-q)`` used when resampling non-edges is a valid Bernoulli
    parameter.
    """

    q: float
    s: float

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise InvalidParameterError(f"q must lie in (0, 1), got {self.q}")
        if not 0.0 <= self.s <= 1.0:
            raise InvalidParameterError(f"s must lie in [0, 1], got {self.s}")
        if self.q * (1.0 - self.s) > (1.0 - self.q):
            raise InvalidParameterError(
                "invalid correlation: q(1-s)/(1-q) exceeds 1 "
                f"for q={self.q}, s={self.s}"
            )

    @property
    def conditional_nonedge_prob(self) -> float:
        return self.q * (1.0 - self.s) / (1.0 - self.q)


NoiseModel = Union[CgwModel, CerModel]


@dataclass(frozen=True)
class CorrelatedPair:
    """A sampled pair ``(A, B)`` with its hidden correspondence and model."""

    a: np.ndarray
    b: np.ndarray
    ground_truth: Permutation
    model: NoiseModel

    def __post_init__(self) -> None:
        n = self.ground_truth.n
        if self.a.shape != (n, n) or self.b.shape != (n, n):
            raise DimensionMismatchError(
                f"pair matrices must be {n}x{n}, got {self.a.shape} and {self.b.shape}"
            )

    @property
    def n(self) -> int:
        return self.ground_truth.n


def sample_goe(n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample an ``n x n`` GOE matrix.

    Off-diagonal entries (``i < j``) are i.i.d. ``N(0, 1/n)`` and mirrored to
    the lower triangle; diagonal entries are independent ``N(0, 2/n)``.
    """
    if n < 1:
        raise InvalidParameterError(f"matrix dimension must be >= 1, got {n}")
    draw = rng.standard_normal((n, n))
    upper = np.triu(draw, 1) / math.sqrt(n)
    out = upper + upper.T
    np.fill_diagonal(out, draw.diagonal() * math.sqrt(2.0 / n))
    return out


def sample_cgw(
    n: int, sigma: float, xstar: Permutation, rng: np.random.Generator
) -> CorrelatedPair:
    """Sample a correlated Gaussian Wigner pair ``W(n, sigma, x*)``.

    ``A`` and an independent ``Z`` are GOE matrices and ``B`` satisfies
    ``B[x*(i), x*(j)] = sqrt(1 - sigma^2) A[i, j] + sigma Z[i, j]``, so the
    aligned entries of ``A`` and ``B`` have correlation ``sqrt(1 - sigma^2)``.
    """
    model = CgwModel(sigma)
    if xstar.n != n:
        raise DimensionMismatchError(f"ground truth has size {xstar.n}, expected {n}")
    a = sample_goe(n, rng)
    z = sample_goe(n, rng)
    mixed = math.sqrt(1.0 - sigma * sigma) * a + sigma * z
    p = xstar.map
    b = np.empty_like(mixed)
    b[np.ix_(p, p)] = mixed
    return CorrelatedPair(a=a, b=b, ground_truth=xstar, model=model)


def sample_cer(
    n: int, q: float, s: float, xstar: Permutation, rng: np.random.Generator
) -> CorrelatedPair:
    """Sample a correlated Erdos-Renyi pair ``G(n, q, s, x*)``.

    ``A`` is Erdos-Renyi ``G(n, q)`` with zero diagonal. Conditionally on
    ``A``, each aligned entry of ``B`` is Bernoulli(``s``) where ``A`` has an
    edge and Bernoulli(``q(1-s)/(1-q)``) where it does not, which keeps the
    marginal edge probability of ``B`` equal to ``q``. Entries are 0/1 floats.
    """
    model = CerModel(q, s)
    if xstar.n != n:
        raise DimensionMismatchError(f"ground truth has size {xstar.n}, expected {n}")
    if n < 1:
        raise InvalidParameterError(f"graph size must be >= 1, got {n}")
    iu = np.triu_indices(n, 1)
    a_edges = rng.random(iu[0].size) < q
    a = np.zeros((n, n))
    a[iu] = a_edges
    a += a.T

    keep_prob = np.where(a_edges, s, model.conditional_nonedge_prob)
    b_edges = rng.random(iu[0].size) < keep_prob
    aligned = np.zeros((n, n))
    aligned[iu] = b_edges
    aligned += aligned.T

    p = xstar.map
    b = np.empty_like(aligned)
    b[np.ix_(p, p)] = aligned
    return CorrelatedPair(a=a, b=b, ground_truth=xstar, model=model)


def sample_permutation_uniform(n: int, rng: np.random.Generator) -> Permutation:
    """Sample a permutation uniformly from the symmetric group on ``n`` items."""
    if n < 1:
        raise InvalidParameterError(f"permutation size must be >= 1, got {n}")
    return Permutation(rng.permutation(n))


def sample_seed_with_overlap(
    xstar: Permutation, m: int, rng: np.random.Generator
) -> Permutation:
    """Sample a permutation agreeing with ``xstar`` on exactly ``m`` positions.

    The ``m`` agreement positions are a uniform subset; on the complement the
    values of ``xstar`` are rearranged by a uniform derangement (rejection
    sampled, expected ~e tries), so the overlap is exactly ``m / n``.

    ``m == n - 1`` is infeasible: no permutation has exactly n-1 fixed points.
    """
    n = xstar.n
    if not 0 <= m <= n:
        raise InvalidParameterError(f"agreement count must lie in [0, {n}], got {m}")
    if m == n - 1:
        raise InfeasibleOverlapError(
            f"no permutation agrees with another on exactly n-1 = {m} positions"
        )
    out = np.array(xstar.map)
    if m == n:
        return Permutation(out)
    moved = rng.choice(n, size=n - m, replace=False)
    moved.sort()
    d = moved.size
    while True:
        shuffle = rng.permutation(d)
        if not np.any(shuffle == np.arange(d)):
            break
    out[moved] = xstar.map[moved[shuffle]]
    return Permutation(out)
