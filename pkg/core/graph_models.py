"""Latent-position graph models: RDPG, SBM and degree-corrected SBM.

Block-level parameters are turned into latent positions by factoring the
block probability matrix, and adjacency matrices are drawn edge by edge from
counter-based random streams so that any (X, seed) pair reproduces the same
graph regardless of how the work is scheduled.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

import numpy as np
from scipy import linalg, sparse

from .errors import ModelValidationError, PreconditionError
from .schemas import ModelConfig

logger = logging.getLogger(__name__)

GRAM_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-10
RANK_TOLERANCE = 1e-10
DENSE_STORAGE_MAX_N = 2**15
_GRAM_CHUNK = 2048
_MAX_SEED = 2**64


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


def _row_chunks(n: int, size: int = _GRAM_CHUNK) -> Iterator[slice]:
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def gram_extrema(rows: np.ndarray) -> tuple[float, float]:
    """Return the smallest and largest inner product X_i^T X_j over all pairs (i = j included)."""

    if rows.shape[0] == 0:
        return 0.0, 0.0
    low, high = np.inf, -np.inf
    for block in _row_chunks(rows.shape[0]):
        gram = rows[block] @ rows.T
        low = min(low, float(gram.min()))
        high = max(high, float(gram.max()))
    return low, high


@dataclass(frozen=True, slots=True, eq=False)
class LatentPositionMatrix:
    """n x d matrix X whose rows are the latent positions of the vertices."""

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] == 0:
            raise ModelValidationError(f"latent positions must be an n x d matrix with d >= 1 (got shape {rows.shape})")
        if not np.all(np.isfinite(rows)):
            raise ModelValidationError("latent positions must be finite")
        low, high = gram_extrema(rows)
        if low < -GRAM_TOLERANCE or high > 1.0 + GRAM_TOLERANCE:
            raise ModelValidationError(
                f"every inner product X_i^T X_j must lie in [0, 1] (observed range [{low:.6g}, {high:.6g}])"
            )
        object.__setattr__(self, "rows", _readonly(rows))

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    @property
    def d(self) -> int:
        return int(self.rows.shape[1])

    @property
    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.rows, compute_uv=False)

    @property
    def is_full_rank(self) -> bool:
        values = self.singular_values
        if values.size < self.d or values[0] == 0.0:
            return False
        return bool(values[self.d - 1] > RANK_TOLERANCE * values[0])

    def probabilities(self) -> np.ndarray:
        """Dense P = X X^T. Only intended for moderate n."""

        return self.rows @ self.rows.T

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LatentPositionMatrix):
            return NotImplemented
        return np.array_equal(self.rows, other.rows)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, slots=True, eq=False)
class BlockModelSpec:
    """Block probabilities, memberships and optional degree-correction factors."""

    B: np.ndarray
    tau: np.ndarray
    degree_factors: Optional[np.ndarray] = None
    directions: Optional[np.ndarray] = None
    model_id: str = "custom"

    def __post_init__(self) -> None:
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ModelValidationError(f"B must be a square K x K matrix (got shape {B.shape})")
        if not np.allclose(B, B.T, rtol=0.0, atol=GRAM_TOLERANCE):
            raise ModelValidationError("B must be symmetric")
        if B.min() < -GRAM_TOLERANCE or B.max() > 1.0 + GRAM_TOLERANCE:
            raise ModelValidationError(
                f"entries of B must lie in [0, 1] (observed range [{B.min():.6g}, {B.max():.6g}])"
            )
        B = np.clip(B, 0.0, 1.0)
        smallest = float(np.linalg.eigvalsh(B)[0])
        if smallest < -PSD_TOLERANCE:
            raise ModelValidationError(
                f"B must be positive semidefinite to be an RDPG (smallest eigenvalue {smallest:.6g})"
            )
        K = B.shape[0]
        for k in range(K):
            for j in range(k + 1, K):
                if np.allclose(B[k], B[j], rtol=0.0, atol=GRAM_TOLERANCE):
                    raise ModelValidationError(
                        f"rows {k} and {j} of B are identical, so blocks {k} and {j} would share a latent position"
                    )

        tau = np.asarray(self.tau)
        if tau.ndim != 1 or tau.size == 0:
            raise ModelValidationError("tau must be a non-empty vector of block labels")
        if not np.issubdtype(tau.dtype, np.integer):
            if not np.all(np.equal(np.mod(tau, 1), 0)):
                raise ModelValidationError("block labels in tau must be integers")
            tau = tau.astype(np.int64)
        if tau.min() < 0 or tau.max() >= K:
            raise ModelValidationError(
                f"block labels must lie in [0, {K}) (observed range [{tau.min()}, {tau.max()}])"
            )
        sizes = np.bincount(tau, minlength=K)
        if np.any(sizes == 0):
            empty = int(np.flatnonzero(sizes == 0)[0])
            raise ModelValidationError(f"every block needs at least one vertex (block {empty} is empty)")

        factors = self.degree_factors
        if factors is not None:
            factors = np.asarray(factors, dtype=float)
            if factors.shape != tau.shape:
                raise ModelValidationError(
                    f"degree_factors must have one entry per vertex (got {factors.size}, n={tau.size})"
                )
            if np.any(factors <= 0.0) or np.any(factors >= 1.0):
                bad = int(np.flatnonzero((factors <= 0.0) | (factors >= 1.0))[0])
                raise ModelValidationError(
                    f"degree factors must lie in (0, 1) (c_{bad} = {factors[bad]:.6g})"
                )
            if not np.allclose(np.diag(B), 1.0, rtol=0.0, atol=PSD_TOLERANCE):
                raise ModelValidationError(
                    "a degree-corrected model needs unit block directions, i.e. diag(B) = 1 "
                    f"(got diag {np.round(np.diag(B), 6).tolist()})"
                )
            object.__setattr__(self, "degree_factors", _readonly(factors))

        directions = self.directions
        if directions is not None:
            directions = np.atleast_2d(np.asarray(directions, dtype=float))
            if directions.shape[0] != K:
                raise ModelValidationError(f"need one direction per block (got {directions.shape[0]}, K={K})")
            if not np.allclose(directions @ directions.T, B, rtol=0.0, atol=PSD_TOLERANCE):
                raise ModelValidationError("the Gram matrix of the given directions must equal B")
            object.__setattr__(self, "directions", _readonly(directions))

        object.__setattr__(self, "B", _readonly(B))
        object.__setattr__(self, "tau", _readonly(tau.astype(np.int64)))

    @property
    def K(self) -> int:
        return int(self.B.shape[0])

    @property
    def n(self) -> int:
        return int(self.tau.shape[0])

    @property
    def block_sizes(self) -> np.ndarray:
        return np.bincount(self.tau, minlength=self.K)

    @property
    def n_min(self) -> int:
        return int(self.block_sizes.min())

    @property
    def is_degree_corrected(self) -> bool:
        return self.degree_factors is not None


@dataclass(frozen=True, slots=True, eq=False)
class AdjacencySample:
    """Symmetric hollow binary adjacency matrix and the seed that produced it.

    For n <= 2**15 the strict upper triangle is kept as a packed bitset in
    row-major order; larger graphs keep the sorted (i, j) edge list.
    """

    n: int
    seed: Optional[int]
    bits: Optional[np.ndarray] = None
    edges: Optional[np.ndarray] = None

    @classmethod
    def from_edges(cls, n: int, edges: np.ndarray, seed: Optional[int] = None) -> "AdjacencySample":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ModelValidationError(
                f"edge endpoints must lie in [0, {n}) (observed range [{edges.min()}, {edges.max()}])"
            )
        if np.any(edges[:, 0] == edges[:, 1]):
            loop = int(edges[edges[:, 0] == edges[:, 1]][0, 0])
            raise ModelValidationError(f"self-loops are not allowed (vertex {loop})")
        upper = np.sort(edges, axis=1)
        upper = np.unique(upper, axis=0) if upper.size else upper
        if n <= DENSE_STORAGE_MAX_N:
            flags = np.zeros(n * (n - 1) // 2, dtype=bool)
            if upper.size:
                flags[_flat_upper_index(n, upper[:, 0], upper[:, 1])] = True
            return cls(n=n, seed=seed, bits=_readonly(np.packbits(flags)))
        return cls(n=n, seed=seed, edges=_readonly(upper))

    def edge_array(self) -> np.ndarray:
        """Edges (i, j) with i < j, sorted row-major."""

        if self.edges is not None:
            return self.edges
        m = self.n * (self.n - 1) // 2
        if m == 0:
            return np.zeros((0, 2), dtype=np.int64)
        flat = np.flatnonzero(np.unpackbits(self.bits, count=m))
        starts = _flat_upper_index(self.n, np.arange(self.n - 1), np.arange(1, self.n))
        i = np.searchsorted(starts, flat, side="right") - 1
        j = flat - starts[i] + i + 1
        return np.column_stack([i, j]).astype(np.int64)

    @property
    def num_edges(self) -> int:
        if self.edges is not None:
            return int(self.edges.shape[0])
        return int(np.unpackbits(self.bits).sum())

    def to_sparse(self) -> sparse.csr_matrix:
        edges = self.edge_array()
        data = np.ones(2 * edges.shape[0], dtype=float)
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n), dtype=float)
        edges = self.edge_array()
        dense[edges[:, 0], edges[:, 1]] = 1.0
        dense[edges[:, 1], edges[:, 0]] = 1.0
        return dense

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AdjacencySample):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edge_array(), other.edge_array())

    __hash__ = None  # type: ignore[assignment]


def _flat_upper_index(n: int, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def _validate_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed >= _MAX_SEED:
        raise PreconditionError(f"seed must be a 64-bit unsigned integer (got {seed})")
    return seed


def row_stream(seed: int, row: int) -> np.random.Generator:
    """Counter-based stream for one adjacency row, keyed by (seed, row)."""

    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(row,))))


def sbm_to_latent(spec: BlockModelSpec, d: Optional[int] = None) -> LatentPositionMatrix:
    """Factor B = nu nu^T and place vertex i at c_i * nu_{tau(i)}."""

    if spec.directions is not None:
        distinct = np.asarray(spec.directions, dtype=float)
        if d is not None and d != distinct.shape[1]:
            raise PreconditionError(
                f"d must match the dimension of the given directions (got d={d}, directions have {distinct.shape[1]})"
            )
    else:
        eigenvalues, eigenvectors = linalg.eigh(spec.B)
        order = np.argsort(eigenvalues)[::-1]
        eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]
        top = max(float(eigenvalues[0]), 0.0)
        rank = int(np.sum(eigenvalues > RANK_TOLERANCE * top)) if top > 0 else 0
        if rank == 0:
            raise ModelValidationError("B must have at least one positive eigenvalue")
        if d is None:
            d = rank
        if d < 1 or d > rank:
            raise PreconditionError(f"d must lie in [1, rank(B)={rank}] (got d={d})")
        distinct = eigenvectors[:, :d] * np.sqrt(eigenvalues[:d])
        logger.debug("factored B (K=%d) into latent dimension d=%d", spec.K, d)

    rows = distinct[spec.tau]
    if spec.degree_factors is not None:
        rows = rows * spec.degree_factors[:, None]
    latent = LatentPositionMatrix(rows)
    if not latent.is_full_rank:
        raise ModelValidationError(f"latent positions must have rank d={latent.d}")
    return latent


def sample_adjacency(X: LatentPositionMatrix, seed: int) -> AdjacencySample:
    """Draw A ~ RDPG(X): independent Bernoulli(X_i^T X_j) edges for i < j."""

    seed = _validate_seed(seed)
    rows = X.rows
    n = X.n
    hits_i: list[np.ndarray] = []
    hits_j: list[np.ndarray] = []
    for i in range(n - 1):
        probabilities = rows[i + 1 :] @ rows[i]
        low, high = float(probabilities.min()), float(probabilities.max())
        if low < -GRAM_TOLERANCE or high > 1.0 + GRAM_TOLERANCE:
            raise ModelValidationError(
                f"edge probabilities must lie in [0, 1] (row {i} spans [{low:.6g}, {high:.6g}])"
            )
        np.clip(probabilities, 0.0, 1.0, out=probabilities)
        draws = row_stream(seed, i).random(probabilities.shape[0])
        neighbours = np.flatnonzero(draws < probabilities) + i + 1
        if neighbours.size:
            hits_i.append(np.full(neighbours.size, i, dtype=np.int64))
            hits_j.append(neighbours.astype(np.int64))
    if hits_i:
        edges = np.column_stack([np.concatenate(hits_i), np.concatenate(hits_j)])
    else:
        edges = np.zeros((0, 2), dtype=np.int64)
    logger.debug("sampled %d edges on %d vertices (seed=%d)", edges.shape[0], n, seed)
    return AdjacencySample.from_edges(n, edges, seed=seed)


# --- i.i.d. latent distributions -------------------------------------------------


@dataclass(frozen=True, slots=True, eq=False)
class PointMassMixture:
    """Mixture of point masses at the rows of ``atoms`` with weights ``weights``."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != (atoms.shape[0],):
            raise ModelValidationError(
                f"need one weight per atom (got {weights.size} weights for {atoms.shape[0]} atoms)"
            )
        if np.any(weights < 0.0) or not np.isclose(weights.sum(), 1.0, rtol=0.0, atol=1e-12):
            raise ModelValidationError(f"mixture weights must be nonnegative and sum to 1 (got {weights.tolist()})")
        gram = atoms @ atoms.T
        if gram.min() < -GRAM_TOLERANCE or gram.max() > 1.0 + GRAM_TOLERANCE:
            raise ModelValidationError(
                f"atom inner products must lie in [0, 1] (observed range [{gram.min():.6g}, {gram.max():.6g}])"
            )
        object.__setattr__(self, "atoms", _readonly(atoms))
        object.__setattr__(self, "weights", _readonly(weights))

    @property
    def d(self) -> int:
        return int(self.atoms.shape[1])


@dataclass(frozen=True, slots=True, eq=False)
class SegmentUniform:
    """Uniform distribution on the segment from ``start`` to ``end``."""

    start: np.ndarray
    end: np.ndarray

    def __post_init__(self) -> None:
        start = np.asarray(self.start, dtype=float).ravel()
        end = np.asarray(self.end, dtype=float).ravel()
        if start.shape != end.shape or start.size == 0:
            raise ModelValidationError("segment endpoints must be vectors of the same dimension")
        # s, t -> (start + s u).(start + t u) is bilinear, so the corners bound it.
        corners = [start @ start, start @ end, end @ end]
        if min(corners) < -GRAM_TOLERANCE or max(corners) > 1.0 + GRAM_TOLERANCE:
            raise ModelValidationError(
                f"segment inner products must lie in [0, 1] (endpoint products {np.round(corners, 6).tolist()})"
            )
        object.__setattr__(self, "start", _readonly(start))
        object.__setattr__(self, "end", _readonly(end))

    @property
    def d(self) -> int:
        return int(self.start.shape[0])


LatentDistribution = Union[PointMassMixture, SegmentUniform]


def sample_iid_latent(dist: LatentDistribution, n: int, seed: int) -> LatentPositionMatrix:
    """Draw n i.i.d. latent positions from ``dist``."""

    if n < 1:
        raise PreconditionError(f"n must be positive (got n={n})")
    rng = np.random.default_rng(np.random.SeedSequence(_validate_seed(seed)))
    if isinstance(dist, PointMassMixture):
        labels = rng.choice(dist.atoms.shape[0], size=n, p=dist.weights)
        rows = dist.atoms[labels]
    elif isinstance(dist, SegmentUniform):
        positions = rng.random(n)
        rows = dist.start[None, :] + positions[:, None] * (dist.end - dist.start)[None, :]
    else:
        raise ModelValidationError(f"unsupported latent distribution {type(dist).__name__}")
    return LatentPositionMatrix(rows)


# --- configs ---------------------------------------------------------------------


def block_sizes_for(n: int, fractions: Sequence[float]) -> np.ndarray:
    """Split n vertices by ``fractions`` with largest-remainder rounding (ties go to the lower block)."""

    fractions = np.asarray(fractions, dtype=float)
    fractions = fractions / fractions.sum()
    raw = fractions * n
    sizes = np.floor(raw).astype(np.int64)
    remainder = n - int(sizes.sum())
    order = np.lexsort((np.arange(raw.size), -(raw - sizes)))
    sizes[order[:remainder]] += 1
    return sizes


def block_spec_from_config(config: ModelConfig, n: Optional[int], seed: Optional[int] = None) -> BlockModelSpec:
    """Materialise a config at vertex count n; degree factors come from ``seed`` (or ``config.seed``)."""

    K = config.K
    if config.tau is not None:
        tau = np.asarray(config.tau, dtype=np.int64)
        if n is not None and n != tau.size:
            raise PreconditionError(f"n must equal len(tau)={tau.size} for this model (got n={n})")
    elif config.block_sizes is not None:
        sizes = np.asarray(config.block_sizes, dtype=np.int64)
        if n is not None and n != int(sizes.sum()):
            raise PreconditionError(f"n must equal sum(block_sizes)={int(sizes.sum())} for this model (got n={n})")
        tau = np.repeat(np.arange(K), sizes)
    else:
        if n is None:
            raise PreconditionError(f"model '{config.id}' is given by block fractions, so n is required")
        if n < K:
            raise PreconditionError(f"n must be at least K={K} (got n={n})")
        fractions = config.block_fractions or [1.0 / K] * K
        tau = np.repeat(np.arange(K), block_sizes_for(n, fractions))

    degree_factors = None
    if config.degree_factors is not None:
        if isinstance(config.degree_factors, list):
            degree_factors = np.asarray(config.degree_factors, dtype=float)
        else:
            lo, hi = config.degree_factors.uniform
            stream = seed if seed is not None else config.seed
            rng = np.random.default_rng(np.random.SeedSequence(_validate_seed(stream)))
            degree_factors = rng.uniform(lo, hi, size=tau.size)

    return BlockModelSpec(
        B=np.asarray(config.block_matrix(), dtype=float),
        tau=tau,
        degree_factors=degree_factors,
        directions=None if config.directions is None else np.asarray(config.directions, dtype=float),
        model_id=config.id,
    )


__all__ = [
    "AdjacencySample",
    "BlockModelSpec",
    "LatentDistribution",
    "LatentPositionMatrix",
    "PointMassMixture",
    "SegmentUniform",
    "block_sizes_for",
    "block_spec_from_config",
    "gram_extrema",
    "row_stream",
    "sample_adjacency",
    "sample_iid_latent",
    "sbm_to_latent",
]
