"""Hypervector spaces, seeded random streams and similarity measures.

Every hypervector carries the :class:`SpaceSpec` it lives in. Atomic vectors
drawn with :func:`random_hv` are always *canonical* (every component lies in
the space's domain). Intermediate results such as unconstrained sums keep the
tag of their space but may hold values outside it (counts for binary spaces,
arbitrary integers for bipolar ones, non-unit complex numbers for phasors).
:meth:`Hypervector.is_canonical` tells the two apart.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import MetricError, SpaceError

DENSE_BINARY = "dense-binary"
BIPOLAR = "bipolar"
REAL = "real"
PHASOR = "phasor"
SPARSE_BINARY = "sparse-binary"
BLOCK_SPARSE = "block-sparse"
MODULAR = "modular"

KINDS = (DENSE_BINARY, BIPOLAR, REAL, PHASOR, SPARSE_BINARY, BLOCK_SPARSE, MODULAR)
BINARY_KINDS = (DENSE_BINARY, SPARSE_BINARY, BLOCK_SPARSE)

TWO_PI = 2.0 * math.pi
PHASOR_TOL = 1e-9


@dataclass(frozen=True)
class SpaceSpec:
    """Kind and dimension of a hypervector space plus its kind-specific parameter."""

    kind: str
    dim: int
    density: float | None = None
    block_size: int | None = None
    r: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpaceError(f"unknown space kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise SpaceError(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        if self.kind == SPARSE_BINARY:
            if self.density is None or not 0.0 < self.density < 1.0:
                raise SpaceError(f"sparse density must lie in (0, 1), got {self.density!r}")
        if self.kind == BLOCK_SPARSE:
            if self.block_size is None or self.block_size < 1:
                raise SpaceError(f"block size must be a positive integer, got {self.block_size!r}")
            if self.dim % self.block_size:
                raise SpaceError(f"block size {self.block_size} does not divide D={self.dim}")
        if self.kind == MODULAR:
            if self.r is None or self.r < 2:
                raise SpaceError(f"modular range r must be >= 2, got {self.r!r}")

    @property
    def n_blocks(self) -> int:
        return self.dim // self.block_size

    @property
    def n_active(self) -> int:
        """Number of 1-components of a sparse atomic vector, M = round(p1 * D)."""
        if self.kind == SPARSE_BINARY:
            return int(math.floor(self.density * self.dim + 0.5))
        if self.kind == BLOCK_SPARSE:
            return self.n_blocks
        raise SpaceError(f"{self.kind} space has no fixed active count")

    def params(self) -> dict:
        if self.kind == SPARSE_BINARY:
            return {"density": self.density}
        if self.kind == BLOCK_SPARSE:
            return {"block_size": self.block_size}
        if self.kind == MODULAR:
            return {"r": self.r}
        return {}

    def with_dim(self, dim: int) -> "SpaceSpec":
        return SpaceSpec(self.kind, dim, self.density, self.block_size, self.r)


def _label_key(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by (seed, label, counter).

    Streams with the same triple always produce the same draws; different labels
    map to independent numpy ``SeedSequence`` spawn keys.
    """

    seed: int
    label: str = ""
    counter: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            entropy=int(self.seed) & (2**64 - 1),
            spawn_key=(_label_key(self.label), int(self.counter)),
        )
        return np.random.Generator(np.random.PCG64(seq))

    def derive(self, sublabel: str) -> "RngStream":
        label = f"{self.label}/{sublabel}" if self.label else str(sublabel)
        return RngStream(self.seed, label, 0)

    def advance(self, steps: int = 1) -> "RngStream":
        return RngStream(self.seed, self.label, self.counter + steps)


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _canonical_dtype(kind: str):
    if kind in BINARY_KINDS:
        return np.uint8
    if kind == BIPOLAR:
        return np.int8
    if kind == MODULAR:
        return np.int64
    if kind == PHASOR:
        return np.complex128
    return np.float64


@dataclass(frozen=True, eq=False)
class Hypervector:
    """An immutable D-dimensional vector tagged with its space.

    Phasor components are stored as unit complex numbers; :attr:`angles`
    exposes them as radians in (0, 2*pi].
    """

    space: SpaceSpec
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.data)
        if arr.ndim != 1 or arr.shape[0] != self.space.dim:
            raise SpaceError(f"expected {self.space.dim} components, got shape {arr.shape}")
        if self.space.kind == PHASOR:
            arr = arr.astype(np.complex128)
        elif arr.dtype == np.bool_:
            arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def components(self) -> np.ndarray:
        return self.data

    @property
    def angles(self) -> np.ndarray:
        if self.space.kind != PHASOR:
            raise SpaceError("angles are only defined for phasor hypervectors")
        return phasor_angles(self.data)

    def support(self) -> np.ndarray:
        """Indices of nonzero components (the 1-set for binary vectors)."""
        return np.flatnonzero(self.data)

    def is_canonical(self) -> bool:
        return in_domain(self.space, self.data)

    def equals(self, other: "Hypervector", tol: float = 0.0) -> bool:
        if not isinstance(other, Hypervector) or other.space != self.space:
            return False
        if self.space.kind == PHASOR and tol == 0.0:
            tol = PHASOR_TOL
        if tol == 0.0:
            return bool(np.array_equal(self.data, other.data))
        return bool(np.max(np.abs(self.data - other.data), initial=0.0) <= tol)

    def __len__(self) -> int:
        return self.space.dim

    def __repr__(self) -> str:
        head = np.array2string(self.data[:6], separator=", ")
        return f"Hypervector({self.space.kind}, D={self.space.dim}, {head}{'...' if self.dim > 6 else ''})"


def phasor_angles(z: np.ndarray) -> np.ndarray:
    """Angles of complex components mapped into (0, 2*pi]."""
    theta = np.mod(np.angle(z), TWO_PI)
    return np.where(theta <= 0.0, TWO_PI, theta)


def from_angles(space: SpaceSpec, angles: Iterable[float]) -> Hypervector:
    if space.kind != PHASOR:
        raise SpaceError("from_angles requires a phasor space")
    return Hypervector(space, np.exp(1j * np.asarray(angles, dtype=np.float64)))


def in_domain(space: SpaceSpec, data: np.ndarray) -> bool:
    kind = space.kind
    if kind in (DENSE_BINARY, SPARSE_BINARY):
        return bool(np.all((data == 0) | (data == 1)))
    if kind == BLOCK_SPARSE:
        if not np.all((data == 0) | (data == 1)):
            return False
        return bool(np.all(data.reshape(space.n_blocks, space.block_size).sum(axis=1) == 1))
    if kind == BIPOLAR:
        return bool(np.all((data == 1) | (data == -1)))
    if kind == REAL:
        return bool(np.all(np.isfinite(data)))
    if kind == PHASOR:
        return bool(np.all(np.abs(np.abs(data) - 1.0) <= PHASOR_TOL))
    if kind == MODULAR:
        return bool(np.all((data >= 0) & (data < space.r) & (data == np.round(data))))
    return False


def draw(space: SpaceSpec, n: int, rng: RngLike) -> np.ndarray:
    """Draw ``n`` i.i.d. atomic vectors as an ``(n, D)`` array of canonical dtype."""
    gen = as_generator(rng)
    D = space.dim
    kind = space.kind
    if kind == DENSE_BINARY:
        return gen.integers(0, 2, size=(n, D), dtype=np.uint8)
    if kind == BIPOLAR:
        return (2 * gen.integers(0, 2, size=(n, D), dtype=np.int8) - 1).astype(np.int8)
    if kind == REAL:
        return gen.normal(0.0, 1.0 / math.sqrt(D), size=(n, D))
    if kind == PHASOR:
        # uniform on (0, 2*pi]
        theta = TWO_PI * (1.0 - gen.random((n, D)))
        return np.exp(1j * theta)
    if kind == SPARSE_BINARY:
        M = space.n_active
        out = np.zeros((n, D), dtype=np.uint8)
        if M:
            idx = np.argpartition(gen.random((n, D)), M - 1, axis=1)[:, :M]
            np.put_along_axis(out, idx, 1, axis=1)
        return out
    if kind == BLOCK_SPARSE:
        B = space.block_size
        hot = gen.integers(0, B, size=(n, space.n_blocks))
        return one_hot_blocks(hot, B)
    if kind == MODULAR:
        return gen.integers(0, space.r, size=(n, D), dtype=np.int64)
    raise SpaceError(kind)


def one_hot_blocks(indices: np.ndarray, block_size: int) -> np.ndarray:
    """Expand per-block active indices of shape (..., K) into (..., K * block_size) 0/1 arrays."""
    indices = np.asarray(indices)
    out = np.zeros(indices.shape + (block_size,), dtype=np.uint8)
    np.put_along_axis(out, indices[..., None], 1, axis=-1)
    return out.reshape(indices.shape[:-1] + (indices.shape[-1] * block_size,))


def random_hv(space: SpaceSpec, rng: RngLike) -> Hypervector:
    """One random atomic hypervector of ``space``."""
    return Hypervector(space, draw(space, 1, rng)[0])


def random_hvs(space: SpaceSpec, n: int, rng: RngLike) -> list[Hypervector]:
    return [Hypervector(space, row) for row in draw(space, n, rng)]


def zeros(space: SpaceSpec) -> Hypervector:
    dtype = np.complex128 if space.kind == PHASOR else np.int64 if space.kind != REAL else np.float64
    return Hypervector(space, np.zeros(space.dim, dtype=dtype))


# ---------------------------------------------------------------- similarity

EUCLIDEAN = "euclidean"
DOT = "dot"
COSINE = "cosine"
HAMMING = "hamming"
JACCARD = "jaccard"
MCR = "mcr"
FHRR = "fhrr"

METRICS = (EUCLIDEAN, DOT, COSINE, HAMMING, JACCARD, MCR, FHRR)
DISTANCES = frozenset({EUCLIDEAN, HAMMING, MCR})

_APPLICABLE = {
    EUCLIDEAN: set(KINDS) - {MODULAR},
    DOT: set(KINDS) - {MODULAR},
    COSINE: set(KINDS),
    HAMMING: set(BINARY_KINDS),
    JACCARD: set(BINARY_KINDS),
    MCR: {MODULAR},
    FHRR: {PHASOR},
}


def is_distance(metric: str) -> bool:
    return metric in DISTANCES


def check_metric(metric: str, space: SpaceSpec) -> None:
    if metric not in _APPLICABLE:
        raise MetricError(f"unknown metric {metric!r}; expected one of {METRICS}")
    if space.kind not in _APPLICABLE[metric]:
        raise MetricError(f"metric {metric!r} is not defined on {space.kind} hypervectors")


def _as_float(x: np.ndarray) -> np.ndarray:
    return x if np.iscomplexobj(x) else x.astype(np.float64, copy=False)


def _embed_modular(x: np.ndarray, r: int) -> np.ndarray:
    return np.exp(1j * TWO_PI * np.asarray(x, dtype=np.float64) / r)


def _gram(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(Q) or np.iscomplexobj(X):
        return (Q.astype(np.complex128) @ X.astype(np.complex128).conj().T).real
    return _as_float(Q) @ _as_float(X).T


def _require_binary(x: np.ndarray, metric: str) -> None:
    if not np.all((x == 0) | (x == 1)):
        raise MetricError(f"{metric} needs 0/1 components; normalize the vector first")


def _pairwise_reduce(Q, X, fn, chunk_elems=1 << 22):
    out = np.empty((Q.shape[0], X.shape[0]), dtype=np.float64)
    step = max(1, chunk_elems // max(1, X.shape[0] * Q.shape[1]))
    for s in range(0, Q.shape[0], step):
        out[s:s + step] = fn(Q[s:s + step, None, :], X[None, :, :])
    return out


def similarity_matrix(metric: str, space: SpaceSpec, Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Metric values between every row of ``Q`` (q, D) and every row of ``X`` (n, D)."""
    check_metric(metric, space)
    Q = np.atleast_2d(Q)
    X = np.atleast_2d(X)
    if Q.shape[1] != space.dim or X.shape[1] != space.dim:
        raise SpaceError(f"dimension mismatch: {Q.shape[1]} / {X.shape[1]} vs D={space.dim}")
    D = space.dim
    if metric == DOT:
        return _gram(Q, X)
    if metric == COSINE:
        if space.kind == MODULAR:
            Q, X = _embed_modular(Q, space.r), _embed_modular(X, space.r)
        qq = np.real(np.sum(Q * np.conj(Q), axis=1)).astype(np.float64)
        xx = np.real(np.sum(X * np.conj(X), axis=1)).astype(np.float64)
        denom = np.sqrt(np.outer(qq, xx))
        if np.any(denom == 0):
            raise MetricError("cosine similarity of a zero vector is undefined")
        return _gram(Q, X) / denom
    if metric == FHRR:
        return _gram(Q, X) / D
    if metric == EUCLIDEAN:
        return _pairwise_reduce(Q, X, lambda a, b: np.sqrt(np.sum(np.abs(a - b) ** 2, axis=-1)))
    if metric in (HAMMING, JACCARD):
        _require_binary(Q, metric)
        _require_binary(X, metric)
        inter = _gram(Q, X)
        nq = Q.sum(axis=1, dtype=np.int64).astype(np.float64)
        nx = X.sum(axis=1, dtype=np.int64).astype(np.float64)
        if metric == HAMMING:
            return (nq[:, None] + nx[None, :] - 2.0 * inter) / D
        union = nq[:, None] + nx[None, :] - inter
        if np.any(union == 0):
            raise MetricError("Jaccard similarity of two all-zero vectors is undefined")
        return inter / union
    if metric == MCR:
        r = space.r

        def mcr(a, b):
            d = np.mod(a - b, r)
            return np.minimum(d, r - d).sum(axis=-1)

        return _pairwise_reduce(Q.astype(np.int64), X.astype(np.int64), mcr)
    raise MetricError(metric)


def similarity(metric: str, a: Hypervector, b: Hypervector) -> float:
    """Metric value between two hypervectors of the same space.

    Distances (euclidean, hamming, mcr) are returned as-is, so smaller means
    more similar for them.
    """
    if a.space != b.space:
        raise SpaceError(f"space mismatch: {a.space} vs {b.space}")
    return float(similarity_matrix(metric, a.space, a.data[None, :], b.data[None, :])[0, 0])


def to_score(metric: str, values):
    """Orient metric values so that larger always means more similar."""
    return -values if is_distance(metric) else values
