"""Sparse models: SBDR (conjunction-disjunction and additive CDT) and SBC."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ..errors import DensityUnderflowWarning, ModelError, SpaceError
from ..spaces import BLOCK_SPARSE, SPARSE_BINARY, Hypervector, SpaceSpec
from .base import ARGMAX, DISJUNCTION, NONE, ModelAlgebra
from .permutation import Permutation


def _binary_stack(inputs: Sequence[Hypervector], what: str) -> np.ndarray:
    if len(inputs) == 0:
        raise ModelError(f"{what} needs at least one input")
    space = inputs[0].space
    if space.kind != SPARSE_BINARY:
        raise SpaceError(f"{what} needs sparse-binary hypervectors, got {space.kind}")
    for hv in inputs:
        if hv.space != space:
            raise SpaceError(f"{what}: space mismatch {hv.space} vs {space}")
    stack = np.stack([hv.data for hv in inputs])
    if not np.all((stack == 0) | (stack == 1)):
        raise SpaceError(f"{what} needs 0/1 components")
    return stack.astype(bool)


def thin_arrays(z: np.ndarray, perms: Sequence[Permutation]) -> np.ndarray:
    """Additive thinning: z AND (OR_k rho_k(z)) along the last axis."""
    z = np.asarray(z, dtype=bool)
    mask = np.zeros_like(z)
    for p in perms:
        mask |= p.apply(z)
    return z & mask


def cdt(inputs: Sequence[Hypervector], T: int, pool: Sequence[Permutation]) -> Hypervector:
    """Additive context-dependent thinning of sparse binary hypervectors.

    The inputs are OR-ed into ``z``; the result keeps those 1-components of
    ``z`` that are also set in at least one of ``rho_1(z) .. rho_T(z)``, with
    ``rho_k`` taken from ``pool``. It is a subset of ``z`` and grows towards
    ``z`` as ``T`` grows.
    """
    if T < 1:
        raise ModelError(f"thinning depth must be >= 1, got {T}")
    if len(pool) < T:
        raise ModelError(f"permutation pool holds {len(pool)} permutations, depth {T} needs more")
    stack = _binary_stack(inputs, "cdt")
    z = np.any(stack, axis=0)
    out = thin_arrays(z, pool[:T]).astype(np.uint8)
    if not out.any():
        warnings.warn("context-dependent thinning produced an all-zero vector", DensityUnderflowWarning, stacklevel=2)
    return Hypervector(inputs[0].space, out)


def conj_disj_bind(inputs: Sequence[Hypervector]) -> Hypervector:
    """Conjunction binding: component-wise AND of two or more sparse binary vectors."""
    if len(inputs) < 2:
        raise ModelError("conjunction binding needs at least two inputs")
    stack = _binary_stack(inputs, "conjunction")
    out = np.all(stack, axis=0).astype(np.uint8)
    if not out.any():
        warnings.warn("conjunction produced an all-zero vector", DensityUnderflowWarning, stacklevel=2)
    return Hypervector(inputs[0].space, out)


def disjunction(inputs: Sequence[Hypervector]) -> Hypervector:
    stack = _binary_stack(inputs, "disjunction")
    return Hypervector(inputs[0].space, np.any(stack, axis=0).astype(np.uint8))


def depth_for_density(z_density: float, target_density: float) -> int:
    """Smallest T whose expected thinned density reaches ``target_density``.

    For independent permutations the expected density after thinning is
    ``p * (1 - (1 - p) ** T)`` where ``p`` is the density of the disjunction.
    """
    p = z_density
    if not 0.0 < target_density < p < 1.0:
        raise ModelError("need 0 < target density < disjunction density < 1")
    return max(1, math.ceil(math.log(1.0 - target_density / p) / math.log(1.0 - p)))


@dataclass(frozen=True)
class SBDR(ModelAlgebra):
    """Sparse Binary Distributed Representations.

    ``binding`` selects ``"cdt"`` (additive context-dependent thinning with depth
    ``T``) or ``"conjunction"``. Superposition is disjunction. There is no
    unbinding; factors are recovered by similarity search because both binding
    variants keep the result similar to its inputs.
    """

    density: float = 0.01
    T: int = 4
    pool_size: int = 64
    binding: str = "cdt"

    name = "sbdr"
    kind = SPARSE_BINARY
    metric = "dot"
    default_norm = DISJUNCTION
    norm_modes = (DISJUNCTION, NONE)
    exact_unbind = False

    def __post_init__(self):
        super().__post_init__()
        if self.binding not in ("cdt", "conjunction"):
            raise ModelError(f"unknown SBDR binding {self.binding!r}")
        if self.T < 1 or self.pool_size < self.T:
            raise ModelError(f"need 1 <= T <= pool_size, got T={self.T}, pool_size={self.pool_size}")

    @cached_property
    def space(self) -> SpaceSpec:
        return SpaceSpec(SPARSE_BINARY, self.dim, density=self.density)

    def config(self) -> dict:
        return {**super().config(), "density": self.density, "T": self.T, "binding": self.binding}

    @cached_property
    def pool(self) -> tuple[Permutation, ...]:
        """Independent seeded permutations used by thinning."""
        return tuple(
            Permutation.random(self.dim, self.stream(f"cdt-pool/{k}"), label=f"cdt{k}")
            for k in range(self.pool_size)
        )

    def bind(self, a, b) -> Hypervector:
        return self.bind_many([a, b])

    def bind_many(self, hvs):
        self._check(*hvs)
        if self.binding == "conjunction":
            return conj_disj_bind(list(hvs))
        return cdt(list(hvs), self.T, self.pool)

    def bind_arrays(self, x, y):
        if self.binding == "conjunction":
            return (np.asarray(x, bool) & np.asarray(y, bool)).astype(np.uint8)
        z = np.asarray(x, bool) | np.asarray(y, bool)
        return thin_arrays(z, self.pool[: self.T]).astype(np.uint8)

    def unbind(self, bound, known):
        raise ModelError("SBDR has no unbinding; recover factors by similarity search in an item memory")

    def unbind_arrays(self, bound, known):
        raise ModelError("SBDR has no unbinding; recover factors by similarity search in an item memory")

    def superpose_arrays(self, stack, norm=None, clip_range=None):
        norm = self.default_norm if norm is None else norm
        self._check_norm(norm)
        if norm == NONE:
            return stack.sum(axis=0, dtype=np.int64)
        return np.any(stack > 0, axis=0).astype(np.uint8)

    def thin(self, hv: Hypervector, T: int | None = None) -> Hypervector:
        """CDT of a single (already superposed) vector."""
        self._check(hv)
        return cdt([hv], self.T if T is None else T, self.pool)


def block_argmax(s: np.ndarray, block_size: int) -> np.ndarray:
    """Keep one active component per block: the largest, ties to the largest position."""
    blocks = np.asarray(s).reshape(s.shape[:-1] + (-1, block_size))
    rev = blocks[..., ::-1]
    winner = block_size - 1 - np.argmax(rev, axis=-1)
    out = np.zeros(blocks.shape, dtype=np.uint8)
    np.put_along_axis(out, winner[..., None], 1, axis=-1)
    return out.reshape(s.shape)


def block_indices(x: np.ndarray, block_size: int) -> np.ndarray:
    """Active index of each block of canonical block-sparse arrays."""
    return np.argmax(np.asarray(x).reshape(x.shape[:-1] + (-1, block_size)), axis=-1)


def _block_circular(x, y, block_size, correlate=False):
    xb = np.asarray(x, dtype=np.float64).reshape(x.shape[:-1] + (-1, block_size))
    yb = np.asarray(y, dtype=np.float64).reshape(y.shape[:-1] + (-1, block_size))
    fx = np.fft.rfft(xb, axis=-1)
    if correlate:
        fx = np.conj(fx)
    z = np.fft.irfft(fx * np.fft.rfft(yb, axis=-1), n=block_size, axis=-1)
    # integer operands, so the exact result is integral
    z = np.rint(z).astype(np.int64)
    shape = np.broadcast_shapes(x.shape, y.shape)
    return z.reshape(shape)


@dataclass(frozen=True)
class SBC(ModelAlgebra):
    """Sparse Block Codes: block-wise circular convolution of one-hot blocks."""

    block_size: int = 16

    name = "sbc"
    kind = BLOCK_SPARSE
    metric = "dot"
    default_norm = NONE
    norm_modes = (NONE, ARGMAX)
    exact_unbind = True

    @cached_property
    def space(self) -> SpaceSpec:
        return SpaceSpec(BLOCK_SPARSE, self.dim, block_size=self.block_size)

    @cached_property
    def rho(self) -> Permutation:
        """Cyclic shift by one whole block, so canonical form is preserved."""
        return Permutation.cyclic(self.dim, self.block_size)

    def config(self) -> dict:
        return {**super().config(), "block_size": self.block_size}

    def _require_canonical(self, *arrays):
        B = self.block_size
        for x in arrays:
            blocks = np.asarray(x).reshape(x.shape[:-1] + (-1, B))
            if not (np.all((blocks == 0) | (blocks == 1)) and np.all(blocks.sum(axis=-1) == 1)):
                raise ModelError("SBC binding needs maximally sparse blocks; apply argmax normalization first")

    def bind_arrays(self, x, y):
        self._require_canonical(x, y)
        return _block_circular(x, y, self.block_size).astype(np.uint8)

    def unbind_arrays(self, bound, known):
        self._require_canonical(known)
        out = _block_circular(known, bound, self.block_size, correlate=True)
        return out.astype(np.uint8) if np.all((out == 0) | (out == 1)) else out

    def superpose_arrays(self, stack, norm=None, clip_range=None):
        norm = self.default_norm if norm is None else norm
        self._check_norm(norm)
        return self.normalize_arrays(stack.sum(axis=0, dtype=np.int64), norm)

    def normalize_arrays(self, s, norm, clip_range=None):
        if norm == ARGMAX:
            return block_argmax(s, self.block_size)
        return super().normalize_arrays(s, norm, clip_range)

    def identity(self) -> Hypervector:
        e = np.zeros((self.space.n_blocks, self.block_size), dtype=np.uint8)
        e[:, 0] = 1
        return self.wrap(e.reshape(-1))
