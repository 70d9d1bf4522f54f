"""The common contract shared by every model algebra.

Each model works at two levels. The ``*_arrays`` methods operate on raw numpy
arrays whose last axis is the hypervector dimension (leading axes are batch
axes); the experiment code uses them directly. The public methods take and
return :class:`~hyperalg.spaces.Hypervector` values and check spaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar, Sequence

import numpy as np

from ..errors import ModelError, SpaceError
from ..spaces import (
    Hypervector,
    RngLike,
    RngStream,
    SpaceSpec,
    draw,
    similarity_matrix,
)
from .permutation import Permutation, PermutationSpec

NONE = "none"
EUCLIDEAN = "euclidean"
CLIP = "clip"
MAJORITY = "majority"
BINARIZE = "binarize"
DISJUNCTION = "disjunction"
MCR_DISCRETIZE = "mcr"
PHASOR_NORM = "phasor"
ARGMAX = "argmax"

NORM_MODES = (NONE, EUCLIDEAN, CLIP, MAJORITY, BINARIZE, DISJUNCTION, MCR_DISCRETIZE, PHASOR_NORM, ARGMAX)


@dataclass(frozen=True)
class ModelAlgebra:
    """Random generation, bind, unbind, superpose, permute and similarity for one model."""

    dim: int
    seed: int = 0

    name: ClassVar[str] = ""
    kind: ClassVar[str] = ""
    metric: ClassVar[str] = "cosine"
    default_norm: ClassVar[str] = NONE
    norm_modes: ClassVar[tuple[str, ...]] = (NONE,)
    commutative: ClassVar[bool] = True
    self_inverse: ClassVar[bool] = False
    exact_unbind: ClassVar[bool] = True

    def __post_init__(self):
        _ = self.space  # validates parameters eagerly

    @cached_property
    def space(self) -> SpaceSpec:
        return SpaceSpec(self.kind, self.dim)

    def stream(self, label: str) -> RngStream:
        """Model-owned random stream; fixes tie-break masks and permutation pools."""
        return RngStream(self.seed, f"model/{self.name}/{label}")

    @cached_property
    def rho(self) -> Permutation:
        """The model's default permutation: a cyclic shift by one component."""
        return Permutation.cyclic(self.dim, 1)

    def config(self) -> dict:
        return {"name": self.name, "dim": self.dim, "seed": self.seed}

    # ------------------------------------------------------------ checks

    def _check(self, *hvs) -> None:
        for hv in hvs:
            if not isinstance(hv, Hypervector):
                raise ModelError(f"{self.name} expects Hypervector operands, got {type(hv).__name__}")
            if hv.space != self.space:
                raise SpaceError(f"{self.name} operand lives in {hv.space}, expected {self.space}")

    def _check_norm(self, norm: str) -> None:
        if norm not in self.norm_modes:
            raise ModelError(f"{self.name} does not support norm mode {norm!r}; use one of {self.norm_modes}")

    def wrap(self, data: np.ndarray) -> Hypervector:
        return Hypervector(self.space, data)

    # ------------------------------------------------------------ arrays

    def random_arrays(self, n: int, rng: RngLike) -> np.ndarray:
        return draw(self.space, n, rng)

    def bind_arrays(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def unbind_arrays(self, bound: np.ndarray, known: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def superpose_arrays(self, stack: np.ndarray, norm: str | None = None, clip_range=None) -> np.ndarray:
        """Superpose along axis 0 of ``stack`` and apply the normalization."""
        norm = self.default_norm if norm is None else norm
        self._check_norm(norm)
        return self.normalize_arrays(stack.sum(axis=0), norm, clip_range=clip_range)

    def normalize_arrays(self, s: np.ndarray, norm: str, clip_range=None) -> np.ndarray:
        if norm == NONE:
            return s
        if norm == EUCLIDEAN:
            s = s.astype(np.complex128 if np.iscomplexobj(s) else np.float64)
            n = np.sqrt(np.sum(np.abs(s) ** 2, axis=-1, keepdims=True))
            return np.divide(s, n, out=np.zeros_like(s), where=n > 0)
        if norm == CLIP:
            if clip_range is None:
                raise ModelError("clip normalization needs clip_range=(lo, hi)")
            lo, hi = clip_range
            return np.clip(s, lo, hi)
        raise ModelError(f"{self.name} cannot apply {norm!r} to a finished sum")

    def scores(self, queries: np.ndarray, items: np.ndarray, metric: str | None = None) -> np.ndarray:
        return similarity_matrix(metric or self.metric, self.space, queries, items)

    # ------------------------------------------------------------ public API

    def random(self, rng: RngLike) -> Hypervector:
        return self.wrap(self.random_arrays(1, rng)[0])

    def identity(self) -> Hypervector:
        """Binding identity element (``bind(identity, x) == x``)."""
        raise ModelError(f"{self.name} has no binding identity")

    def bind(self, a, b) -> Hypervector:
        self._check(a, b)
        return self.wrap(self.bind_arrays(a.data, b.data))

    def bind_many(self, hvs: Sequence[Hypervector]) -> Hypervector:
        if not hvs:
            raise ModelError("bind_many needs at least one operand")
        out = hvs[0]
        for hv in hvs[1:]:
            out = self.bind(out, hv)
        return out

    def unbind(self, bound, known) -> Hypervector:
        self._check(bound, known)
        return self.wrap(self.unbind_arrays(bound.data, known.data))

    def superpose(self, inputs: Sequence[Hypervector], norm: str | None = None, clip_range=None) -> Hypervector:
        if len(inputs) == 0:
            raise ModelError("cannot superpose an empty list")
        self._check(*inputs)
        stack = np.stack([hv.data for hv in inputs])
        return self.wrap(self.superpose_arrays(stack, norm, clip_range=clip_range))

    def normalize(self, hv: Hypervector, norm: str, clip_range=None) -> Hypervector:
        """Apply a normalization to an already-summed hypervector."""
        self._check(hv)
        self._check_norm(norm)
        return self.wrap(self.normalize_arrays(hv.data, norm, clip_range=clip_range))

    def permute(self, a: Hypervector, p: PermutationSpec | Permutation | int = 1) -> Hypervector:
        """Permute ``a``; an integer ``p`` means that power of the model's ``rho``."""
        self._check(a)
        if isinstance(p, (int, np.integer)):
            return self.wrap(self.rho.apply(a.data, int(p)))
        perm = p.resolve() if isinstance(p, PermutationSpec) else p
        if perm.dim != self.dim:
            raise SpaceError(f"permutation of size {perm.dim} applied to D={self.dim}")
        return self.wrap(perm.apply(a.data))

    def similarity(self, a: Hypervector, b: Hypervector, metric: str | None = None) -> float:
        self._check(a, b)
        return float(self.scores(a.data[None], b.data[None], metric)[0, 0])

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, seed={self.seed})"
