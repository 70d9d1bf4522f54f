"""Random projection encoding, z = sum_i lambda_i R_i x, with optional thresholding."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ModelError, SpaceError
from ..spaces import DENSE_BINARY, REAL, Hypervector, RngLike, SpaceSpec, as_generator

GAUSSIAN = "gaussian"
BIPOLAR = "bipolar"
TERNARY = "ternary"
ENTRY_KINDS = (GAUSSIAN, BIPOLAR, TERNARY)

POST_NONE = "none"
BINARIZE = "binarize"
TERNARIZE = "ternarize"


@dataclass(frozen=True, eq=False)
class RpSpec:
    """Projection matrices, their weights and the output post-processing.

    ``binarize`` maps ``z > threshold`` to 1 (else 0) in a dense binary
    space; ``ternarize`` maps values below ``thresholds[0]`` to -1, above
    ``thresholds[1]`` to +1 and the rest to 0 (kept as a real vector).
    """

    matrices: tuple = field(repr=False)
    kinds: tuple[str, ...] = (GAUSSIAN,)
    weights: tuple[float, ...] = (1.0,)
    post: str = POST_NONE
    threshold: float = 0.0
    thresholds: tuple[float, float] = (-0.5, 0.5)

    def __post_init__(self):
        mats = tuple(np.array(m, dtype=np.float64) for m in self.matrices)
        if not mats:
            raise ModelError("an RP spec needs at least one matrix")
        shape = mats[0].shape
        if len(shape) != 2 or any(m.shape != shape for m in mats):
            raise SpaceError("all projection matrices must be 2-D with one shared shape")
        if len(self.kinds) != len(mats) or len(self.weights) != len(mats):
            raise ModelError("kinds and weights need one entry per matrix")
        if not np.all(np.isfinite(self.weights)):
            raise ModelError("projection weights must be finite")
        if self.post not in (POST_NONE, BINARIZE, TERNARIZE):
            raise ModelError(f"unknown post-processing {self.post!r}")
        for m in mats:
            m.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def out_dim(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def in_dim(self) -> int:
        return self.matrices[0].shape[1]

    @property
    def space(self) -> SpaceSpec:
        return SpaceSpec(DENSE_BINARY if self.post == BINARIZE else REAL, self.out_dim)


def random_matrix(kind: str, out_dim: int, in_dim: int, rng: RngLike, density: float = 0.1) -> np.ndarray:
    gen = as_generator(rng)
    if kind == GAUSSIAN:
        return gen.standard_normal((out_dim, in_dim))
    if kind == BIPOLAR:
        return gen.choice(np.array([-1.0, 1.0]), size=(out_dim, in_dim))
    if kind == TERNARY:
        if not 0.0 < density <= 1.0:
            raise ModelError(f"ternary density must lie in (0, 1], got {density}")
        u = gen.random((out_dim, in_dim))
        return np.where(u < density / 2, -1.0, np.where(u < density, 1.0, 0.0))
    raise ModelError(f"unknown matrix kind {kind!r}; expected one of {ENTRY_KINDS}")


def make_rp_spec(
    in_dim: int,
    out_dim: int,
    rng: RngLike,
    kinds: Sequence[str] = (GAUSSIAN,),
    weights: Sequence[float] | None = None,
    density: float = 0.1,
    post: str = POST_NONE,
    threshold: float = 0.0,
    thresholds: tuple[float, float] = (-0.5, 0.5),
) -> RpSpec:
    gen = as_generator(rng)
    kinds = tuple(kinds)
    mats = tuple(random_matrix(k, out_dim, in_dim, gen, density) for k in kinds)
    w = tuple(float(x) for x in (weights if weights is not None else [1.0] * len(kinds)))
    return RpSpec(mats, kinds, w, post, threshold, tuple(thresholds))


def project(vecs: np.ndarray, spec: RpSpec) -> np.ndarray:
    """Weighted projections of the rows of ``vecs`` before post-processing."""
    X = np.atleast_2d(np.asarray(vecs, dtype=np.float64))
    if X.shape[-1] != spec.in_dim:
        raise SpaceError(f"input of length {X.shape[-1]} for a projection from {spec.in_dim} dims")
    z = np.zeros((X.shape[0], spec.out_dim))
    for lam, R in zip(spec.weights, spec.matrices):
        z += lam * (X @ R.T)
    return z


def postprocess(z: np.ndarray, spec: RpSpec) -> np.ndarray:
    if spec.post == BINARIZE:
        return (z > spec.threshold).astype(np.uint8)
    if spec.post == TERNARIZE:
        lo, hi = spec.thresholds
        return np.where(z < lo, -1.0, np.where(z > hi, 1.0, 0.0))
    return z


def encode_vector_rp(vec: Sequence[float], spec: RpSpec) -> Hypervector:
    v = np.asarray(vec, dtype=np.float64)
    if v.ndim != 1:
        raise SpaceError("encode_vector_rp takes a single 1-D vector")
    return Hypervector(spec.space, postprocess(project(v, spec), spec)[0])
