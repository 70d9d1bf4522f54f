"""Dense models: BSC, MAP, HRR, FHRR, MCR and CGR."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import ModelError
from ..spaces import (
    BIPOLAR,
    DENSE_BINARY,
    MODULAR,
    PHASOR,
    REAL,
    TWO_PI,
    Hypervector,
    SpaceSpec,
    draw,
)
from .base import (
    BINARIZE,
    CLIP,
    EUCLIDEAN,
    MAJORITY,
    MCR_DISCRETIZE,
    NONE,
    PHASOR_NORM,
    ModelAlgebra,
)

# below this dimension HRR convolution is evaluated as an explicit circulant
# product; integer inputs then give exactly integer outputs
DIRECT_CONV_MAX_DIM = 64


def _require_bits(*arrays) -> None:
    for x in arrays:
        if not np.all((x == 0) | (x == 1)):
            raise ModelError("BSC binding needs 0/1 operands; apply the majority rule first")


@dataclass(frozen=True)
class BSC(ModelAlgebra):
    """Binary Spatter Codes: XOR binding, majority-rule superposition."""

    name = "bsc"
    kind = DENSE_BINARY
    metric = "hamming"
    default_norm = MAJORITY
    norm_modes = (MAJORITY, BINARIZE, NONE)
    self_inverse = True

    @cached_property
    def tiebreak(self) -> np.ndarray:
        """Fixed random vector added to even-sized majorities."""
        return draw(self.space, 1, self.stream("tiebreak"))[0]

    def bind_arrays(self, x, y):
        _require_bits(x, y)
        return np.bitwise_xor(x.astype(np.uint8), y.astype(np.uint8))

    unbind_arrays = bind_arrays

    def superpose_arrays(self, stack, norm=None, clip_range=None):
        norm = self.default_norm if norm is None else norm
        self._check_norm(norm)
        counts = stack.sum(axis=0, dtype=np.int64)
        if norm == NONE:
            return counts
        n = stack.shape[0]
        if n % 2 == 0:
            counts = counts + self.tiebreak
            n += 1
        return (2 * counts > n).astype(np.uint8)

    def identity(self) -> Hypervector:
        return self.wrap(np.zeros(self.dim, dtype=np.uint8))


@dataclass(frozen=True)
class MAP(ModelAlgebra):
    """Multiply-Add-Permute with bipolar atoms."""

    name = "map"
    kind = BIPOLAR
    metric = "cosine"
    default_norm = NONE
    norm_modes = (NONE, EUCLIDEAN, CLIP, BINARIZE)
    self_inverse = True

    @cached_property
    def sign_mask(self) -> np.ndarray:
        """Fixed random +-1 values used where a binarized sum is exactly zero."""
        return draw(self.space, 1, self.stream("sign-ties"))[0]

    def bind_arrays(self, x, y):
        return np.multiply(x, y)

    unbind_arrays = bind_arrays

    def normalize_arrays(self, s, norm, clip_range=None):
        if norm == BINARIZE:
            return np.where(s > 0, 1, np.where(s < 0, -1, self.sign_mask)).astype(np.int8)
        return super().normalize_arrays(s, norm, clip_range)

    def superpose_arrays(self, stack, norm=None, clip_range=None):
        norm = self.default_norm if norm is None else norm
        self._check_norm(norm)
        s = stack.sum(axis=0, dtype=np.float64 if stack.dtype.kind == "f" else np.int64)
        return self.normalize_arrays(s, norm, clip_range)

    def identity(self) -> Hypervector:
        return self.wrap(np.ones(self.dim, dtype=np.int8))


def circular_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """z_j = sum_k b_k a_{(j-k) mod D} along the last axis (broadcasting)."""
    D = a.shape[-1]
    if D <= DIRECT_CONV_MAX_DIM:
        # accumulate over k in order so small cases are bit-exact with the definition
        z = b[..., :1] * a
        for k in range(1, D):
            z = z + b[..., k : k + 1] * np.roll(a, k, axis=-1)
        return z
    return np.fft.irfft(np.fft.rfft(a, axis=-1) * np.fft.rfft(b, axis=-1), n=D, axis=-1)


def circular_correlate(known: np.ndarray, bound: np.ndarray) -> np.ndarray:
    """y_j = sum_k known_k bound_{(j+k) mod D}; approximately inverts convolution by ``known``."""
    D = bound.shape[-1]
    if D <= DIRECT_CONV_MAX_DIM:
        y = known[..., :1] * bound
        for k in range(1, D):
            y = y + known[..., k : k + 1] * np.roll(bound, -k, axis=-1)
        return y
    return np.fft.irfft(np.conj(np.fft.rfft(known, axis=-1)) * np.fft.rfft(bound, axis=-1), n=D, axis=-1)


@dataclass(frozen=True)
class HRR(ModelAlgebra):
    """Holographic Reduced Representations: circular convolution binding."""

    name = "hrr"
    kind = REAL
    metric = "dot"
    default_norm = NONE
    norm_modes = (NONE, EUCLIDEAN, CLIP)
    commutative = True
    exact_unbind = False

    def bind_arrays(self, x, y):
        return circular_convolve(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))

    def unbind_arrays(self, bound, known):
        return circular_correlate(np.asarray(known, dtype=np.float64), np.asarray(bound, dtype=np.float64))

    def identity(self) -> Hypervector:
        e = np.zeros(self.dim)
        e[0] = 1.0
        return self.wrap(e)


@dataclass(frozen=True)
class FHRR(ModelAlgebra):
    """Fourier HRR: unit phasors, component-wise complex multiplication."""

    name = "fhrr"
    kind = PHASOR
    metric = "fhrr"
    default_norm = NONE
    norm_modes = (NONE, PHASOR_NORM, EUCLIDEAN)

    def bind_arrays(self, x, y):
        return np.multiply(x, y)

    def unbind_arrays(self, bound, known):
        return np.multiply(bound, np.conj(known))

    def normalize_arrays(self, s, norm, clip_range=None):
        if norm == PHASOR_NORM:
            mag = np.abs(s)
            return np.where(mag > 0, s / np.where(mag > 0, mag, 1.0), 1.0 + 0j)
        return super().normalize_arrays(s, norm, clip_range)

    def identity(self) -> Hypervector:
        return self.wrap(np.ones(self.dim, dtype=np.complex128))


def discretize_phases(s: np.ndarray, r: int) -> np.ndarray:
    """Map complex sums to the nearest of r equally spaced phases.

    Exact ties go to the numerically smaller integer; a vanishing sum maps to 0.
    """
    k = np.mod(np.angle(s), TWO_PI) * (r / TWO_PI)
    lower = np.floor(k)
    frac = k - lower
    lower_i = np.mod(lower.astype(np.int64), r)
    upper_i = np.mod(lower_i + 1, r)
    tie = np.abs(frac - 0.5) <= 1e-9
    out = np.where(frac < 0.5, lower_i, upper_i)
    out = np.where(tie, np.minimum(lower_i, upper_i), out)
    return np.where(np.abs(s) <= 1e-9, 0, out).astype(np.int64)


@dataclass(frozen=True)
class MCR(ModelAlgebra):
    """Modular Composite Representations over integers modulo r."""

    r: int = 16

    name = "mcr"
    kind = MODULAR
    metric = "mcr"
    default_norm = MCR_DISCRETIZE
    norm_modes = (MCR_DISCRETIZE,)

    @cached_property
    def space(self) -> SpaceSpec:
        return SpaceSpec(MODULAR, self.dim, r=self.r)

    def config(self) -> dict:
        return {**super().config(), "r": self.r}

    def bind_arrays(self, x, y):
        return np.mod(np.asarray(x, dtype=np.int64) + y, self.r)

    def unbind_arrays(self, bound, known):
        return np.mod(np.asarray(bound, dtype=np.int64) - known, self.r)

    def embed(self, x: np.ndarray) -> np.ndarray:
        return np.exp(1j * TWO_PI * np.asarray(x, dtype=np.float64) / self.r)

    def superpose_arrays(self, stack, norm=None, clip_range=None):
        norm = self.default_norm if norm is None else norm
        self._check_norm(norm)
        return discretize_phases(self.embed(stack).sum(axis=0), self.r)

    def identity(self) -> Hypervector:
        return self.wrap(np.zeros(self.dim, dtype=np.int64))


@dataclass(frozen=True)
class CGR(MCR):
    """Cyclic Group Representations: MCR algebra scored with cosine on the phasor embedding."""

    name = "cgr"
    metric = "cosine"


__all__ = [
    "BSC",
    "MAP",
    "HRR",
    "FHRR",
    "MCR",
    "CGR",
    "circular_convolve",
    "circular_correlate",
    "discretize_phases",
]
