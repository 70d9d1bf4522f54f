"""Scalars and numeric vectors: level codebooks, fractional power encoding, composition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import ModelError, SpaceError
from ..spaces import (
    BIPOLAR,
    DENSE_BINARY,
    PHASOR,
    REAL,
    TWO_PI,
    Hypervector,
    RngLike,
    SpaceSpec,
    as_generator,
    draw,
    phasor_angles,
)

CONCATENATION = "concatenation"
FLIP = "flip"
SCHEMES = (CONCATENATION, FLIP)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def concat_prefix(dim: int, levels: int, i: int) -> int:
    """Components level ``i`` takes from the lo endpoint: round(D (L-1-i) / (L-1)), halves up."""
    n = levels - 1
    # exact integer form of floor(D (n - i) / n + 1/2)
    return (2 * dim * (n - i) + n) // (2 * n)


def flip_budget(dim: int, levels: int) -> int:
    """Positions flipped per grade, ceil(D / (2 (L-1)))."""
    n = 2 * (levels - 1)
    return -(-dim // n)


def _flip(space: SpaceSpec, x: np.ndarray) -> np.ndarray:
    if space.kind == DENSE_BINARY:
        return 1 - x
    if space.kind in (BIPOLAR, REAL, PHASOR):
        return -x
    raise SpaceError(f"flip scheme is defined for dense binary, bipolar, real and phasor spaces, not {space.kind}")


@dataclass(frozen=True, eq=False)
class LevelCodebook:
    """Ordered correlated hypervectors for quantized scalar grades on ``[lo, hi]``."""

    space: SpaceSpec
    scheme: str
    levels: np.ndarray = field(repr=False)
    lo: float = 0.0
    hi: float = 1.0
    clamp: bool = False

    def __post_init__(self):
        lv = np.array(self.levels)
        lv.setflags(write=False)
        object.__setattr__(self, "levels", lv)
        if not self.hi > self.lo:
            raise ModelError(f"value range needs hi > lo, got [{self.lo}, {self.hi}]")

    @property
    def n_levels(self) -> int:
        return self.levels.shape[0]

    def __len__(self) -> int:
        return self.n_levels

    def level(self, i: int) -> Hypervector:
        return Hypervector(self.space, self.levels[i])

    def grade(self, x: float) -> int:
        """Quantize ``x`` to a grade index (round half up)."""
        x = float(x)
        if not math.isfinite(x):
            raise ModelError(f"cannot quantize non-finite value {x}")
        if x < self.lo or x > self.hi:
            if not self.clamp:
                raise ModelError(f"value {x} outside [{self.lo}, {self.hi}] and clamping is off")
            x = min(max(x, self.lo), self.hi)
        return round_half_up((x - self.lo) / (self.hi - self.lo) * (self.n_levels - 1))

    def grades(self, xs) -> np.ndarray:
        return np.array([self.grade(x) for x in np.ravel(xs)], dtype=np.int64).reshape(np.shape(xs))

    def encode(self, x: float) -> Hypervector:
        return self.level(self.grade(x))


def build_level_codebook(
    space: SpaceSpec,
    L: int,
    scheme: str,
    rng: RngLike,
    lo: float = 0.0,
    hi: float = 1.0,
    clamp: bool = False,
) -> LevelCodebook:
    """Build ``L`` level hypervectors.

    Concatenation: level ``i`` copies its first ``concat_prefix(D, L, i)``
    components from the lo endpoint and the rest from the hi endpoint, so
    level 0 and level L-1 are the two independent endpoints.

    Flip: starting from a random level 0, each grade flips
    ``flip_budget(D, L)`` fresh positions (never flipped before), so
    distances grow with grade separation.
    """
    if L < 2:
        raise ModelError(f"a level codebook needs L >= 2, got {L}")
    if L > space.dim:
        raise ModelError(f"L={L} levels cannot be told apart in D={space.dim}")
    gen = as_generator(rng)
    D = space.dim
    if scheme == CONCATENATION:
        ends = draw(space, 2, gen)
        levels = np.empty((L, D), dtype=ends.dtype)
        for i in range(L):
            k = concat_prefix(D, L, i)
            levels[i, :k] = ends[0, :k]
            levels[i, k:] = ends[1, k:]
    elif scheme == FLIP:
        start = draw(space, 1, gen)[0]
        order = gen.permutation(D)
        F = flip_budget(D, L)
        levels = np.empty((L, D), dtype=start.dtype)
        levels[0] = start
        for i in range(1, L):
            pos = order[(i - 1) * F : i * F]
            levels[i] = levels[i - 1]
            levels[i, pos] = _flip(space, levels[i - 1, pos])
    else:
        raise ModelError(f"unknown level scheme {scheme!r}; expected one of {SCHEMES}")
    return LevelCodebook(space, scheme, levels, float(lo), float(hi), clamp)


def encode_scalar(codebook: LevelCodebook, x: float) -> Hypervector:
    return codebook.encode(x)


@dataclass(frozen=True, eq=False)
class FpeBase:
    """Base hypervector for fractional power encoding and its bandwidth.

    ``phases`` holds one angle per component for phasor spaces, and one angle
    per rfft frequency (``D // 2 + 1`` of them) for real spaces, where the DC
    and Nyquist phases are zero so every power stays real.
    """

    space: SpaceSpec
    phases: np.ndarray = field(repr=False)
    beta: float = 1.0

    def __post_init__(self):
        if self.space.kind not in (PHASOR, REAL):
            raise SpaceError("fractional power encoding needs a phasor or real space")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ModelError(f"bandwidth must be positive, got {self.beta}")
        ph = np.array(self.phases, dtype=np.float64)
        want = self.space.dim if self.space.kind == PHASOR else self.space.dim // 2 + 1
        if ph.shape != (want,):
            raise SpaceError(f"expected {want} phases, got shape {ph.shape}")
        ph.setflags(write=False)
        object.__setattr__(self, "phases", ph)

    @property
    def base(self) -> Hypervector:
        return encode_fpe(self, 1.0 / self.beta)

    def with_beta(self, beta: float) -> "FpeBase":
        return FpeBase(self.space, self.phases, beta)


def make_fpe_base(space: SpaceSpec, rng: RngLike, beta: float = 1.0) -> FpeBase:
    gen = as_generator(rng)
    if space.kind == PHASOR:
        return FpeBase(space, phasor_angles(draw(space, 1, gen)[0]), beta)
    if space.kind == REAL:
        D = space.dim
        ph = TWO_PI * (1.0 - gen.random(D // 2 + 1))
        ph[0] = 0.0
        if D % 2 == 0:
            ph[-1] = 0.0
        return FpeBase(space, ph, beta)
    raise SpaceError("fractional power encoding needs a phasor or real space")


def fpe_arrays(base: FpeBase, xs) -> np.ndarray:
    """Encodings of every value in ``xs`` as an ``(n, D)`` array."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    if not np.all(np.isfinite(xs)):
        raise ModelError("fractional power encoding needs finite values")
    theta = np.mod(base.beta * xs[:, None] * base.phases[None, :], TWO_PI)
    spec = np.exp(1j * theta)
    if base.space.kind == PHASOR:
        return spec
    return np.fft.irfft(spec, n=base.space.dim, axis=-1)


def encode_fpe(base: FpeBase, x: float) -> Hypervector:
    """``z(x) = z ** (beta * x)`` component-wise (per frequency for real spaces)."""
    return Hypervector(base.space, fpe_arrays(base, [x])[0])


def encode_fpe_2d(bx: FpeBase, by: FpeBase, x: float, y: float) -> Hypervector:
    """``z(x, y) = X ** x  bound with  Y ** y``; one product in the phase domain."""
    if bx.space != by.space:
        raise SpaceError("x and y bases must share a space")
    return Hypervector(bx.space, fpe2_arrays(bx, by, [x], [y])[0])


def fpe2_arrays(bx: FpeBase, by: FpeBase, xs, ys) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    ys = np.atleast_1d(np.asarray(ys, dtype=np.float64))
    theta = bx.beta * xs[:, None] * bx.phases[None, :] + by.beta * ys[:, None] * by.phases[None, :]
    spec = np.exp(1j * np.mod(theta, TWO_PI))
    if bx.space.kind == PHASOR:
        return spec
    return np.fft.irfft(spec, n=bx.space.dim, axis=-1)


def encode_vector_compositional(
    model,
    vec: Sequence[float],
    codebook: LevelCodebook,
    roles: Sequence[Hypervector] | str = "permutation",
    norm: str | None = None,
) -> Hypervector:
    """Superposition over components of ``bind(role_i, level(vec_i))``.

    ``roles`` is either a list of role hypervectors (one per component) or the
    string ``"permutation"``, in which case component ``i`` uses ``rho ** i``.
    """
    vec = np.asarray(vec, dtype=np.float64).ravel()
    if vec.size == 0:
        raise ModelError("cannot encode an empty vector")
    if codebook.space != model.space:
        raise SpaceError("codebook and model spaces differ")
    terms = []
    for i, x in enumerate(vec):
        v = codebook.encode(x)
        if isinstance(roles, str):
            if roles != "permutation":
                raise ModelError(f"unknown role scheme {roles!r}")
            terms.append(model.permute(v, i))
        else:
            if len(roles) != vec.size:
                raise ModelError(f"{len(roles)} roles for a {vec.size}-component vector")
            terms.append(model.bind(roles[i], v))
    return model.superpose(terms, norm=norm)
