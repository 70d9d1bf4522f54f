"""Permutations used for positional / role binding.

A :class:`Permutation` is stored as a gather map: ``apply(x)[j] == x[index[j]]``.
So the cyclic shift by one maps ``[1, 2, 3, 4]`` to ``[4, 1, 2, 3]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import SpaceError
from ..spaces import Hypervector, RngLike, as_generator


@dataclass(frozen=True, eq=False)
class Permutation:
    index: np.ndarray = field(repr=False)
    label: str = ""
    shift: int | None = None  # set for cyclic shifts, enables O(1) powers

    def __post_init__(self):
        idx = np.array(self.index, dtype=np.int64)
        if idx.ndim != 1:
            raise SpaceError("permutation index map must be one-dimensional")
        seen = np.zeros(idx.size, dtype=bool)
        if idx.size and (idx.min() < 0 or idx.max() >= idx.size):
            raise SpaceError("permutation index out of range")
        seen[idx] = True
        if not seen.all():
            raise SpaceError("permutation index map is not a bijection")
        idx.setflags(write=False)
        object.__setattr__(self, "index", idx)
        object.__setattr__(self, "_powers", {1: self})

    @property
    def dim(self) -> int:
        return self.index.size

    @classmethod
    def identity(cls, dim: int) -> "Permutation":
        return cls(np.arange(dim), label="identity", shift=0)

    @classmethod
    def cyclic(cls, dim: int, shift: int = 1) -> "Permutation":
        shift = int(shift)
        return cls(np.mod(np.arange(dim) - shift, dim), label=f"cyclic{shift:+d}", shift=shift)

    @classmethod
    def random(cls, dim: int, rng: RngLike, label: str = "random") -> "Permutation":
        return cls(as_generator(rng).permutation(dim), label=label)

    def compose(self, other: "Permutation") -> "Permutation":
        """Permutation equivalent to applying ``other`` first, then ``self``."""
        if self.shift is not None and other.shift is not None:
            return Permutation.cyclic(self.dim, self.shift + other.shift)
        return Permutation(other.index[self.index], label=f"{self.label}*{other.label}")

    def inverse(self) -> "Permutation":
        if self.shift is not None:
            return Permutation.cyclic(self.dim, -self.shift)
        inv = np.empty_like(self.index)
        inv[self.index] = np.arange(self.dim)
        return Permutation(inv, label=f"{self.label}^-1")

    def power(self, i: int) -> "Permutation":
        i = int(i)
        if self.shift is not None:
            return Permutation.cyclic(self.dim, self.shift * i)
        cache = self._powers
        if i not in cache:
            if i == 0:
                cache[i] = Permutation.identity(self.dim)
            elif i < 0:
                cache[i] = self.power(-i).inverse()
            else:
                half = self.power(i // 2)
                p = half.compose(half)
                cache[i] = p.compose(self) if i % 2 else p
        return cache[i]

    def partial(self, fraction: float) -> "Permutation":
        """Permutation moving only a ``fraction`` of the positions.

        The moved positions are the first ``round(fraction * D)`` entries of this
        permutation's index order (a fixed schedule), rotated cyclically among
        themselves; every other position stays put. Partial permutations built
        from the same base with growing fractions are nested, so the similarity
        between ``x`` and its partially permuted copy falls off with the fraction.
        """
        if not 0.0 <= fraction <= 1.0:
            raise SpaceError(f"partial permutation fraction must lie in [0, 1], got {fraction}")
        k = int(math.floor(fraction * self.dim + 0.5))
        idx = np.arange(self.dim)
        if k >= 2:
            moved = self.index[:k]
            idx[moved] = np.roll(moved, 1)
        return Permutation(idx, label=f"{self.label}~{fraction:g}")

    def apply(self, x: np.ndarray, power: int = 1) -> np.ndarray:
        p = self if power == 1 else self.power(power)
        if p.shift is not None:
            return np.roll(x, p.shift, axis=-1)
        return np.take(x, p.index, axis=-1)

    def __call__(self, x):
        if isinstance(x, Hypervector):
            return Hypervector(x.space, self.apply(x.data))
        return self.apply(np.asarray(x))


@dataclass(frozen=True)
class PermutationSpec:
    """Which permutation to apply, how many times, and to what fraction of positions."""

    perm: Permutation
    power: int = 1
    fraction: float = 1.0

    def resolve(self) -> Permutation:
        base = self.perm if self.fraction >= 1.0 else self.perm.partial(self.fraction)
        return base.power(self.power)

    def inverse(self) -> "PermutationSpec":
        return PermutationSpec(self.perm, -self.power, self.fraction)


def permute(a: Hypervector, p: PermutationSpec | Permutation) -> Hypervector:
    """Apply a (possibly partial, possibly repeated) permutation to ``a``."""
    perm = p.resolve() if isinstance(p, PermutationSpec) else p
    if perm.dim != a.dim:
        raise SpaceError(f"permutation of size {perm.dim} applied to D={a.dim}")
    return Hypervector(a.space, perm.apply(a.data))
