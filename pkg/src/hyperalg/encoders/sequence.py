"""Sequences, n-grams and stacks."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from ..errors import ModelError
from ..memory import ItemMemory
from ..models.base import NONE
from ..spaces import TWO_PI, Hypervector, RngStream, draw
from .scalar import FLIP, build_level_codebook

PERMUTATION = "permutation"
ROLE = "role"
CORRELATED = "correlated"
TRAJECTORY = "trajectory"
POSITION_SCHEMES = (PERMUTATION, ROLE, CORRELATED, TRAJECTORY)

SUPERPOSE = "superpose"
BIND = "bind"
HYBRID = "hybrid"
COMPOSITIONS = (SUPERPOSE, BIND, HYBRID)

# models whose binding is not self-inverse, so powers of one position vector differ
TRAJECTORY_MODELS = ("hrr", "fhrr", "mcr", "cgr")

MULTIPLICATIVE = "multiplicative"
SUPERPOSED = "superposed"


@dataclass(frozen=True, eq=False)
class SequenceCodec:
    """How symbols are tied to positions and how the position terms are combined.

    Position schemes: ``permutation`` (position ``i`` is ``rho ** i``),
    ``role`` (independent random position vectors), ``correlated`` (position
    vectors from a flip-scheme level codebook, so nearby positions are similar)
    and ``trajectory`` (position ``i`` is the ``i``-th binding power of one
    random vector). Compositions: ``superpose`` (sum of position terms),
    ``bind`` (binding of position terms) and ``hybrid`` (bag of symbols plus
    the ordered sum).
    """

    model: object
    memory: ItemMemory
    position: str = PERMUTATION
    composition: str = SUPERPOSE
    norm: str | None = None
    seed: int = 0
    max_length: int = 256

    def __post_init__(self):
        if self.position not in POSITION_SCHEMES:
            raise ModelError(f"unknown position scheme {self.position!r}")
        if self.composition not in COMPOSITIONS:
            raise ModelError(f"unknown composition {self.composition!r}")
        if self.position == TRAJECTORY and self.model.name not in TRAJECTORY_MODELS:
            raise ModelError(f"trajectory association needs one of {TRAJECTORY_MODELS}, not {self.model.name}")
        if self.memory.space != self.model.space:
            raise ModelError("item memory and model spaces differ")

    def _stream(self, label: str) -> RngStream:
        return RngStream(self.seed, f"sequence/{label}")

    @cached_property
    def _correlated(self):
        return build_level_codebook(self.model.space, self.max_length, FLIP, self._stream("correlated"))

    @cached_property
    def _trajectory_base(self) -> np.ndarray:
        return draw(self.model.space, 1, self._stream("trajectory"))[0]

    @lru_cache(maxsize=None)
    def position_hv(self, i: int) -> Hypervector:
        """Position vector for index ``i`` (not used by the permutation scheme)."""
        model = self.model
        if i < 0:
            raise ModelError(f"negative position {i}")
        if self.position == ROLE:
            return model.wrap(draw(model.space, 1, self._stream(f"position/{i}"))[0])
        if self.position == CORRELATED:
            if i >= self.max_length:
                raise ModelError(f"position {i} beyond max_length={self.max_length}")
            return self._correlated.level(i)
        if self.position == TRAJECTORY:
            p = self._trajectory_base
            if model.name in ("mcr", "cgr"):
                return model.wrap(np.mod(i * p, model.space.r))
            if model.name == "fhrr":
                return model.wrap(np.exp(1j * np.mod(i * np.angle(p), TWO_PI)))
            return model.wrap(np.fft.irfft(np.fft.rfft(p) ** i, n=model.dim))
        raise ModelError("the permutation scheme has no position vectors")

    def term(self, i: int, x: Hypervector) -> Hypervector:
        if self.position == PERMUTATION:
            return self.model.permute(x, i)
        return self.model.bind(self.position_hv(i), x)

    def encode(self, symbols: Sequence[str]) -> Hypervector:
        if len(symbols) == 0:
            raise ModelError("cannot encode an empty sequence")
        xs = [self.memory.get(s) for s in symbols]
        terms = [self.term(i, x) for i, x in enumerate(xs)]
        if self.composition == BIND:
            return self.model.bind_many(terms)
        if self.composition == HYBRID:
            return self.model.superpose(xs + terms, norm=self.norm)
        return self.model.superpose(terms, norm=self.norm)

    def append(self, encoded: Hypervector, symbol: str, position: int) -> Hypervector:
        """Extend an encoding of ``position`` symbols by one more symbol.

        Costs one permutation (or binding) and one combination. For
        unconstrained sums the result equals encoding the longer sequence.
        """
        x = self.memory.get(symbol)
        t = self.term(position, x)
        if self.composition == BIND:
            return self.model.bind(encoded, t)
        parts = [encoded, x, t] if self.composition == HYBRID else [encoded, t]
        return self.model.superpose(parts, norm=self.norm)

    def probe(self, encoded: Hypervector, i: int) -> Hypervector:
        """Noisy copy of the symbol at position ``i`` (before clean-up)."""
        if self.composition == BIND:
            raise ModelError("bound sequences cannot be decoded position by position")
        if self.position == PERMUTATION:
            return self.model.permute(encoded, -i)
        return self.model.unbind(encoded, self.position_hv(i))

    def decode(self, encoded: Hypervector, length: int) -> list[str]:
        return [self.memory.cleanup(self.probe(encoded, i)).id for i in range(length)]


def encode_sequence(codec: SequenceCodec, symbols: Sequence[str]) -> Hypervector:
    return codec.encode(symbols)


def encode_ngram(model, memory: ItemMemory, symbols: Sequence[str], scheme: str = MULTIPLICATIVE, norm=None):
    """One n-gram: ``rho ** i`` marks position ``i``; terms are bound or superposed."""
    if len(symbols) == 0:
        raise ModelError("an n-gram needs at least one symbol")
    terms = [model.permute(memory.get(s), i) for i, s in enumerate(symbols)]
    if scheme == MULTIPLICATIVE:
        return model.bind_many(terms)
    if scheme == SUPERPOSED:
        return model.superpose(terms, norm=norm)
    raise ModelError(f"unknown n-gram scheme {scheme!r}")


def ngram_arrays(model, X: np.ndarray, n: int) -> np.ndarray:
    """Multiplicative n-gram arrays for every window of the token rows ``X``."""
    W = X.shape[0] - n + 1
    if W < 1:
        raise ModelError(f"a stream of {X.shape[0]} tokens has no {n}-grams")
    acc = X[:W]
    for i in range(1, n):
        acc = model.bind_arrays(acc, model.rho.apply(X[i : i + W], i))
    return acc


def encode_ngram_stats(model, memory: ItemMemory, tokens: Sequence[str], n: int) -> Hypervector:
    """Unconstrained sum of all sliding-window n-gram vectors of ``tokens``.

    The dot product with a single n-gram vector, divided by its self-similarity,
    estimates how often that n-gram occurs.
    """
    if n < 1:
        raise ModelError(f"n must be >= 1, got {n}")
    if len(tokens) < n:
        raise ModelError(f"a stream of {len(tokens)} tokens has no {n}-grams")
    idx = np.array([memory.index_of(t) for t in tokens])
    grams = ngram_arrays(model, memory.matrix[idx], n)
    norm = NONE if NONE in model.norm_modes else None
    return model.wrap(model.superpose_arrays(grams, norm))


def tokenize(text: str, mode: str = "char") -> list[str]:
    """Split text into symbol ids: characters, UTF-8 bytes (hex) or whitespace words."""
    if mode == "char":
        return list(text)
    if mode == "byte":
        return [f"{b:02x}" for b in text.encode("utf-8")]
    if mode == "whitespace":
        return text.split()
    raise ModelError(f"unknown tokenization {mode!r}; use char, byte or whitespace")


def _is_empty(stack) -> bool:
    return stack is None or bool(np.allclose(stack.data, 0, atol=1e-9))


def stack_push(model, stack: Hypervector | None, item: Hypervector) -> Hypervector:
    """``rho(stack) + item``; ``None`` (or a zero vector) is the empty stack."""
    if _is_empty(stack):
        model._check(item)
        return item
    return model.superpose([model.permute(stack, 1), item], norm=NONE)


def stack_pop(model, stack: Hypervector | None, memory: ItemMemory) -> tuple[str, Hypervector]:
    """Clean up the top item and return it with ``rho^-1(stack - top)``."""
    if _is_empty(stack):
        raise ModelError("pop from an empty stack")
    top = memory.cleanup(stack).id
    rest = model.wrap(stack.data - memory.get(top).data)
    return top, model.permute(rest, -1)
