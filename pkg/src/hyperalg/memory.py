"""Item memory: an ordered codebook with nearest-neighbor clean-up."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import MemoryLookupError, ModelError, SpaceError
from .serialize import from_dict, space_from_dict, space_to_dict, to_dict
from .spaces import Hypervector, RngStream, SpaceSpec, check_metric, draw, is_distance, similarity_matrix

# above this many candidate pairs the exhaustive factor search warns about cost
PAIR_SEARCH_WARN = 1_000_000


@dataclass(frozen=True)
class Cleanup:
    """Result of a clean-up query: winning id, its score and the full score table."""

    id: str
    score: float
    index: int
    scores: np.ndarray
    ids: tuple[str, ...]
    accepted: bool = True

    def table(self) -> list[tuple[str, float]]:
        return list(zip(self.ids, self.scores.tolist()))

    def __iter__(self):
        # allows ``id, score, table = memory.cleanup(q)``
        return iter((self.id, self.score, self.table()))


class ItemMemory:
    """Ordered (id, hypervector) codebook over a single space.

    The memory keeps its entries in one ``(N, D)`` array so clean-up is a single
    vectorized scan. When built with :meth:`from_seed` every entry is drawn
    from its own ``(seed, label/id)`` stream and can be rematerialized.
    """

    def __init__(self, space: SpaceSpec, metric: str, seed: int | None = None, label: str = "items"):
        check_metric(metric, space)
        self.space = space
        self.metric = metric
        self.seed = seed
        self.label = label
        self._ids: list[str] = []
        self._index: dict[str, int] = {}
        self._rows: list[np.ndarray] = []
        self._matrix: np.ndarray | None = None

    # ------------------------------------------------------------ construction

    @classmethod
    def for_model(cls, model, metric: str | None = None) -> "ItemMemory":
        return cls(model.space, metric or model.metric)

    @classmethod
    def from_seed(
        cls,
        space: SpaceSpec,
        ids: Iterable[str],
        seed: int,
        metric: str,
        label: str = "items",
    ) -> "ItemMemory":
        """Random atomic entries, one stream per id, reproducible from ``seed``."""
        mem = cls(space, metric, seed=seed, label=label)
        for item_id in ids:
            mem.add(item_id, Hypervector(space, draw(space, 1, mem.stream_for(item_id))[0]))
        return mem

    @classmethod
    def random(cls, model, n: int, seed: int, prefix: str = "x", label: str = "items") -> "ItemMemory":
        """``n`` random atoms of ``model`` with ids ``prefix0 .. prefix{n-1}``."""
        return cls.from_seed(model.space, [f"{prefix}{i}" for i in range(n)], seed, model.metric, label)

    def stream_for(self, item_id: str) -> RngStream:
        if self.seed is None:
            raise MemoryLookupError("memory has no seed provenance")
        return RngStream(self.seed, f"{self.label}/{item_id}")

    def get_or_materialize(self, item_id: str) -> Hypervector:
        """Return the entry, drawing and storing it from the seed if it is new."""
        if item_id in self._index:
            return self.get(item_id)
        hv = Hypervector(self.space, draw(self.space, 1, self.stream_for(item_id))[0])
        self.add(item_id, hv)
        return hv

    # ------------------------------------------------------------ access

    def add(self, item_id: str, hv: Hypervector) -> "ItemMemory":
        if not isinstance(hv, Hypervector):
            raise SpaceError("item memory stores Hypervector values")
        if hv.space != self.space:
            raise SpaceError(f"entry lives in {hv.space}, memory holds {self.space}")
        item_id = str(item_id)
        if item_id in self._index:
            raise MemoryLookupError(f"duplicate id {item_id!r}")
        self._index[item_id] = len(self._ids)
        self._ids.append(item_id)
        self._rows.append(hv.data)
        self._matrix = None
        return self

    def get(self, item_id: str) -> Hypervector:
        try:
            return Hypervector(self.space, self._rows[self._index[item_id]])
        except KeyError:
            raise MemoryLookupError(f"unknown id {item_id!r}") from None

    def __getitem__(self, item_id: str) -> Hypervector:
        return self.get(item_id)

    def __contains__(self, item_id) -> bool:
        return item_id in self._index

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self._ids)

    def index_of(self, item_id: str) -> int:
        try:
            return self._index[item_id]
        except KeyError:
            raise MemoryLookupError(f"unknown id {item_id!r}") from None

    @property
    def matrix(self) -> np.ndarray:
        """All entries stacked as an ``(N, D)`` read-only array."""
        if self._matrix is None:
            m = np.stack(self._rows) if self._rows else np.empty((0, self.space.dim))
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    # ------------------------------------------------------------ clean-up

    def scores(self, queries: np.ndarray, metric: str | None = None) -> np.ndarray:
        """Raw metric values of ``queries`` (shape ``(Q, D)``) against every entry."""
        if not self._ids:
            raise MemoryLookupError("clean-up on an empty item memory")
        return similarity_matrix(metric or self.metric, self.space, np.atleast_2d(queries), self.matrix)

    def cleanup(self, query: Hypervector, threshold: float | None = None, metric: str | None = None) -> Cleanup:
        """Nearest entry to ``query``; ties go to the earliest insertion.

        ``threshold`` is an optional caller-chosen acceptance bound: the result
        is flagged ``accepted=False`` when the best score is below it (above it
        for distance metrics).
        """
        if not isinstance(query, Hypervector) or query.space != self.space:
            raise SpaceError("query must be a Hypervector in the memory's space")
        metric = metric or self.metric
        row = self.scores(query.data[None], metric)[0]
        # argmin/argmax return the first occurrence, which is the tie rule
        best = int(np.argmin(row) if is_distance(metric) else np.argmax(row))
        score = float(row[best])
        accepted = True
        if threshold is not None:
            accepted = score <= threshold if is_distance(metric) else score >= threshold
        return Cleanup(self._ids[best], score, best, row, self.ids, accepted)

    def cleanup_many(self, queries: np.ndarray, metric: str | None = None) -> np.ndarray:
        """Winning entry index for each row of ``queries``."""
        metric = metric or self.metric
        s = self.scores(queries, metric)
        return np.argmin(s, axis=1) if is_distance(metric) else np.argmax(s, axis=1)

    # ------------------------------------------------------------ persistence

    def snapshot(self) -> list[dict]:
        return [{"id": i, "hypervector": to_dict(Hypervector(self.space, r))} for i, r in zip(self._ids, self._rows)]

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.snapshot(), **kwargs)

    @classmethod
    def from_snapshot(cls, entries: Sequence[dict], metric: str) -> "ItemMemory":
        if not entries:
            raise MemoryLookupError("snapshot has no entries; the space cannot be inferred")
        hvs = [(e["id"], from_dict(e["hypervector"])) for e in entries]
        mem = cls(hvs[0][1].space, metric)
        for item_id, hv in hvs:
            mem.add(item_id, hv)
        return mem

    @classmethod
    def from_json(cls, text: str, metric: str) -> "ItemMemory":
        return cls.from_snapshot(json.loads(text), metric)

    def seed_manifest(self) -> dict:
        """Compact description ``{seed, labels, space}`` that rebuilds the memory."""
        if self.seed is None:
            raise MemoryLookupError("memory was not built from a seed")
        return {
            "seed": self.seed,
            "label": self.label,
            "labels": list(self._ids),
            "space": space_to_dict(self.space),
            "metric": self.metric,
        }

    @classmethod
    def from_manifest(cls, manifest: dict) -> "ItemMemory":
        return cls.from_seed(
            space_from_dict(manifest["space"]),
            manifest["labels"],
            int(manifest["seed"]),
            manifest["metric"],
            manifest.get("label", "items"),
        )


def recover_factor(model, composite: Hypervector, known, memory: ItemMemory, threshold: float | None = None) -> Cleanup:
    """Unbind ``known`` from ``composite`` and clean the result up in ``memory``."""
    return memory.cleanup(model.unbind(composite, known), threshold=threshold)


def search_factor_pairs(model, composite: Hypervector, memory_a: ItemMemory, memory_b: ItemMemory, top: int = 1):
    """Exhaustive search for the pair ``(x, y)`` whose binding best matches ``composite``.

    Costs ``len(memory_a) * len(memory_b)`` bindings; a warning is issued above
    :data:`PAIR_SEARCH_WARN` candidates. Returns ``top`` tuples
    ``(id_a, id_b, score)`` sorted best first (ties by enumeration order).
    """
    n_pairs = len(memory_a) * len(memory_b)
    if n_pairs == 0:
        raise MemoryLookupError("pair search over an empty memory")
    if n_pairs > PAIR_SEARCH_WARN:
        warnings.warn(f"exhaustive factor search over {n_pairs} pairs", RuntimeWarning, stacklevel=2)
    if composite.space != model.space:
        raise SpaceError("composite is not in the model's space")
    A, B = memory_a.matrix, memory_b.matrix
    metric = model.metric
    results = []
    for i in range(len(memory_a)):
        try:
            bound = model.bind_arrays(np.broadcast_to(A[i], B.shape), B)
        except ModelError:
            raise ModelError(f"{model.name} cannot enumerate pair bindings") from None
        s = similarity_matrix(metric, model.space, composite.data[None], bound)[0]
        s = -s if is_distance(metric) else s
        results.extend((memory_a.ids[i], memory_b.ids[j], float(s[j])) for j in range(len(s)))
    order = sorted(range(len(results)), key=lambda k: (-results[k][2], k))
    out = []
    for k in order[:top]:
        a, b, s = results[k]
        out.append((a, b, -s if is_distance(metric) else s))
    return out
