"""Graphs as superposed edge bindings, and labelled relations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import ModelError
from ..memory import ItemMemory
from ..models.sparse import cdt, disjunction
from ..spaces import Hypervector

ROLE_FILLER = "role-filler"
SBDR_CDT = "sbdr-cdt"
PERMUTATION_ROLES = "permutation-roles"
STYLES = (ROLE_FILLER, SBDR_CDT, PERMUTATION_ROLES)


def _edge(e) -> tuple[str, str, bool]:
    if len(e) == 2:
        return str(e[0]), str(e[1]), False
    if len(e) == 3:
        return str(e[0]), str(e[1]), bool(e[2])
    raise ModelError(f"an edge is (u, v) or (u, v, directed), got {e!r}")


def edge_hv(model, memory: ItemMemory, u: str, v: str, directed: bool = False) -> Hypervector:
    """``bind(u, v)`` for an undirected edge, ``bind(u, rho(v))`` for ``u -> v``."""
    if u == v:
        raise ModelError(f"self-loop on {u!r} is not supported")
    a, b = memory.get(u), memory.get(v)
    if directed:
        b = model.permute(b, 1)
    return model.bind(a, b)


def encode_graph(model, memory: ItemMemory, edges: Sequence, nodes: Sequence[str] | None = None, norm=None):
    """Superposition of edge bindings.

    Node vectors come from ``memory``; if ``nodes`` is given every edge
    endpoint must be listed in it.
    """
    if len(edges) == 0:
        raise ModelError("a graph needs at least one edge")
    known = set(nodes) if nodes is not None else None
    terms = []
    for e in edges:
        u, v, directed = _edge(e)
        if known is not None and (u not in known or v not in known):
            raise ModelError(f"edge ({u}, {v}) uses a node outside the node list")
        terms.append(edge_hv(model, memory, u, v, directed))
    return model.superpose(terms, norm=norm)


@dataclass(frozen=True)
class RelationSchema:
    """A predicate with ordered role names and an encoding style."""

    predicate: str
    roles: tuple[str, ...] = ()
    style: str = ROLE_FILLER

    def __post_init__(self):
        object.__setattr__(self, "roles", tuple(self.roles))
        if len(set(self.roles)) != len(self.roles):
            raise ModelError(f"role names of {self.predicate!r} are not unique")
        if self.style not in STYLES:
            raise ModelError(f"unknown relation style {self.style!r}; expected one of {STYLES}")

    def role_id(self, role: str) -> str:
        return f"{self.predicate}.{role}"


def encode_relation(schema: RelationSchema, arguments: Sequence[Hypervector], model, symbols: ItemMemory):
    """Encode ``predicate(arg_1, .., arg_n)``.

    Predicate and role vectors are looked up in ``symbols`` (ids
    ``predicate`` and ``predicate.role``), drawing them from the memory seed
    when absent. Arguments may themselves be relation encodings.

    * role-filler: ``< pred + <sum args> + sum bind(role_i, arg_i) >``
    * sbdr-cdt: thinning of ``pred`` together with the thinned ``role_i OR arg_i``
    * permutation-roles: ``< pred + sum args + sum rho^(i+1)(arg_i) >``

    Brackets apply the model's superposition normalization (CDT for SBDR).
    """
    args = list(arguments)
    if len(args) != len(schema.roles):
        raise ModelError(f"{schema.predicate} takes {len(schema.roles)} arguments, got {len(args)}")
    fetch = symbols.get_or_materialize if symbols.seed is not None else symbols.get
    pred = fetch(schema.predicate)
    if not args:
        return pred
    sbdr = model.name == "sbdr"
    if schema.style == SBDR_CDT and not sbdr:
        raise ModelError("the sbdr-cdt relation style needs the SBDR model")

    def bracket(parts):
        if sbdr:
            return cdt(parts, model.T, model.pool)
        return model.superpose(parts)

    if schema.style == ROLE_FILLER:
        bound = [model.bind(fetch(schema.role_id(r)), a) for r, a in zip(schema.roles, args)]
        return bracket([pred, bracket(args)] + bound)
    if schema.style == SBDR_CDT:
        pairs = [cdt([disjunction([fetch(schema.role_id(r)), a])], model.T, model.pool) for r, a in zip(schema.roles, args)]
        return cdt([pred] + pairs, model.T, model.pool)
    shifted = [model.permute(a, i + 1) for i, a in enumerate(args)]
    return bracket([pred] + args + shifted)
