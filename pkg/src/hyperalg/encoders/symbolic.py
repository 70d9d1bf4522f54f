"""Sets and role-filler records."""

from __future__ import annotations

from typing import Sequence

from ..errors import ModelError
from ..models.permutation import Permutation, PermutationSpec
from ..spaces import Hypervector


def encode_set(model, members: Sequence[Hypervector], norm: str | None = None) -> Hypervector:
    """Superposition of the members; repeated members count with multiplicity."""
    if len(members) == 0:
        raise ModelError("cannot encode an empty set")
    return model.superpose(list(members), norm=norm)


def bind_role(model, role, filler):
    """Bind one filler to its role.

    ``role`` may be a hypervector (multiplicative binding), a tuple of
    hypervectors (all bound together with the filler, e.g. a three-way
    context-action-result schema), a permutation or permutation spec, an integer
    power of the model's ``rho``, or an MBAT binding matrix.
    """
    if isinstance(role, (PermutationSpec, Permutation, int)):
        return model.permute(filler, role)
    if isinstance(role, tuple):
        return model.bind_many(list(role) + [filler])
    return model.bind(role, filler)


def encode_role_filler(model, pairs, norm: str | None = None):
    """Superposition of role-filler bindings.

    Roles are expected to be mutually quasi-orthogonal (independent random
    atoms or distinct permutation powers); that is the caller's job.
    """
    if len(pairs) == 0:
        raise ModelError("a record needs at least one role-filler pair")
    return model.superpose([bind_role(model, r, f) for r, f in pairs], norm=norm)
