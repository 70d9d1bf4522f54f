"""Model algebras behind one contract, plus a name-based factory."""

from __future__ import annotations

from ..errors import ModelError
from .base import NORM_MODES, ModelAlgebra
from .dense import BSC, CGR, FHRR, HRR, MAP, MCR, circular_convolve, circular_correlate, discretize_phases
from .matrix import MBAT, TPR2, BindingMatrix, Tensor2, random_orthogonal, tpr_unbinding_vectors
from .permutation import Permutation, PermutationSpec, permute
from .sparse import SBC, SBDR, block_argmax, cdt, conj_disj_bind, depth_for_density, disjunction

MODELS: dict[str, type[ModelAlgebra]] = {
    cls.name: cls for cls in (BSC, MAP, HRR, FHRR, SBDR, SBC, MCR, CGR, MBAT, TPR2)
}


def make_model(name: str, dim: int, seed: int = 0, **params) -> ModelAlgebra:
    """Build a model by (case-insensitive) name, e.g. ``make_model("map", 1024)``."""
    key = name.lower()
    if key not in MODELS:
        raise ModelError(f"unknown model {name!r}; expected one of {sorted(MODELS)}")
    try:
        return MODELS[key](dim, seed, **params)
    except TypeError as exc:
        raise ModelError(f"bad parameters for {key}: {exc}") from None


def bind(model: ModelAlgebra, a, b):
    return model.bind(a, b)


def unbind(model: ModelAlgebra, bound, known):
    return model.unbind(bound, known)


def superpose(model: ModelAlgebra, inputs, norm=None, clip_range=None):
    return model.superpose(inputs, norm=norm, clip_range=clip_range)


__all__ = [
    "MODELS",
    "NORM_MODES",
    "ModelAlgebra",
    "BSC",
    "MAP",
    "HRR",
    "FHRR",
    "MCR",
    "CGR",
    "SBDR",
    "SBC",
    "MBAT",
    "TPR2",
    "BindingMatrix",
    "Tensor2",
    "Permutation",
    "PermutationSpec",
    "make_model",
    "bind",
    "unbind",
    "superpose",
    "permute",
    "cdt",
    "conj_disj_bind",
    "disjunction",
    "depth_for_density",
    "block_argmax",
    "circular_convolve",
    "circular_correlate",
    "discretize_phases",
    "random_orthogonal",
    "tpr_unbinding_vectors",
]
