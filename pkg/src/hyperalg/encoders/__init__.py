"""Transformations from data to hypervectors."""

from .graph import RelationSchema, edge_hv, encode_graph, encode_relation
from .image import ImageEncoder, encode_image
from .projection import RpSpec, encode_vector_rp, make_rp_spec, project
from .scalar import (
    FpeBase,
    LevelCodebook,
    build_level_codebook,
    encode_fpe,
    encode_fpe_2d,
    encode_scalar,
    encode_vector_compositional,
    fpe_arrays,
    make_fpe_base,
)
from .sequence import (
    SequenceCodec,
    encode_ngram,
    encode_ngram_stats,
    encode_sequence,
    ngram_arrays,
    stack_pop,
    stack_push,
    tokenize,
)
from .symbolic import bind_role, encode_role_filler, encode_set

__all__ = [
    "RelationSchema",
    "edge_hv",
    "encode_graph",
    "encode_relation",
    "ImageEncoder",
    "encode_image",
    "RpSpec",
    "encode_vector_rp",
    "make_rp_spec",
    "project",
    "FpeBase",
    "LevelCodebook",
    "build_level_codebook",
    "encode_fpe",
    "encode_fpe_2d",
    "encode_scalar",
    "encode_vector_compositional",
    "fpe_arrays",
    "make_fpe_base",
    "SequenceCodec",
    "encode_ngram",
    "encode_ngram_stats",
    "encode_sequence",
    "ngram_arrays",
    "stack_pop",
    "stack_push",
    "tokenize",
    "bind_role",
    "encode_role_filler",
    "encode_set",
]
