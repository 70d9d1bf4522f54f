"""Matrix-based models: MBAT (matrix roles) and order-2 tensor product representations."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ..errors import ModelError, SpaceError
from ..spaces import BIPOLAR, REAL, Hypervector, RngLike, as_generator
from .base import CLIP, EUCLIDEAN, NONE, ModelAlgebra

ORTHOGONAL = "orthogonal"
BIPOLAR_MATRIX = "bipolar"
MATRIX_KINDS = (ORTHOGONAL, BIPOLAR_MATRIX)


def random_orthogonal(dim: int, rng: RngLike) -> np.ndarray:
    """Haar-distributed orthogonal matrix from the QR factorization of a Gaussian matrix."""
    g = as_generator(rng).standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    # sign fix makes the distribution uniform
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class BindingMatrix:
    """A D x D role matrix for MBAT binding."""

    matrix: np.ndarray = field(repr=False)
    kind: str = ORTHOGONAL
    provenance: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SpaceError(f"binding matrix must be square, got shape {m.shape}")
        if self.kind not in MATRIX_KINDS:
            raise ModelError(f"unknown binding matrix kind {self.kind!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def inverse(self) -> np.ndarray:
        """Transpose for orthogonal matrices, Moore-Penrose pseudo-inverse otherwise."""
        if self.kind == ORTHOGONAL:
            return self.matrix.T
        return np.linalg.pinv(self.matrix)

    def is_orthogonal(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.matrix.T @ self.matrix - np.eye(self.dim))) <= tol)


@dataclass(frozen=True)
class MBAT(ModelAlgebra):
    """Matrix Binding of Additive Terms: roles are matrices, fillers bipolar vectors.

    Bound and superposed values are real-valued and keep the bipolar space tag
    (they are not canonical bipolar vectors).
    """

    matrix_kind: str = ORTHOGONAL

    name = "mbat"
    kind = BIPOLAR
    metric = "dot"
    default_norm = NONE
    norm_modes = (NONE, EUCLIDEAN, CLIP)
    commutative = False

    def __post_init__(self):
        super().__post_init__()
        if self.matrix_kind not in MATRIX_KINDS:
            raise ModelError(f"unknown binding matrix kind {self.matrix_kind!r}")

    def config(self) -> dict:
        return {**super().config(), "matrix_kind": self.matrix_kind}

    def random_matrix(self, rng: RngLike, label: str = "") -> BindingMatrix:
        if self.matrix_kind == ORTHOGONAL:
            m = random_orthogonal(self.dim, rng)
        else:
            m = as_generator(rng).choice(np.array([-1.0, 1.0]), size=(self.dim, self.dim))
        return BindingMatrix(m, self.matrix_kind, provenance=label)

    def role_matrix(self, label: str) -> BindingMatrix:
        """Role matrix rematerialized from the model seed and a label."""
        return self.random_matrix(self.stream(f"role/{label}"), label=f"seed={self.seed}/{label}")

    def _check_matrix(self, m) -> BindingMatrix:
        if not isinstance(m, BindingMatrix):
            raise ModelError("MBAT binds a BindingMatrix with a Hypervector")
        if m.dim != self.dim:
            raise SpaceError(f"binding matrix of size {m.dim} used with D={self.dim}")
        return m

    def bind(self, m, x) -> Hypervector:
        m = self._check_matrix(m)
        self._check(x)
        return self.wrap(m.matrix @ x.data.astype(np.float64))

    def unbind(self, bound, known) -> Hypervector:
        known = self._check_matrix(known)
        self._check(bound)
        return self.wrap(known.inverse @ bound.data.astype(np.float64))

    def bind_arrays(self, x, y):
        raise ModelError("MBAT binding takes a BindingMatrix; use bind(matrix, hv)")

    def unbind_arrays(self, bound, known):
        raise ModelError("MBAT unbinding takes a BindingMatrix; use unbind(hv, matrix)")

    def superpose_arrays(self, stack, norm=None, clip_range=None):
        norm = self.default_norm if norm is None else norm
        self._check_norm(norm)
        return self.normalize_arrays(stack.astype(np.float64).sum(axis=0), norm, clip_range)


@dataclass(frozen=True, eq=False)
class Tensor2:
    """Order-2 tensor produced by TPR binding. It cannot be bound again."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.array(self.data, dtype=np.float64)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise SpaceError(f"order-2 tensor must be D x D, got shape {t.shape}")
        t.setflags(write=False)
        object.__setattr__(self, "data", t)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __add__(self, other: "Tensor2") -> "Tensor2":
        return Tensor2(self.data + other.data)


@dataclass(frozen=True)
class TPR2(ModelAlgebra):
    """Tensor Product Representations capped at order 2.

    Atoms are real unit vectors. ``bind`` gives the outer product, superposition
    adds tensors, and unbinding contracts the tensor with an unbinding vector.
    """

    name = "tpr2"
    kind = REAL
    metric = "dot"
    default_norm = NONE
    norm_modes = (NONE,)
    commutative = False

    def random_arrays(self, n: int, rng: RngLike) -> np.ndarray:
        g = as_generator(rng).standard_normal((n, self.dim))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def orthonormal_atoms(self, n: int, rng: RngLike) -> list[Hypervector]:
        """``n <= D`` exactly orthonormal atoms (rows of a random orthogonal matrix)."""
        if n > self.dim:
            raise ModelError(f"at most D={self.dim} orthonormal atoms exist, asked for {n}")
        q = random_orthogonal(self.dim, rng)
        return [self.wrap(row) for row in q[:n]]

    def bind(self, a, b) -> Tensor2:
        if isinstance(a, Tensor2) or isinstance(b, Tensor2):
            raise ModelError("TPR2 is limited to order-2 tensors; a bound tensor cannot be bound again")
        self._check(a, b)
        return Tensor2(np.outer(a.data, b.data))

    def bind_many(self, hvs):
        if len(hvs) != 2:
            raise ModelError("TPR2 binds exactly two vectors")
        return self.bind(hvs[0], hvs[1])

    def bind_arrays(self, x, y):
        return np.einsum("...i,...j->...ij", x, y)

    def unbind(self, bound, known, side: str = "left") -> Hypervector:
        """Contract ``bound`` with an unbinding vector.

        ``side="left"`` recovers the right factor of ``a (x) b`` given the
        unbinding vector of ``a``; ``side="right"`` recovers the left factor.
        """
        if not isinstance(bound, Tensor2):
            raise ModelError("TPR2 unbinding needs a Tensor2")
        self._check(known)
        if bound.dim != self.dim:
            raise SpaceError(f"tensor of size {bound.dim} used with D={self.dim}")
        if side == "left":
            return self.wrap(known.data @ bound.data)
        if side == "right":
            return self.wrap(bound.data @ known.data)
        raise ModelError(f"side must be 'left' or 'right', got {side!r}")

    def unbind_arrays(self, bound, known):
        return np.einsum("...i,...ij->...j", known, bound)

    def superpose(self, inputs, norm=None, clip_range=None):
        if len(inputs) == 0:
            raise ModelError("cannot superpose an empty list")
        if all(isinstance(t, Tensor2) for t in inputs):
            if norm not in (None, NONE):
                raise ModelError("tensor superposition supports norm 'none' only")
            return Tensor2(np.sum([t.data for t in inputs], axis=0))
        return super().superpose(inputs, norm, clip_range)

    def identity(self) -> Hypervector:
        raise ModelError("TPR2 binding changes the order of the result and has no identity")


def tpr_unbinding_vectors(atoms: Sequence[Hypervector]) -> list[Hypervector]:
    """Unbinding vectors ``u_i`` with ``u_i . a_j = delta_ij``.

    They are the rows of the (pseudo-)inverse of the matrix whose columns are
    the atoms; for an orthonormal set they equal the atoms themselves.
    """
    if not atoms:
        raise ModelError("need at least one atom")
    space = atoms[0].space
    A = np.stack([a.data.astype(np.float64) for a in atoms], axis=1)
    if A.shape[1] > A.shape[0]:
        raise ModelError("more atoms than dimensions: no exact unbinding vectors exist")
    U = np.linalg.inv(A) if A.shape[0] == A.shape[1] else np.linalg.pinv(A)
    return [Hypervector(space, row) for row in U]
