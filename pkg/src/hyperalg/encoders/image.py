"""Image encodings: permutation positions, role-filler positions, and 2-D fractional powers."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import ModelError, SpaceError
from ..models.permutation import Permutation
from ..spaces import RngStream, draw
from .scalar import FLIP, FpeBase, LevelCodebook, build_level_codebook, fpe2_arrays, make_fpe_base

PERMUTATION = "permutation"
ROLE_FILLER = "role-filler"
FPE = "fpe"
MODES = (PERMUTATION, ROLE_FILLER, FPE)

UNIQUE = "unique"
CORRELATED = "correlated"


@dataclass(frozen=True, eq=False)
class ImageEncoder:
    """Encodes ``height x width`` grids as a superposition over pixels.

    Each pixel value is mapped to a hypervector by ``values`` (a level
    codebook). The position of the pixel is attached by

    * ``permutation``: ``rho_x ** x`` then ``rho_y ** y`` applied to the value,
      with two independent random permutations;
    * ``role-filler``: binding with a position vector, either a unique random
      vector per pixel or ``bind(X_x, Y_y)`` with X and Y drawn from flip-scheme
      level codebooks (nearby coordinates are similar);
    * ``fpe``: binding with ``X ** (beta x)`` bound with ``Y ** (beta y)``.
    """

    model: object
    values: LevelCodebook
    height: int
    width: int
    mode: str = PERMUTATION
    positions: str = UNIQUE
    beta: float = 1.0
    seed: int = 0
    norm: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ModelError(f"unknown image mode {self.mode!r}; expected one of {MODES}")
        if self.values is None:
            raise ModelError("an image encoder needs a value codebook")
        if self.values.space != self.model.space:
            raise SpaceError("value codebook and model spaces differ")
        if self.height < 1 or self.width < 1:
            raise ModelError("image dimensions must be positive")
        if self.positions not in (UNIQUE, CORRELATED):
            raise ModelError(f"unknown position kind {self.positions!r}")

    def _stream(self, label: str) -> RngStream:
        return RngStream(self.seed, f"image/{label}")

    @cached_property
    def perms(self) -> tuple[Permutation, Permutation]:
        D = self.model.dim
        return (
            Permutation.random(D, self._stream("rho-x"), "rho_x"),
            Permutation.random(D, self._stream("rho-y"), "rho_y"),
        )

    @cached_property
    def fpe_bases(self) -> tuple[FpeBase, FpeBase]:
        sp = self.model.space
        return make_fpe_base(sp, self._stream("fpe-x"), self.beta), make_fpe_base(sp, self._stream("fpe-y"), self.beta)

    @cached_property
    def position_arrays(self) -> np.ndarray:
        """``(height, width, D)`` position vectors for the binding modes."""
        H, W = self.height, self.width
        model = self.model
        if self.mode == FPE:
            ys, xs = np.meshgrid(np.arange(H), np.arange(W), indexing="ij")
            bx, by = self.fpe_bases
            return fpe2_arrays(bx, by, xs.ravel(), ys.ravel()).reshape(H, W, -1)
        if self.positions == UNIQUE:
            return draw(model.space, H * W, self._stream("positions")).reshape(H, W, -1)
        if min(H, W) < 2:
            raise ModelError("correlated coordinates need at least two rows and columns")
        X = build_level_codebook(model.space, W, FLIP, self._stream("coord-x")).levels
        Y = build_level_codebook(model.space, H, FLIP, self._stream("coord-y")).levels
        return model.bind_arrays(Y[:, None, :], X[None, :, :])

    def encode(self, image):
        img = np.asarray(image, dtype=np.float64)
        if img.ndim != 2:
            raise ModelError("an image must be a 2-D grid")
        if img.shape[0] > self.height or img.shape[1] > self.width:
            raise ModelError(f"image {img.shape} exceeds the configured {self.height}x{self.width} grid")
        H, W = img.shape
        grades = self.values.grades(img)
        V = self.values.levels[grades]
        model = self.model
        if self.mode == PERMUTATION:
            rx, ry = self.perms
            terms = np.stack([ry.apply(rx.apply(V[y, x], x), y) for y in range(H) for x in range(W)])
        else:
            P = self.position_arrays[:H, :W]
            terms = model.bind_arrays(P, V).reshape(H * W, -1)
        return model.wrap(model.superpose_arrays(terms, self.norm))


def encode_image(model, image, values: LevelCodebook, mode: str = PERMUTATION, **params):
    """Convenience wrapper building an :class:`ImageEncoder` sized to ``image``."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ModelError("an image must be a 2-D grid")
    enc = ImageEncoder(model, values, params.pop("height", img.shape[0]), params.pop("width", img.shape[1]), mode, **params)
    return enc.encode(img)
