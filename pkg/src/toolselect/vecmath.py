"""Dense vector primitives shared by every stage of the engine.

All accumulation happens in float64 regardless of the caller's storage
dtype; at 384 dimensions that keeps dot products and norms stable.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

# Below this norm, normalization is numerically meaningless.
ZERO_NORM_THRESHOLD = 1e-12


class ZeroVectorError(ValueError):
    """Raised when an operation requires a nonzero vector."""


class DimensionMismatchError(ValueError):
    """Raised when two vectors (or a vector and a model) disagree on dimension."""


def as_vector(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """Coerce to a 1-D float64 array without copying when already suitable."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    return arr


def l2_normalize(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return v scaled to unit Euclidean norm.

    Raises ZeroVectorError when the norm falls below ZERO_NORM_THRESHOLD.
    """
    arr = as_vector(v)
    norm = float(np.linalg.norm(arr))
    if norm <= ZERO_NORM_THRESHOLD:
        raise ZeroVectorError(f"cannot normalize a vector with norm {norm!r}")
    return arr / norm


def cosine(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity between two nonzero vectors of equal dimension.

    For unit-norm inputs this equals the dot product to within float error,
    so downstream scoring can use either interchangeably.
    """
    va = as_vector(a)
    vb = as_vector(b)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na <= ZERO_NORM_THRESHOLD or nb <= ZERO_NORM_THRESHOLD:
        raise ZeroVectorError("cosine is undefined for zero vectors")
    return float(np.dot(va, vb) / (na * nb))
