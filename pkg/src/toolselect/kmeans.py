"""Plain k-means machinery: careful seeding plus Lloyd iteration.

Used both to initialize mixture-model fits and as a standalone baseline
selector. Everything is a pure function of its inputs and the seed.
"""

from __future__ import annotations

import numpy as np


def kmeans_plus_plus_init(
    points: np.ndarray, k: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Choose k starting centers, spreading them by squared distance.

    Returns (centers, chosen_indices). When all remaining squared distances
    are zero (duplicate points), falls back to a uniform draw so the
    procedure never divides by zero.
    """
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    indices = np.empty(k, dtype=np.intp)
    indices[0] = rng.integers(n)
    d2 = np.sum((points - points[indices[0]]) ** 2, axis=1)
    for i in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            candidates = np.setdiff1d(np.arange(n), indices[:i])
            indices[i] = rng.choice(candidates)
        else:
            indices[i] = rng.choice(n, p=d2 / total)
        d2 = np.minimum(d2, np.sum((points - points[indices[i]]) ** 2, axis=1))
    return points[indices].copy(), indices


def assign_to_nearest(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Index of the squared-Euclidean-nearest center for each point."""
    # ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2; the ||x||^2 term is constant per row.
    cross = points @ centers.T
    d2 = np.sum(centers**2, axis=1)[None, :] - 2.0 * cross
    return np.argmin(d2, axis=1)


def lloyd(
    points: np.ndarray,
    k: int,
    seed: int,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Standard Lloyd k-means with the seeding above.

    k is clamped to the number of points. Empty clusters keep their previous
    center. Returns (centers, labels).
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    k = min(k, n)
    rng = np.random.default_rng(seed)
    centers, _ = kmeans_plus_plus_init(points, k, rng)
    labels = assign_to_nearest(points, centers)
    for _ in range(max_iters):
        new_centers = centers.copy()
        for j in range(k):
            members = points[labels == j]
            if members.shape[0]:
                new_centers[j] = members.mean(axis=0)
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        labels = assign_to_nearest(points, centers)
        if shift < tol:
            break
    return centers, labels
