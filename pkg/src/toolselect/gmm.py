"""Diagonal-covariance Gaussian mixtures fit by expectation-maximization.

Cluster relevance to a query is judged by the bare per-component density
N(q | mu_k, Sigma_k), without the mixing weight. At 384 dimensions raw
densities overflow or underflow float range, so every evaluation stays in
log space; log densities preserve the same ordering.

Covariances are diagonal with a variance floor: with a few hundred points
in hundreds of dimensions a full covariance is singular, and the floor
keeps single-point clusters well-posed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .kmeans import assign_to_nearest, kmeans_plus_plus_init
from .vecmath import DimensionMismatchError

LOG_2PI = math.log(2.0 * math.pi)


class GmmFitError(RuntimeError):
    """EM could not proceed (degenerate responsibilities)."""


@dataclass(frozen=True)
class FitConfig:
    """EM hyperparameters. tol is a relative log-likelihood change."""

    max_iters: int = 100
    tol: float = 1e-4
    var_floor: float = 1e-6
    seed: int = 0
    n_init: int = 1

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.var_floor <= 0:
            raise ValueError("var_floor must be > 0")
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")


@dataclass(frozen=True)
class GaussianComponent:
    mean: np.ndarray
    variances: np.ndarray
    log_weight: float


@dataclass(frozen=True)
class GmmModel:
    """A fitted mixture plus the hard assignment of each fitted point."""

    components: tuple[GaussianComponent, ...]
    dimension: int
    assignments: np.ndarray
    final_log_likelihood: float
    log_likelihood_history: tuple[float, ...] = field(default=())

    @property
    def k(self) -> int:
        return len(self.components)

    def means(self) -> np.ndarray:
        return np.stack([c.mean for c in self.components])

    def variances(self) -> np.ndarray:
        return np.stack([c.variances for c in self.components])

    def log_weights(self) -> np.ndarray:
        return np.array([c.log_weight for c in self.components])


def component_count(n_points: int) -> int:
    """Cluster-count heuristic: ceil(sqrt(n)), clamped to [1, n].

    The square root balances cluster granularity against per-cluster
    support.
    """
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    return max(1, min(n_points, math.isqrt(n_points - 1) + 1))


def _log_density_matrix(
    points: np.ndarray, means: np.ndarray, variances: np.ndarray
) -> np.ndarray:
    """log N(x_i | mu_k, diag(var_k)) for all points and components, shape (n, K)."""
    n, d = points.shape
    k = means.shape[0]
    out = np.empty((n, k))
    log_det = np.sum(np.log(variances), axis=1)
    inv_var = 1.0 / variances
    for j in range(k):
        diff = points - means[j]
        quad = np.einsum("nd,d,nd->n", diff, inv_var[j], diff)
        out[:, j] = -0.5 * (d * LOG_2PI + log_det[j] + quad)
    return out


def _closed_form_single(points: np.ndarray, var_floor: float) -> tuple:
    mean = points.mean(axis=0)
    variances = np.maximum(points.var(axis=0), var_floor)
    return mean[None, :], variances[None, :], np.array([0.0])


def _init_params(
    points: np.ndarray, k: int, rng: np.random.Generator, var_floor: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seed means via k-means++ plus one assignment pass; moments per cluster."""
    n, d = points.shape
    seeds, seed_idx = kmeans_plus_plus_init(points, k, rng)
    labels = assign_to_nearest(points, seeds)
    # Every seed anchors its own cluster so no component starts empty.
    labels[seed_idx] = np.arange(k)
    means = np.empty((k, d))
    variances = np.empty((k, d))
    counts = np.empty(k)
    for j in range(k):
        members = points[labels == j]
        counts[j] = members.shape[0]
        means[j] = members.mean(axis=0)
        variances[j] = np.maximum(members.var(axis=0), var_floor)
    log_weights = np.log(counts / n)
    return means, variances, log_weights


def _fit_once(
    points: np.ndarray, k: int, rng: np.random.Generator, cfg: FitConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, list[float]]:
    n = points.shape[0]
    means, variances, log_weights = _init_params(points, k, rng, cfg.var_floor)
    history: list[float] = []
    resp = None
    prev_ll = None
    for _ in range(cfg.max_iters):
        resp, ll = _e_step(points, means, variances, log_weights)
        history.append(ll)
        if prev_ll is not None and abs(ll - prev_ll) / (abs(ll) + 1e-10) < cfg.tol:
            break
        prev_ll = ll
        means, variances, log_weights = _m_step(
            points, resp, means, variances, cfg.var_floor
        )
    else:
        # max_iters M-steps done; evaluate the final parameters once more so
        # the reported likelihood and assignments match what is returned.
        resp, ll = _e_step(points, means, variances, log_weights)
        history.append(ll)
    assignments = np.argmax(resp, axis=1)
    return means, variances, log_weights, assignments, history


def _e_step(points, means, variances, log_weights):
    log_joint = _log_density_matrix(points, means, variances) + log_weights[None, :]
    per_point = logsumexp(log_joint, axis=1)
    if not np.all(np.isfinite(per_point)):
        raise GmmFitError(
            "a point has zero responsibility under every component; "
            "the variance floor is too small for this data"
        )
    resp = np.exp(log_joint - per_point[:, None])
    sums = resp.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        raise GmmFitError("responsibilities failed to normalize")
    return resp, float(per_point.sum())


def _m_step(points, resp, means, variances, var_floor):
    n = points.shape[0]
    nk = resp.sum(axis=0)
    new_means = means.copy()
    new_vars = variances.copy()
    for j in range(means.shape[0]):
        if nk[j] <= 1e-12 * n:
            continue  # starved component: weight shrinks, moments stay put
        mu = (resp[:, j] @ points) / nk[j]
        diff = points - mu
        var = (resp[:, j] @ (diff**2)) / nk[j]
        new_means[j] = mu
        new_vars[j] = np.maximum(var, var_floor)
    with np.errstate(divide="ignore"):
        log_weights = np.log(nk / n)
    return new_means, new_vars, log_weights


def fit_gmm(
    points: Sequence[np.ndarray] | np.ndarray, k: int, cfg: FitConfig
) -> GmmModel:
    """Fit a k-component diagonal GMM; deterministic for a given cfg.seed.

    Requires k <= number of points (callers clamp first). A single point
    yields one component centered on it with floor variances; k == 1 uses
    the closed-form moments directly.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a non-empty (n, d) array")
    n, d = pts.shape
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k} (clamp before fitting)")

    if k == 1:
        means, variances, log_weights = _closed_form_single(pts, cfg.var_floor)
        _, ll = _e_step(pts, means, variances, log_weights)
        return _build_model(
            means, variances, log_weights, np.zeros(n, dtype=np.intp), [ll], d
        )

    best = None
    for child_seed in np.random.SeedSequence(cfg.seed).spawn(cfg.n_init):
        rng = np.random.default_rng(child_seed)
        result = _fit_once(pts, k, rng, cfg)
        if best is None or result[4][-1] > best[4][-1]:
            best = result
    means, variances, log_weights, assignments, history = best
    return _build_model(means, variances, log_weights, assignments, history, d)


def _build_model(means, variances, log_weights, assignments, history, dimension):
    components = tuple(
        GaussianComponent(
            mean=means[j].copy(),
            variances=variances[j].copy(),
            log_weight=float(log_weights[j]),
        )
        for j in range(means.shape[0])
    )
    return GmmModel(
        components=components,
        dimension=dimension,
        assignments=np.asarray(assignments, dtype=np.intp),
        final_log_likelihood=float(history[-1]),
        log_likelihood_history=tuple(float(x) for x in history),
    )


def component_log_density(model: GmmModel, k: int, q: np.ndarray) -> float:
    """log N(q | mu_k, diag(var_k)) in nats, mixing weight excluded.

    The query's relevance to a cluster is the cluster's own density at the
    query, so weights play no part here.
    """
    if not 0 <= k < model.k:
        raise IndexError(f"component index {k} out of range [0, {model.k})")
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (model.dimension,):
        raise DimensionMismatchError(
            f"query has shape {q.shape}, model dimension is {model.dimension}"
        )
    comp = model.components[k]
    diff = q - comp.mean
    return float(
        -0.5
        * (
            model.dimension * LOG_2PI
            + np.sum(np.log(comp.variances))
            + np.sum(diff**2 / comp.variances)
        )
    )


def rank_components(model: GmmModel, q: np.ndarray) -> list[int]:
    """Component indices sorted by log density at q, descending; ties by index."""
    scores = [component_log_density(model, j, q) for j in range(model.k)]
    return sorted(range(model.k), key=lambda j: (-scores[j], j))


def model_to_dict(model: GmmModel) -> dict:
    """JSON-friendly dump used for debugging and test fixtures."""
    return {
        "k": model.k,
        "dimension": model.dimension,
        "components": [
            {
                "mean": [float(x) for x in c.mean],
                "variances": [float(x) for x in c.variances],
                "weight": float(math.exp(c.log_weight)),
            }
            for c in model.components
        ],
    }


def model_from_dict(doc: dict) -> GmmModel:
    components = tuple(
        GaussianComponent(
            mean=np.asarray(c["mean"], dtype=np.float64),
            variances=np.asarray(c["variances"], dtype=np.float64),
            log_weight=float(np.log(c["weight"])) if c["weight"] > 0 else -np.inf,
        )
        for c in doc["components"]
    )
    return GmmModel(
        components=components,
        dimension=int(doc["dimension"]),
        assignments=np.zeros(0, dtype=np.intp),
        final_log_likelihood=float("nan"),
    )
