"""Trajectory vectorization, PCA, and k-means clustering.

The trajectory of each sampled vehicle becomes one row vector (all x
coordinates of the padded gate sequence, then all y coordinates). PCA is a
mean-centered covariance eigendecomposition computed with a cyclic Jacobi
rotation solver; k-means is Lloyd's algorithm with distance-weighted
(k-means++ style) seeding. Both are fully deterministic under a fixed seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .ingest import VehicleType
from .trajectory import Trajectory, pad_trajectories


@dataclass(frozen=True)
class TrajectoryMatrix:
    matrix: np.ndarray  # (n, 2L) float rows, x block then y block
    row_ids: tuple[str, ...]

    def __post_init__(self):
        if len(self.row_ids) != self.matrix.shape[0]:
            raise ValueError("row_ids must align with matrix rows")
        if len(set(self.row_ids)) != len(self.row_ids):
            raise ValueError("row_ids must be unique")


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray  # (d,)
    axes: np.ndarray  # (d, d), axes[i] is the i-th principal axis
    eigenvalues: np.ndarray  # (d,), non-increasing, non-negative


@dataclass(frozen=True)
class ScreeSummary:
    ratios: np.ndarray  # eigenvalue_i / sum of eigenvalues
    cumulative: np.ndarray
    zero_variance: bool = False


@dataclass(frozen=True)
class ClusterModel:
    k: int
    centroids: np.ndarray  # (k, d)
    assignments: np.ndarray  # (n,) cluster index per row
    inertia: float
    inertia_history: tuple[float, ...] = field(default=())


@dataclass(frozen=True)
class ClusterTypeMatrix:
    """proportions[c][t-1] = share of cluster c made up of vehicle type t."""

    proportions: np.ndarray  # (k, 7); all-zero row for an empty cluster
    cluster_sizes: tuple[int, ...]


def stratified_sample(
    trajs: list[Trajectory],
    per_stratum: int = 100,
    seed: int = 0,
) -> list[Trajectory]:
    """Sample up to per_stratum vehicles from each vehicle type.

    Undersized strata are taken whole. The result is deterministic for a
    fixed seed and independent of the input ordering.
    """
    if per_stratum <= 0:
        raise ValueError("per_stratum must be positive")
    by_type: dict[VehicleType, dict[str, Trajectory]] = {}
    for traj in trajs:
        by_type.setdefault(traj.vehicle_type, {})[traj.car_id] = traj
    rng = random.Random(seed)
    sampled = []
    for vtype in sorted(by_type):
        stratum = by_type[vtype]
        ids = sorted(stratum)
        if len(ids) > per_stratum:
            ids = sorted(rng.sample(ids, per_stratum))
        sampled.extend(stratum[car_id] for car_id in ids)
    return sampled


def vectorize(trajs: list[Trajectory]) -> TrajectoryMatrix:
    """Turn trajectories into equal-dimension rows: x block then y block.

    Sequences are padded (repeating the last gate) to the longest sampled
    trajectory, so every row has dimension 2L.
    """
    if not trajs:
        raise ValueError("cannot vectorize an empty trajectory list")
    longest = max(len(t.points) for t in trajs)
    padded = pad_trajectories(trajs, longest)
    rows = np.empty((len(trajs), 2 * longest), dtype=np.float64)
    for i, coords in enumerate(padded):
        rows[i, :longest] = [c[0] for c in coords]
        rows[i, longest:] = [c[1] for c in coords]
    return TrajectoryMatrix(rows, tuple(t.car_id for t in trajs))


def _jacobi_eigh(a: np.ndarray, tol: float = 1e-13, max_sweeps: int = 60):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors as columns), both unordered. Each
    rotation zeroes one off-diagonal pair; sweeps repeat until the
    off-diagonal mass is negligible relative to the matrix norm.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return np.array([a[0, 0]]), v
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off_sq = np.sum(a**2) - np.sum(np.diag(a) ** 2)
        if off_sq <= (tol * norm) ** 2:  # cancellation can push off_sq below 0
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e12:  # asymptotic form, avoids theta**2 overflow
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v


def pca_fit(matrix) -> PcaModel:
    """Fit PCA on row vectors via the sample-covariance eigendecomposition.

    Covariance uses the 1/(n-1) normalization. Axes are orthonormal,
    eigenvalues sorted descending, and each axis's sign is fixed so its
    first nonzero component is positive.
    """
    x = np.asarray(getattr(matrix, "matrix", matrix), dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("PCA needs a 2-D matrix with at least 2 rows")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    eigenvalues, vectors = _jacobi_eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    axes = vectors[:, order].T.copy()
    eigenvalues[np.abs(eigenvalues) < 1e-12] = 0.0
    for i in range(axes.shape[0]):
        nonzero = np.nonzero(np.abs(axes[i]) > 1e-12)[0]
        if nonzero.size and axes[i, nonzero[0]] < 0:
            axes[i] = -axes[i]
    return PcaModel(mean, axes, eigenvalues)


def pca_project(model: PcaModel, matrix, n_axes: int = 20) -> np.ndarray:
    """Center rows on the model mean and project onto the first n_axes axes."""
    x = np.asarray(getattr(matrix, "matrix", matrix), dtype=np.float64)
    if not 1 <= n_axes <= model.axes.shape[0]:
        raise ValueError(f"n_axes {n_axes} outside 1..{model.axes.shape[0]}")
    return (x - model.mean) @ model.axes[:n_axes].T


def scree(model: PcaModel) -> ScreeSummary:
    """Eigenvalue ratios and their running cumulative sum.

    All-identical input rows give zero total variance; that degenerate case
    is reported as all-zero ratios with the zero_variance flag set.
    """
    total = float(model.eigenvalues.sum())
    if total <= 0.0:
        zeros = np.zeros_like(model.eigenvalues)
        return ScreeSummary(zeros, zeros.copy(), zero_variance=True)
    ratios = model.eigenvalues / total
    return ScreeSummary(ratios, np.cumsum(ratios), zero_variance=False)


def axes_for_cumulative_variance(summary: ScreeSummary, threshold: float = 0.95) -> int:
    """Smallest axis count whose cumulative variance ratio reaches threshold."""
    if summary.zero_variance:
        return 1
    idx = int(np.searchsorted(summary.cumulative, threshold - 1e-12))
    return min(idx + 1, summary.cumulative.size)


def _squared_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _plusplus_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Distance-weighted seeding: each new centroid is drawn with
    probability proportional to its squared distance from the chosen set."""
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    centroids[0] = x[rng.integers(n)]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[j] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centroids[j]) ** 2, axis=1))
    return centroids


def kmeans_fit(
    x: np.ndarray,
    k: int = 7,
    seed: int = 0,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> ClusterModel:
    """Lloyd's k-means from a seeded k-means++ style initialization.

    Stops when the largest centroid shift drops below tol or after
    max_iters. An emptied cluster is re-seeded at the point farthest from
    its assigned centroid before the iteration's inertia is recorded, so
    the recorded inertia history is non-increasing.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if k <= 0:
        raise ValueError("k must be positive")
    if n < k:
        raise ValueError(f"{n} rows cannot support k={k} clusters")
    rng = np.random.default_rng(seed)
    centroids = _plusplus_init(x, k, rng)
    history: list[float] = []
    assign = np.zeros(n, dtype=np.intp)
    for _ in range(max_iters):
        d2 = _squared_distances(x, centroids)
        assign = np.argmin(d2, axis=1)
        own = d2[np.arange(n), assign]
        for _fix in range(k):  # bounded: duplicate-heavy data may not fill all k
            empty = [c for c in range(k) if not np.any(assign == c)]
            if not empty or own.max() <= 0.0:
                break
            far = int(np.argmax(own))
            centroids[empty[0]] = x[far]
            d2 = _squared_distances(x, centroids)
            assign = np.argmin(d2, axis=1)
            own = d2[np.arange(n), assign]
        history.append(float(own.sum()))
        new_centroids = centroids.copy()
        for c in range(k):
            members = x[assign == c]
            if members.shape[0]:
                new_centroids[c] = members.mean(axis=0)
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if shift < tol:
            break
    d2 = _squared_distances(x, centroids)
    assign = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), assign].sum())
    history.append(inertia)
    return ClusterModel(k, centroids, assign, inertia, tuple(history))


def cluster_type_proportions(model: ClusterModel, sampled: list[Trajectory]) -> ClusterTypeMatrix:
    """Share of each vehicle type within every cluster.

    Rows of `sampled` must be in the same order as the matrix the model was
    fitted on. Each non-empty cluster's row sums to 1.
    """
    if len(sampled) != model.assignments.shape[0]:
        raise ValueError("sampled trajectories must align with model assignments")
    counts = np.zeros((model.k, 7), dtype=np.float64)
    for traj, cluster in zip(sampled, model.assignments):
        counts[int(cluster), int(traj.vehicle_type) - 1] += 1
    sizes = counts.sum(axis=1)
    proportions = np.zeros_like(counts)
    nonzero = sizes > 0
    proportions[nonzero] = counts[nonzero] / sizes[nonzero, None]
    return ClusterTypeMatrix(proportions, tuple(int(s) for s in sizes))
