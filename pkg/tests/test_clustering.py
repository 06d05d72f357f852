import itertools
from datetime import datetime, timedelta

import numpy as np
import pytest

from parkwatch.clustering import (
    axes_for_cumulative_variance,
    cluster_type_proportions,
    kmeans_fit,
    pca_fit,
    pca_project,
    scree,
    stratified_sample,
    vectorize,
)
from parkwatch.ingest import GateKind, VehicleType
from parkwatch.trajectory import Trajectory, TrajectoryPoint


def _traj(car, vtype, coords):
    t0 = datetime(2015, 5, 1)
    points = tuple(
        TrajectoryPoint(f"g{i}", GateKind.GENERAL_GATE, (float(x), float(y)),
                        t0 + timedelta(minutes=i))
        for i, (x, y) in enumerate(coords)
    )
    return Trajectory(car, VehicleType(vtype), points)


def brute_force_inertia(points: np.ndarray, k: int) -> float:
    """Exhaustive minimum k-means objective over every k-partition."""
    n = points.shape[0]
    best = np.inf
    for assignment in itertools.product(range(k), repeat=n):
        total = 0.0
        for c in range(k):
            members = points[[i for i in range(n) if assignment[i] == c]]
            if members.size:
                centroid = members.mean(axis=0)
                total += float(((members - centroid) ** 2).sum())
        best = min(best, total)
    return best


class TestStratifiedSample:
    def _population(self, per_type):
        trajs = []
        for vtype, count in per_type.items():
            for i in range(count):
                trajs.append(_traj(f"car-{vtype}-{i}", vtype, [(i, vtype), (i + 1, vtype)]))
        return trajs

    def test_seven_full_strata_give_700(self):
        trajs = self._population({t: 120 for t in range(1, 8)})
        assert len(stratified_sample(trajs, 100, seed=1)) == 700

    def test_undersized_stratum_taken_whole(self):
        trajs = self._population({1: 40, 2: 150})
        sampled = stratified_sample(trajs, 100, seed=1)
        assert sum(1 for t in sampled if t.vehicle_type == 1) == 40
        assert sum(1 for t in sampled if t.vehicle_type == 2) == 100

    def test_same_seed_same_ids(self):
        trajs = self._population({1: 300})
        ids1 = [t.car_id for t in stratified_sample(trajs, 50, seed=9)]
        ids2 = [t.car_id for t in stratified_sample(trajs, 50, seed=9)]
        assert ids1 == ids2

    def test_input_order_irrelevant(self):
        trajs = self._population({1: 80, 3: 80})
        ids1 = [t.car_id for t in stratified_sample(trajs, 30, seed=4)]
        ids2 = [t.car_id for t in stratified_sample(list(reversed(trajs)), 30, seed=4)]
        assert ids1 == ids2


class TestVectorize:
    def test_row_layout_x_block_then_y_block(self):
        matrix = vectorize([_traj("a", 1, [(1, 2), (3, 4)])])
        assert matrix.matrix.tolist() == [[1.0, 3.0, 2.0, 4.0]]

    def test_mixed_lengths_padded_to_longest(self):
        trajs = [_traj("a", 1, [(0, 0), (1, 1)]),
                 _traj("b", 1, [(5, 5)] * 5)]
        matrix = vectorize(trajs)
        assert matrix.matrix.shape == (2, 10)
        assert matrix.matrix[0].tolist() == [0, 1, 1, 1, 1, 0, 1, 1, 1, 1]

    def test_identical_trajectories_identical_rows(self):
        trajs = [_traj(f"c{i}", 1, [(2, 3), (4, 5)]) for i in range(3)]
        matrix = vectorize(trajs)
        assert np.ptp(matrix.matrix, axis=0).max() == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            vectorize([])


class TestPca:
    def test_line_dataset_hand_eigendecomposition(self):
        # points (0,0),(1,1),(2,2): covariance [[1,1],[1,1]], eigenvalues {2,0}
        x = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        model = pca_fit(x)
        assert model.eigenvalues == pytest.approx([2.0, 0.0], abs=1e-12)
        assert model.axes[0] == pytest.approx([1 / np.sqrt(2), 1 / np.sqrt(2)], abs=1e-12)

    def test_projection_variance_equals_top_eigenvalue(self):
        x = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        model = pca_fit(x)
        projected = pca_project(model, x, 1)
        assert sorted(np.ravel(projected)) == pytest.approx([-np.sqrt(2), 0.0, np.sqrt(2)], abs=1e-12)
        assert projected.var(ddof=1) == pytest.approx(2.0, abs=1e-12)

    def test_isotropic_data_balanced_eigenvalues(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=(4000, 2))
        model = pca_fit(x)
        # numpy.linalg.eigh is the independent oracle for the same covariance
        cov = np.cov(x, rowvar=False)
        oracle = np.sort(np.linalg.eigvalsh(cov))[::-1]
        assert model.eigenvalues == pytest.approx(oracle, abs=1e-9)
        assert model.eigenvalues[0] / model.eigenvalues[1] < 1.15

    def test_trace_identity(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(15, 6)) * rng.uniform(0.5, 3.0, size=6)
        model = pca_fit(x)
        cov = np.cov(x, rowvar=False)
        assert model.eigenvalues.sum() == pytest.approx(np.trace(cov), abs=1e-9)

    def test_eigenvalues_match_oracle_on_random_matrices(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            n = int(rng.integers(3, 21))
            d = int(rng.integers(2, 9))
            x = rng.normal(size=(n, d)) * rng.uniform(0.1, 5.0)
            model = pca_fit(x)
            cov = np.cov(x, rowvar=False)
            oracle = np.sort(np.linalg.eigvalsh(cov))[::-1]
            np.testing.assert_allclose(model.eigenvalues, np.clip(oracle, 0, None), atol=1e-9)
            gram = model.axes @ model.axes.T
            np.testing.assert_allclose(gram, np.eye(d), atol=1e-9)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(40, 5))
        q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        rotated = x @ q
        np.testing.assert_allclose(pca_fit(x).eigenvalues, pca_fit(rotated).eigenvalues,
                                   atol=1e-9)

    def test_full_rank_reconstruction(self):
        rng = np.random.default_rng(19)
        x = rng.normal(size=(12, 5))
        model = pca_fit(x)
        projected = pca_project(model, x, 5)
        reconstructed = projected @ model.axes + model.mean
        np.testing.assert_allclose(reconstructed, x, atol=1e-9)

    def test_n_axes_out_of_range(self):
        x = np.random.default_rng(0).normal(size=(5, 3))
        model = pca_fit(x)
        with pytest.raises(ValueError):
            pca_project(model, x, 4)

    def test_fewer_than_two_rows_rejected(self):
        with pytest.raises(ValueError):
            pca_fit(np.array([[1.0, 2.0]]))


class TestScree:
    def test_ratios_from_eigenvalues(self):
        x = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        summary = scree(pca_fit(x))
        assert summary.ratios == pytest.approx([1.0, 0.0])

    def test_three_one_split(self):
        # two independent axes with variances 3 and 1
        rng = np.random.default_rng(2)
        n = 60000
        x = np.column_stack([rng.normal(0, np.sqrt(3), n), rng.normal(0, 1, n)])
        summary = scree(pca_fit(x))
        assert summary.ratios[0] == pytest.approx(0.75, abs=0.01)
        assert summary.cumulative[-1] == pytest.approx(1.0, abs=1e-9)

    def test_literal_three_one_eigenvalues(self):
        from parkwatch.clustering import PcaModel
        model = PcaModel(np.zeros(2), np.eye(2), np.array([3.0, 1.0]))
        summary = scree(model)
        assert summary.ratios.tolist() == [0.75, 0.25]
        assert summary.cumulative.tolist() == [0.75, 1.0]

    def test_zero_variance_flagged(self):
        x = np.ones((4, 3))
        summary = scree(pca_fit(x))
        assert summary.zero_variance
        assert summary.ratios.tolist() == [0.0, 0.0, 0.0]

    def test_axes_for_cumulative_variance(self):
        x = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        summary = scree(pca_fit(x))
        assert axes_for_cumulative_variance(summary, 0.95) == 1


class TestKmeans:
    def test_two_well_separated_pairs(self):
        x = np.array([[0.0], [1.0], [10.0], [11.0]])
        model = kmeans_fit(x, k=2, seed=0)
        assert sorted(np.ravel(model.centroids)) == [0.5, 10.5]
        assert model.inertia == 1.0
        assert model.inertia == brute_force_inertia(x, 2)

    def test_k_equals_n_zero_inertia(self):
        x = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
        model = kmeans_fit(x, k=3, seed=1)
        assert model.inertia == 0.0

    def test_k_one_centroid_is_mean(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(20, 3))
        model = kmeans_fit(x, k=1, seed=0)
        np.testing.assert_allclose(model.centroids[0], x.mean(axis=0), atol=1e-12)

    def test_inertia_history_non_increasing(self):
        rng = np.random.default_rng(8)
        for seed in range(20):
            x = rng.normal(size=(60, 4))
            model = kmeans_fit(x, k=5, seed=seed)
            diffs = np.diff(model.inertia_history)
            assert (diffs <= 1e-9).all()

    def test_fixed_point_assignments(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(50, 3))
        model = kmeans_fit(x, k=4, seed=2)
        d2 = ((x[:, None, :] - model.centroids[None]) ** 2).sum(axis=2)
        np.testing.assert_array_equal(model.assignments, d2.argmin(axis=1))
        assert model.inertia == pytest.approx(d2.min(axis=1).sum(), abs=1e-9)

    def test_seed_reproducibility(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(40, 2))
        m1 = kmeans_fit(x, k=3, seed=7)
        m2 = kmeans_fit(x, k=3, seed=7)
        np.testing.assert_array_equal(m1.assignments, m2.assignments)
        np.testing.assert_array_equal(m1.centroids, m2.centroids)

    def test_rows_below_k_rejected(self):
        with pytest.raises(ValueError):
            kmeans_fit(np.zeros((2, 2)), k=3)

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            kmeans_fit(np.zeros((4, 2)), k=0)


class TestClusterTypeProportions:
    def test_pure_ranger_cluster(self):
        trajs = [_traj("r1", 7, [(0, 0)]), _traj("r2", 7, [(0, 1)]),
                 _traj("c1", 1, [(50, 50)])]
        x = np.array([[0.0, 0.0], [0.0, 1.0], [50.0, 50.0]])
        model = kmeans_fit(x, k=2, seed=0)
        proportions = cluster_type_proportions(model, trajs)
        ranger_cluster = model.assignments[0]
        assert proportions.proportions[ranger_cluster, 6] == 1.0

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(21)
        trajs = [_traj(f"c{i}", int(rng.integers(1, 8)), [(i, 0), (i, 1)])
                 for i in range(30)]
        matrix = vectorize(trajs)
        model = kmeans_fit(matrix.matrix, k=4, seed=3)
        proportions = cluster_type_proportions(model, trajs)
        sums = proportions.proportions.sum(axis=1)
        for c, size in enumerate(proportions.cluster_sizes):
            if size:
                assert sums[c] == pytest.approx(1.0, abs=1e-9)
            else:
                assert sums[c] == 0.0

    def test_label_permutation_preserves_rows(self):
        trajs = [_traj("a", 1, [(0, 0)]), _traj("b", 2, [(10, 0)]),
                 _traj("c", 3, [(0, 10)])]
        x = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
        m1 = kmeans_fit(x, k=3, seed=0)
        m2 = kmeans_fit(x, k=3, seed=5)
        p1 = cluster_type_proportions(m1, trajs).proportions
        p2 = cluster_type_proportions(m2, trajs).proportions
        assert sorted(map(tuple, p1.tolist())) == sorted(map(tuple, p2.tolist()))
