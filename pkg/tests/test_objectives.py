import math
import warnings

import numpy as np
import pytest

from voreal.datasets import Dataset
from voreal.genotype import Individual, Label, random_individual
from voreal.geometry import BoundingBox, GeometryConfig, assign_points, cell_volumes_exact_2d, hull_volume
from voreal.objectives import (
    ConfusionCounts, DegenerateMetricWarning, Objective, ObjectiveSet, compactness, confusion,
    empty_volume, evaluate, metric, mult_compactness,
)

UNIT = BoundingBox([0.0, 0.0], [1.0, 1.0])


def random_data(rng, n=300, dim=2):
    return Dataset(rng.random((n, dim)), rng.integers(0, 2, n))


def oracle_terms(ind, data, box):
    """Recompute every objective from first principles."""
    parts = assign_points(data.points, ind.coords)
    vols = cell_volumes_exact_2d(ind.coords, box)
    n = ind.dim
    c = cm = ev = 0.0
    for i, part in enumerate(parts):
        if len(part) > n and vols[i] > 0:
            ratio = hull_volume(part, box) / vols[i]
            c += ratio
            cm += (len(part) - n) * ratio
        if ind.labels[i] == Label.ANOMALY:
            ev += vols[i] / (1 + 2 * math.log(len(part) + 1))
    return c, cm, ev


class TestObjectiveSet:
    def test_codes(self):
        s = ObjectiveSet.parse("a/m/t")
        assert list(s) == [Objective.ACCURACY, Objective.MULT_COMPACTNESS, Objective.EMPTY_VOLUME]
        assert s.code == "a/m/t"
        assert ObjectiveSet.parse(["accuracy", "compactness"]).code == "a/c"

    def test_rejects_empty_and_duplicates(self):
        with pytest.raises(ValueError):
            ObjectiveSet([])
        with pytest.raises(ValueError):
            ObjectiveSet.parse("a/a")


class TestConfusionAndMetrics:
    def test_all_anomaly(self):
        ind = Individual([[0.5, 0.5]], [[1, 1]], [Label.ANOMALY])
        data = Dataset(np.random.default_rng(0).random((20, 2)), np.ones(20))
        assert confusion(ind, data) == ConfusionCounts(20, 0, 0, 0)

    def test_empty_dataset(self):
        ind = Individual([[0.5, 0.5]], [[1, 1]], [Label.ANOMALY])
        with pytest.raises(ValueError):
            confusion(ind, Dataset(np.zeros((0, 2)), np.zeros(0)))

    def test_matches_loop(self, rng):
        ind = random_individual(2, 20, 20, UNIT, 1)
        data = random_data(rng)
        tp = fp = tn = fn = 0
        for x, y in zip(data.points, data.labels):
            pred = ind.labels[int(np.argmin(np.linalg.norm(ind.coords - x, axis=1)))]
            tp += pred == 1 and y == 1
            fp += pred == 1 and y == 0
            tn += pred == 0 and y == 0
            fn += pred == 0 and y == 1
        assert confusion(ind, data) == (tp, fp, tn, fn)

    def test_arithmetic(self):
        c = ConfusionCounts(tp=30, fp=10, tn=50, fn=10)
        assert metric(c, "accuracy") == pytest.approx(0.8)
        assert metric(c, "recall") == pytest.approx(0.75)
        assert metric(c, "specificity") == pytest.approx(5 / 6)

    def test_trivial_values(self):
        assert metric(ConfusionCounts(5, 0, 0, 0), "recall") == 1.0
        assert metric(ConfusionCounts(0, 5, 0, 5), "accuracy") == 0.0

    def test_zero_denominator(self):
        with pytest.warns(DegenerateMetricWarning):
            assert metric(ConfusionCounts(0, 3, 4, 0), "recall") == 0.0
        with pytest.warns(DegenerateMetricWarning):
            assert metric(ConfusionCounts(3, 0, 0, 4), "specificity") == 0.0


class TestVolumeObjectives:
    def test_sparse_cells_give_zero(self):
        ind = random_individual(2, 10, 10, UNIT, 0)
        data = Dataset(np.array([[0.1, 0.1], [0.9, 0.9]]), [0, 1])
        assert compactness(ind, data, UNIT) == 0.0
        assert mult_compactness(ind, data, UNIT) == 0.0

    def test_full_box_hull(self):
        ind = Individual([[0.5, 0.5]], [[1, 1]], [Label.NORMAL])
        data = Dataset(np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]], float), np.zeros(5))
        assert compactness(ind, data, UNIT) == pytest.approx(1.0)
        assert mult_compactness(ind, data, UNIT) == pytest.approx(3.0)

    def test_mult_multiplier_one(self):
        ind = Individual([[0.5, 0.5]], [[1, 1]], [Label.NORMAL])
        data = Dataset(np.array([[0.2, 0.2], [0.8, 0.2], [0.5, 0.9]]), np.zeros(3))
        assert mult_compactness(ind, data, UNIT) == pytest.approx(compactness(ind, data, UNIT))

    def test_empty_anomaly_cell_counts_fully(self):
        ind = Individual([[0.25, 0.5], [0.75, 0.5]], np.ones((2, 2)), [Label.ANOMALY, Label.NORMAL])
        data = Dataset(np.array([[0.9, 0.5]]), [0])
        assert empty_volume(ind, data, UNIT) == pytest.approx(0.5)

    def test_no_anomaly_sites(self, rng):
        ind = random_individual(2, 10, 10, UNIT, 0)
        ind = Individual(ind.coords, ind.sigmas, np.zeros(len(ind)))
        assert empty_volume(ind, random_data(rng), UNIT) == 0.0

    def test_ev_arithmetic(self):
        # one anomaly cell of area 0.3 holding 4 points
        ind = Individual([[0.1, 0.5], [0.5, 0.5]], np.ones((2, 2)), [Label.ANOMALY, Label.NORMAL])
        data = Dataset(np.array([[0.1, 0.1], [0.1, 0.2], [0.2, 0.3], [0.05, 0.9]]), np.zeros(4))
        expected = 0.3 / (1 + 2 * math.log(5))
        assert expected == pytest.approx(0.0711, abs=1e-4)
        assert empty_volume(ind, data, UNIT) == pytest.approx(expected, abs=1e-12)

    def test_against_oracle(self, kernels, rng):
        for k in range(10):
            ind = random_individual(2, 5, 30, UNIT, k)
            data = random_data(rng, 150)
            c, cm, ev = oracle_terms(ind, data, UNIT)
            assert compactness(ind, data, UNIT) == pytest.approx(c, abs=1e-9)
            assert mult_compactness(ind, data, UNIT) == pytest.approx(cm, abs=1e-9)
            assert empty_volume(ind, data, UNIT) == pytest.approx(ev, abs=1e-9)

    def test_relabel_invariance(self, rng):
        ind = random_individual(2, 15, 15, UNIT, 3)
        data = random_data(rng)
        flipped = Individual(ind.coords, ind.sigmas, 1 - ind.labels)
        assert compactness(ind, data, UNIT) == compactness(flipped, data, UNIT)
        assert mult_compactness(ind, data, UNIT) == mult_compactness(flipped, data, UNIT)

    def test_removing_data_raises_ev(self, rng):
        ind = random_individual(2, 15, 15, UNIT, 3)
        data = random_data(rng)
        owner = np.argmin(np.linalg.norm(data.points[:, None] - ind.coords[None], axis=2), axis=1)
        target = int(np.flatnonzero(ind.labels == Label.ANOMALY)[0])
        thinned = Dataset(data.points[owner != target], data.labels[owner != target])
        assert empty_volume(ind, thinned, UNIT) >= empty_volume(ind, data, UNIT)

    def test_bounds_and_signs(self, rng):
        for k in range(10):
            ind = random_individual(2, 5, 40, UNIT, k)
            vec = evaluate(ind, random_data(rng), "a/r/s/c/m/t", UNIT)
            assert np.all(vec[:3] >= 0) and np.all(vec[:3] <= 1)
            assert np.all(vec[3:] >= 0)
            assert vec[5] <= UNIT.volume() + 1e-12

    def test_3d_monte_carlo_path(self, rng):
        box = BoundingBox([0, 0, 0], [1, 1, 1])
        ind = random_individual(3, 4, 4, box, 1)
        data = random_data(rng, 200, 3)
        cfg = GeometryConfig(n_samples=20_000, seed=3)
        a = evaluate(ind, data, "a/c/m/t", box, cfg)
        b = evaluate(ind, data, "a/c/m/t", box, cfg)
        np.testing.assert_array_equal(a, b)
        assert a[3] <= box.volume() + 1e-12


class TestEvaluate:
    def test_accuracy_only(self, rng):
        ind = random_individual(2, 10, 10, UNIT, 0)
        data = random_data(rng)
        vec = evaluate(ind, data, ["accuracy"], UNIT)
        assert vec.shape == (1,)
        assert vec[0] == metric(confusion(ind, data), "accuracy")

    def test_order_and_cache(self, rng):
        ind = random_individual(2, 10, 10, UNIT, 0)
        data = random_data(rng)
        vec = evaluate(ind, data, "a/m/t", UNIT, stamp=7)
        assert vec.shape == (3,)
        assert vec[1] == pytest.approx(mult_compactness(ind, data, UNIT))
        assert vec[2] == pytest.approx(empty_volume(ind, data, UNIT))
        assert ind.eval_stamp == 7
        np.testing.assert_array_equal(ind.objectives, vec)
        assert ind.accuracy == vec[0]
        np.testing.assert_array_equal(evaluate(ind, data, "a/m/t", UNIT), vec)

    def test_no_warning_leak(self, rng):
        ind = random_individual(2, 10, 10, UNIT, 0)
        data = Dataset(rng.random((30, 2)), np.zeros(30))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            evaluate(ind, data, "a/r", UNIT)
