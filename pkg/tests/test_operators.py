from collections import Counter

import numpy as np
import pytest

from voreal.genotype import Individual, random_individual
from voreal.geometry import BoundingBox
from voreal.operators import (
    MutationParams, crossover_voronoi, geometric_crossover, mutate_voronoi, random_hyperplane,
    repair_size, self_adaptive_mutate_coord, split_individual,
)

BOX = BoundingBox([0.0, 0.0], [1.0, 1.0])
ZERO = MutationParams(0, 0, 0, 0, 0, 0.5)


def site_multiset(*inds):
    c = Counter()
    for ind in inds:
        for x, s, l in zip(ind.coords, ind.sigmas, ind.labels):
            c[(tuple(x), tuple(s), int(l))] += 1
    return c


class ZeroRng:
    def standard_normal(self, size=None):
        return 0.0 if size is None else np.zeros(size)


class TestSelfAdaptive:
    def test_eta_zero_keeps_sigma(self, rng):
        _, s = self_adaptive_mutate_coord(1.0, 0.37, 0.0, rng)
        assert s == 0.37

    def test_zero_draws_identity(self):
        x, s = self_adaptive_mutate_coord(2.5, 0.1, 0.5, ZeroRng())
        assert (x, s) == (2.5, 0.1)

    def test_uses_updated_sigma(self):
        class Fixed:
            vals = iter([1.0, 1.0])

            def standard_normal(self, size=None):
                return next(self.vals)

        x, s = self_adaptive_mutate_coord(0.0, 1.0, 0.5, Fixed())
        assert s == pytest.approx(np.exp(0.5))
        assert x == pytest.approx(np.exp(0.5))

    def test_log_normal_moments(self):
        rng = np.random.default_rng(0)
        sigma = np.full(100_000, 0.2)
        _, s = self_adaptive_mutate_coord(np.zeros_like(sigma), sigma, 0.5, rng)
        ratio = np.log(s / sigma)
        assert abs(ratio.mean()) < 0.01
        assert abs(ratio.std() - 0.5) < 0.01

    def test_clamped(self, rng):
        _, s = self_adaptive_mutate_coord(np.zeros(1000), np.ones(1000), 3.0, rng, 0.5, 2.0)
        assert s.min() >= 0.5 and s.max() <= 2.0


class TestMutation:
    def test_params_validated(self):
        with pytest.raises(ValueError):
            MutationParams(p_s=1.5)
        with pytest.raises(ValueError):
            MutationParams(eta=-1)

    def test_default_rates(self):
        p = MutationParams()
        assert (p.p_s, p.p_f, p.p_t, p.p_plus, p.p_minus, p.eta) == (0.5, 0.5, 0.1, 0.2, 0.1, 0.5)

    def test_zero_probabilities_identity(self, rng):
        ind = random_individual(2, 20, 40, BOX, 1)
        out = mutate_voronoi(ind, ZERO, BOX, rng)
        assert out.same_genome(ind)
        assert out is not ind

    def test_removal_skipped_at_minimum(self, rng):
        ind = random_individual(2, 20, 20, BOX, 2)
        out = mutate_voronoi(ind, MutationParams(0, 0, 0, 0, 1.0, 0.5), BOX, rng, 20, 100)
        assert len(out) == 20

    def test_addition_skipped_at_maximum(self, rng):
        ind = random_individual(2, 100, 100, BOX, 2)
        out = mutate_voronoi(ind, MutationParams(0, 0, 0, 1.0, 0, 0.5), BOX, rng, 20, 100)
        assert len(out) == 100

    def test_add_and_remove(self, rng):
        ind = random_individual(2, 30, 30, BOX, 2)
        assert len(mutate_voronoi(ind, MutationParams(0, 0, 0, 1.0, 0, 0.5), BOX, rng)) == 31
        assert len(mutate_voronoi(ind, MutationParams(0, 0, 0, 0, 1.0, 0.5), BOX, rng)) == 29

    def test_label_flip_all(self, rng):
        ind = random_individual(2, 30, 30, BOX, 2)
        out = mutate_voronoi(ind, MutationParams(1.0, 0, 1.0, 0, 0, 0.5), BOX, rng)
        np.testing.assert_array_equal(out.labels, 1 - ind.labels)
        np.testing.assert_array_equal(out.coords, ind.coords)

    def test_moves_only_touch_coords_and_sigmas(self, rng):
        ind = random_individual(2, 30, 30, BOX, 2)
        out = mutate_voronoi(ind, MutationParams(1.0, 1.0, 0, 0, 0, 0.5), BOX, rng)
        assert np.all(out.coords != ind.coords)
        np.testing.assert_array_equal(out.labels, ind.labels)

    def test_default_rates_deterministic(self):
        ind = random_individual(2, 20, 100, BOX, 3)
        a = mutate_voronoi(ind, MutationParams(), BOX, np.random.default_rng(5))
        b = mutate_voronoi(ind, MutationParams(), BOX, np.random.default_rng(5))
        assert a.same_genome(b)
        assert not a.evaluated


class TestHyperplane:
    def test_1d_normal_is_sign(self, rng):
        for _ in range(20):
            plane = random_hyperplane(rng.random((5, 1)), rng)
            assert plane.normal[0] in (-1.0, 1.0)

    def test_unit_and_through_a_site(self, rng):
        coords = rng.random((9, 3))
        for _ in range(50):
            plane = random_hyperplane(coords, rng)
            assert abs(np.linalg.norm(plane.normal) - 1) < 1e-9
            assert np.min(np.abs(plane.signed(coords))) < 1e-12

    def test_isotropic(self, rng):
        coords = rng.random((4, 3))
        normals = np.array([random_hyperplane(coords, rng).normal for _ in range(10_000)])
        assert np.linalg.norm(normals.mean(axis=0)) < 0.05


class TestSplit:
    def test_sides_match_sign_oracle(self, rng):
        ind = random_individual(2, 30, 30, BOX, 4)
        plane = random_hyperplane(ind.coords, rng)
        below, above = split_individual(ind, plane)
        assert len(below) + len(above) == len(ind)
        assert np.all(plane.signed(below.coords) < 0)
        assert np.all(plane.signed(above.coords) >= 0)
        # the site the plane was drawn through lands above
        on_plane = np.abs(plane.signed(ind.coords)) < 1e-12
        assert on_plane.any()

    def test_all_on_one_side(self):
        from voreal.geometry import Hyperplane

        ind = random_individual(2, 5, 5, BOX, 4)
        below, above = split_individual(ind, Hyperplane(np.array([1.0, 0.0]), -5.0))
        assert len(below) == 0 and len(above) == 5


class TestCrossover:
    def test_self_mating_conserves_count(self, rng):
        ind = random_individual(2, 30, 30, BOX, 6)
        o1, o2 = geometric_crossover(ind, ind, rng)
        assert len(o1) + len(o2) == 2 * len(ind)

    def test_coincident_parents_fall_back(self, rng):
        pt = np.full((25, 2), 0.5)
        i1 = Individual(pt, np.ones_like(pt), np.zeros(25))
        i2 = Individual(pt, np.ones_like(pt), np.ones(25))
        assert geometric_crossover(i1, i2, rng) is None
        o1, o2 = crossover_voronoi(i1, i2, rng)
        assert o1.same_genome(i1) and o2.same_genome(i2)

    def test_conservation_and_locality(self):
        hits = 0
        for k in range(50):
            i1 = random_individual(2, 20, 100, BOX, 100 + k)
            i2 = random_individual(2, 20, 100, BOX, 200 + k)
            raw = geometric_crossover(i1, i2, np.random.default_rng(k))
            o1, o2 = crossover_voronoi(i1, i2, np.random.default_rng(k))
            assert raw is not None
            assert raw[0].same_genome(o1) == (20 <= len(raw[0]) <= 100)
            if all(20 <= len(o) <= 100 for o in raw):
                hits += 1
                assert site_multiset(o1, o2) == site_multiset(i1, i2)
            # every parent-1 site kept in o1 drags its whole half-space along
            rows1 = {tuple(x) for x in i1.coords}
            kept = [x for x in raw[0].coords if tuple(x) in rows1]
            assert len(kept) >= 1
        assert hits > 0

    def test_locality_against_plane(self, rng):
        i1 = random_individual(2, 40, 40, BOX, 1)
        i2 = random_individual(2, 40, 40, BOX, 2)
        seed_rng = np.random.default_rng(77)
        plane = random_hyperplane(np.vstack([i1.coords, i2.coords]), np.random.default_rng(77))
        o1, _ = geometric_crossover(i1, i2, seed_rng)
        below1, _ = split_individual(i1, plane)
        # first plane splits both parents for this seed; o1 starts with below(i1)
        np.testing.assert_array_equal(o1.coords[:len(below1)], below1.coords)

    def test_offspring_in_bounds(self, rng):
        for k in range(30):
            i1 = random_individual(2, 20, 22, BOX, k)
            i2 = random_individual(2, 95, 100, BOX, k + 1)
            for o in crossover_voronoi(i1, i2, rng):
                assert 20 <= len(o) <= 100


class TestRepair:
    def test_shrink(self, rng):
        ind = random_individual(2, 120, 120, BOX, 0)
        out = repair_size(ind, rng, 20, 100)
        assert len(out) == 100
        assert site_multiset(out) <= site_multiset(ind)

    def test_grow(self, rng):
        ind = random_individual(2, 5, 5, BOX, 0)
        out = repair_size(ind, rng, 20, 100)
        assert len(out) == 20
        assert out.take(range(5)).same_genome(ind)

    def test_noop(self, rng):
        ind = random_individual(2, 50, 50, BOX, 0)
        assert repair_size(ind, rng) is ind


def test_randomized_operator_chain_respects_bounds():
    rng = np.random.default_rng(9)
    pop = [random_individual(2, 20, 100, BOX, rng) for _ in range(10)]
    for step in range(300):
        a, b = rng.integers(len(pop), size=2)
        o1, o2 = crossover_voronoi(pop[a], pop[b], rng)
        pop[a] = mutate_voronoi(o1, MutationParams(p_plus=0.6, p_minus=0.6), BOX, rng)
        pop[b] = mutate_voronoi(o2, MutationParams(), BOX, rng)
        assert all(20 <= len(p) <= 100 for p in pop)
