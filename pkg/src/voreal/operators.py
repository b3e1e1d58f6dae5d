"""Variation operators for Voronoi genomes.

Mutation moves sites with self-adaptive Gaussian steps, flips labels and
adds/removes whole sites. Crossover cuts both parents with one random
hyperplane and swaps the half-spaces, so sites that are close in space tend
to be inherited together.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .genotype import Individual, random_sites, sigma_bounds
from .geometry import BoundingBox, Hyperplane

log = logging.getLogger(__name__)

P_MIN = 20
P_MAX = 100
MAX_RETRIES = 32


@dataclass(frozen=True)
class MutationParams:
    p_s: float = 0.5
    p_f: float = 0.5
    p_t: float = 0.1
    p_plus: float = 0.2
    p_minus: float = 0.1
    eta: float = 0.5

    def __post_init__(self):
        for name in ("p_s", "p_f", "p_t", "p_plus", "p_minus"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")


def self_adaptive_mutate_coord(x, sigma, eta, rng, sigma_min=0.0, sigma_max=np.inf):
    """Log-normal step-size update followed by a Gaussian move.

    The step is updated first and the coordinate moves with the new step:
    ``sigma' = clip(sigma * exp(eta * N(0,1)))``, ``x' = x + sigma' * N(0,1)``.
    Works elementwise on arrays.
    """
    size = None if np.ndim(x) == 0 else np.shape(x)
    new_sigma = np.clip(sigma * np.exp(eta * rng.standard_normal(size)), sigma_min, sigma_max)
    new_x = x + new_sigma * rng.standard_normal(size)
    return new_x, new_sigma


def mutate_voronoi(ind: Individual, params: MutationParams, box: BoundingBox,
                   rng: np.random.Generator, p_min: int = P_MIN, p_max: int = P_MAX) -> Individual:
    """Site-level moves and label flips, then at most one add and one removal.

    Additions are skipped at ``p_max`` sites and removals at ``p_min``.
    """
    coords = ind.coords.copy()
    sigmas = ind.sigmas.copy()
    labels = ind.labels.copy()
    p, n = coords.shape

    site_hit = rng.random(p) < params.p_s
    coord_hit = (rng.random((p, n)) < params.p_f) & site_hit[:, None]
    flip = (rng.random(p) < params.p_t) & site_hit
    if coord_hit.any():
        lo, hi = sigma_bounds(box)
        cols = np.nonzero(coord_hit)[1]
        coords[coord_hit], sigmas[coord_hit] = self_adaptive_mutate_coord(
            coords[coord_hit], sigmas[coord_hit], params.eta, rng, lo[cols], hi[cols])
    labels[flip] ^= 1

    if rng.random() < params.p_plus and p < p_max:
        c, s, l = random_sites(1, box, rng)
        coords = np.vstack([coords, c])
        sigmas = np.vstack([sigmas, s])
        labels = np.concatenate([labels, l])
    if rng.random() < params.p_minus and len(labels) > p_min:
        drop = int(rng.integers(len(labels)))
        keep = np.arange(len(labels)) != drop
        coords, sigmas, labels = coords[keep], sigmas[keep], labels[keep]
    return Individual(coords, sigmas, labels)


def random_hyperplane(coords, rng: np.random.Generator) -> Hyperplane:
    """Isotropic random normal through a randomly chosen site position."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    if len(coords) == 0:
        raise ValueError("no sites to place a hyperplane through")
    while True:
        g = rng.standard_normal(coords.shape[1])
        norm = np.linalg.norm(g)
        if norm > 0:
            break
    normal = g / norm
    q = coords[int(rng.integers(len(coords)))]
    return Hyperplane(normal, float(normal @ q))


def split_individual(ind: Individual, plane: Hyperplane) -> tuple[Individual, Individual]:
    """Sites strictly below the plane, and the rest (boundary sites go above)."""
    below = plane.signed(ind.coords) < 0
    return ind.take(np.flatnonzero(below)), ind.take(np.flatnonzero(~below))


def _join(a: Individual, b: Individual) -> Individual:
    return Individual(np.vstack([a.coords, b.coords]),
                      np.vstack([a.sigmas, b.sigmas]),
                      np.concatenate([a.labels, b.labels]))


def geometric_crossover(i1: Individual, i2: Individual, rng: np.random.Generator,
                        max_retries: int = MAX_RETRIES):
    """Hyperplane crossover without size repair.

    Returns the two offspring, or ``None`` when no drawn plane cut both
    parents within ``max_retries`` attempts.
    """
    if i1.dim != i2.dim:
        raise ValueError("parents differ in dimension")
    union = np.vstack([i1.coords, i2.coords])
    for _ in range(max_retries):
        plane = random_hyperplane(union, rng)
        b1, a1 = split_individual(i1, plane)
        b2, a2 = split_individual(i2, plane)
        if len(b1) and len(a1) and len(b2) and len(a2):
            return _join(b1, a2), _join(b2, a1)
    return None


def repair_size(ind: Individual, rng: np.random.Generator, p_min: int = P_MIN,
                p_max: int = P_MAX) -> Individual:
    """Bring the site count into ``[p_min, p_max]``.

    Too long: drop uniformly chosen sites. Too short: duplicate random sites
    with a one-step Gaussian jitter.
    """
    p = len(ind)
    if p > p_max:
        keep = np.sort(rng.choice(p, size=p_max, replace=False))
        return ind.take(keep)
    if p < p_min:
        src = rng.integers(p, size=p_min - p)
        extra = ind.take(src)
        jitter = extra.sigmas * rng.standard_normal(extra.coords.shape)
        extra = Individual(extra.coords + jitter, extra.sigmas, extra.labels)
        return _join(ind, extra)
    return ind


def crossover_voronoi(i1: Individual, i2: Individual, rng: np.random.Generator,
                      max_retries: int = MAX_RETRIES, p_min: int = P_MIN,
                      p_max: int = P_MAX) -> tuple[Individual, Individual]:
    """Geometric crossover with size repair; parent copies if no plane separates."""
    children = geometric_crossover(i1, i2, rng, max_retries)
    if children is None:
        log.debug("crossover gave up after %d planes", max_retries)
        return i1.copy(), i2.copy()
    o1, o2 = children
    return repair_size(o1, rng, p_min, p_max), repair_size(o2, rng, p_min, p_max)
