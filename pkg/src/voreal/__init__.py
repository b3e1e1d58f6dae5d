"""Evolved Voronoi-diagram anomaly detectors.

A detector is a labelled Voronoi diagram; a multi-objective evolutionary
loop trades training accuracy against volume-based objectives that reward
tight cells around data and anomaly-labelled empty space.
"""

from ._backend import BACKEND
from .datasets import Dataset, GeneratorSpec, generate, inject_test_anomalies
from .evolution import Committee, EvolutionConfig, evolve
from .genotype import Individual, Label, Site, classify
from .geometry import BoundingBox
from .objectives import ObjectiveSet, evaluate
from .operators import MutationParams

__all__ = [
    "BACKEND", "BoundingBox", "Committee", "Dataset", "EvolutionConfig", "GeneratorSpec",
    "Individual", "Label", "MutationParams", "ObjectiveSet", "Site", "classify", "evaluate",
    "evolve", "generate", "inject_test_anomalies",
]
