"""Dependent first-passage percolation: weight models, exact passage times,
influence functionals, greedy lattice animals and Monte Carlo drivers."""
from . import animals, experiments, influence, lattice, passage, weights
from .lattice import BoxSpec, Edge, enumerate_animals, l1_norm, neighbors
from .passage import PassageResult, ShiftSpec, passage_time, passage_time_hop_constrained
from .weights import ModelSpec, SpinField, WeightField

__version__ = "0.1.0"
