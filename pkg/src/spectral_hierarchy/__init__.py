"""Irregularity degree of spectral sequences via bootstrapping hierarchies."""

__version__ = "0.1.0"

from .core import (
    LocalSpacing,
    PolynomialFit,
    RiemannVonMangoldt,
    SpectralSequence,
    UnfoldedSequence,
    WeylLinear,
    fit_linear_average,
    invert_average,
    refold,
    unfold,
    validate_sequence,
)
from .errors import SpectralError
from .hierarchy import (
    BootstrapHierarchy,
    FixedList,
    HierarchyLevel,
    Midpoint,
    Optimal,
    build_hierarchy,
    irregularity_degree,
    regularity_test,
    roughness_functional,
    separating_sequence,
)
from .graph import QuantumGraph, complete_graph, compute_spectrum, enumerate_orbits, first_eigenvalues
from .trace import StaircaseExpansion, integral_k_dN, reconstruct_spectrum, riemann_expansion, staircase_eval
