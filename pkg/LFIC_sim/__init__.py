"""
Package header for the LFIC_sim namespace
Provides the correlation polytopes of local friendliness under incomplete information, their quantum violations,
moment relaxations of the quantum set, planar sections and run-level simulations of the friend protocols.
"""

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


from .scenario import Scenario, Behavior, BellFunctional, evaluate, validate
from .serialization import serialize, deserialize
from .presets import table_point, functional, ch_functional
from .models import ModelKind, model_vertices, model_hrep, facet_census, membership
from .symmetry import Relabeling, stabilizer_group, classify_facets
from .quantum import QuantumRealization, preset, behavior_from_realization, noise_threshold
from .cross_section import SectionPlane, make_plane, section_boundary
from .sol import SectionSolution
from .simulator import RunConfig, RunCounts, simulate_runs, simulate_protocol2, estimate_behavior
from .version import __version__
