"""
This module contains the relabelings of inputs and outputs, the stabilizer group of a vertex set and the partition of
facets into orbits under such a group.
"""

__all__ = ['Relabeling', 'apply', 'candidates', 'stabilizer_group', 'reduce_facet', 'FacetOrbit',
           'classify_facets', 'orbit_table']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import itertools
import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from LFIC_sim.custom_exceptions import ScenarioMismatchError, ScenarioShapeError
from LFIC_sim.geometry.polytope import LinearConstraint, PolytopeH, PolytopeV
from LFIC_sim.geometry.rational import integer_primitive, reduce_modulo, rref
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario


logger = logging.getLogger(__name__)


def _is_permutation(perm: tuple, size: int) -> bool:
    return sorted(perm) == list(range(size))


@dataclass(frozen=True)
class Relabeling:
    """
    Entry (a, b, x, y) moves to (alice_output[a], bob_output[y][b], alice_input[x], bob_input[y]). Bob's output
    permutation is chosen per (original) input y.
    """
    alice_input: tuple
    alice_output: tuple
    bob_input: tuple
    bob_output: tuple

    def __post_init__(self):
        object.__setattr__(self, 'alice_input', tuple(self.alice_input))
        object.__setattr__(self, 'alice_output', tuple(self.alice_output))
        object.__setattr__(self, 'bob_input', tuple(self.bob_input))
        object.__setattr__(self, 'bob_output', tuple(tuple(p) for p in self.bob_output))
        if not _is_permutation(self.alice_input, len(self.alice_input)):
            raise ValueError("alice_input needs to be a permutation.")
        if not _is_permutation(self.alice_output, len(self.alice_output)):
            raise ValueError("alice_output needs to be a permutation.")
        if not _is_permutation(self.bob_input, len(self.bob_input)):
            raise ValueError("bob_input needs to be a permutation.")
        if len(self.bob_output) != len(self.bob_input):
            raise ValueError("bob_output needs one permutation per Bob input.")
        if any(not _is_permutation(p, len(self.bob_output[0])) for p in self.bob_output):
            raise ValueError("bob_output needs to hold permutations of equal size.")

    @classmethod
    def identity(cls, s: Scenario) -> "Relabeling":
        bob = tuple(range(s.bob_outputs))
        return cls(tuple(range(s.alice_inputs)), tuple(range(s.alice_outputs)), tuple(range(s.bob_inputs)),
                   (bob,) * s.bob_inputs)

    def fits(self, s: Scenario) -> bool:
        return (len(self.alice_input) == s.alice_inputs and len(self.alice_output) == s.alice_outputs
                and len(self.bob_input) == s.bob_inputs and len(self.bob_output[0]) == s.bob_outputs)

    def then(self, other: "Relabeling") -> "Relabeling":
        """Composition: first self, then other."""
        return Relabeling(tuple(other.alice_input[i] for i in self.alice_input),
                          tuple(other.alice_output[a] for a in self.alice_output),
                          tuple(other.bob_input[j] for j in self.bob_input),
                          tuple(tuple(other.bob_output[self.bob_input[y]][b] for b in perm)
                                for y, perm in enumerate(self.bob_output)))

    def inverse(self) -> "Relabeling":
        def invert(perm):
            inv = [0] * len(perm)
            for i, p in enumerate(perm):
                inv[p] = i
            return tuple(inv)
        bob_input_inv = invert(self.bob_input)
        return Relabeling(invert(self.alice_input), invert(self.alice_output), bob_input_inv,
                          tuple(invert(self.bob_output[bob_input_inv[y]]) for y in range(len(self.bob_input))))

    def index_map(self, s: Scenario) -> np.ndarray:
        """target[i] is the flat position that coordinate i moves to."""
        if not self.fits(s):
            raise ScenarioShapeError(f"relabeling does not fit {s}.")
        return np.array([s.index(self.alice_output[a], self.bob_output[y][b], self.alice_input[x], self.bob_input[y])
                         for a, b, x, y in s.labels()], dtype=int)

    def permute(self, vector: Sequence, s: Scenario) -> tuple:
        """Moves the coordinates of a flat vector (extra trailing entries, e.g. an offset, stay in place)."""
        target = self.index_map(s)
        out = list(vector)
        for i, t in enumerate(target):
            out[t] = vector[i]
        return tuple(out)

    def __str__(self):
        return (f"X{list(self.alice_input)} A{list(self.alice_output)} Y{list(self.bob_input)} "
                f"B{[list(p) for p in self.bob_output]}")


def apply(r: Relabeling, obj: Union[Behavior, BellFunctional, LinearConstraint, tuple], s: Scenario = None):
    """
    Relabels a behavior, a functional, a constraint or a flat vertex. Functionals move with the same index map as
    behaviors, so evaluate(apply(r, f), apply(r, p)) = evaluate(f, p).
    :param s: (Scenario) needed only for constraints and bare vertices
    """
    if isinstance(obj, Behavior):
        table = np.asarray(r.permute(list(obj.vector), obj.scenario), dtype=object if obj.exact else float)
        return Behavior(obj.scenario, table, obj.exact, obj.name)
    if isinstance(obj, BellFunctional):
        coefficients = r.permute(list(obj.coefficients.reshape(-1)), obj.scenario)
        return BellFunctional(obj.scenario, np.asarray(coefficients, dtype=object), obj.offset, obj.sense, obj.name)
    if s is None:
        raise ValueError("A scenario is needed to relabel bare vectors.")
    if isinstance(obj, LinearConstraint):
        if obj.dimension != s.dimension:
            raise ScenarioShapeError("constraint dimension does not match the scenario.")
        return LinearConstraint(r.permute(list(obj.normal), s), obj.offset)
    if len(obj) != s.dimension:
        raise ScenarioShapeError("vertex dimension does not match the scenario.")
    return r.permute(list(obj), s)


def candidates(s: Scenario, global_bob_outputs: bool = False) -> list:
    """
    All relabelings in deterministic order: alice input and output permutations, bob input permutations and either one
    output permutation per bob input or a single global one.
    """
    bob_perms = list(itertools.permutations(range(s.bob_outputs)))
    if global_bob_outputs:
        bob_choices = [(p,) * s.bob_inputs for p in bob_perms]
    else:
        bob_choices = list(itertools.product(bob_perms, repeat=s.bob_inputs))
    return [Relabeling(x, a, y, b)
            for x in itertools.permutations(range(s.alice_inputs))
            for a in itertools.permutations(range(s.alice_outputs))
            for y in itertools.permutations(range(s.bob_inputs))
            for b in bob_choices]


def stabilizer_group(v: PolytopeV, s: Scenario, global_bob_outputs: bool = False) -> list:
    """
    Candidate relabelings that map the vertex set onto itself.
    :param v: (PolytopeV) vertex set in the scenario's coordinates
    :param s: (Scenario)
    :param global_bob_outputs: (bool) restrict Bob's output permutation to be the same for every input
    :return: (list of Relabeling) in candidate order, the identity first
    """
    if v.dimension != s.dimension:
        raise ScenarioMismatchError(f"dimension {v.dimension}", s)
    vertex_set = v.vertex_set()
    group = []
    for r in candidates(s, global_bob_outputs):
        target = r.index_map(s)
        ok = True
        for vertex in v.vertices:
            image = [None] * len(vertex)
            for i, t in enumerate(target):
                image[t] = vertex[i]
            if tuple(image) not in vertex_set:
                ok = False
                break
        if ok:
            group.append(r)
    logger.debug(f"stabilizer_group: {len(group)} of the candidates fix the vertex set")
    return group


def _equality_system(h: PolytopeH) -> tuple:
    return rref([list(c.homogeneous) for c in h.equalities], h.dimension + 1) if h.equalities else ([], [])


def reduce_facet(homogeneous: Sequence, reduced_rows: Sequence, pivots: Sequence[int]) -> tuple:
    """
    Canonical integer form of an inequality modulo the equalities (given in RREF): entries at the pivot columns are
    eliminated, then the vector is scaled to primitive integers.
    """
    return integer_primitive(reduce_modulo(homogeneous, reduced_rows, pivots))


@dataclass
class FacetOrbit:
    representative: tuple
    members: list

    @property
    def size(self) -> int:
        return len(self.members)


def classify_facets(h: PolytopeH, group: Sequence[Relabeling], s: Scenario, facets: Sequence = None) -> list:
    """
    Partitions facets into orbits under the group acting on their canonical forms modulo the equalities of h.
    :param h: (PolytopeH) supplies the equalities, and the facets unless given
    :param group: relabelings that preserve the polytope
    :param s: (Scenario)
    :param facets: optional subset of h's inequalities (e.g. the NS-strict ones)
    :return: (list of FacetOrbit) sorted by representative, members sorted, representative lexicographically minimal
    """
    reduced, pivots = _equality_system(h)
    facets = h.inequalities if facets is None else facets
    pending = {reduce_facet(f.homogeneous, reduced, pivots) for f in facets}
    maps = [r.index_map(s) for r in group]
    orbits = []
    while pending:
        seed = min(pending)
        orbit = {seed}
        for target in maps:
            image = list(seed)
            for i, t in enumerate(target):
                image[t] = seed[i]
            orbit.add(reduce_facet(image, reduced, pivots))
        if not orbit <= pending:
            logger.warning("classify_facets: the group maps a facet outside the given facet list")
        pending -= orbit
        members = sorted(orbit)
        orbits.append(FacetOrbit(members[0], members))
    orbits.sort(key=lambda o: o.representative)
    return orbits


def orbit_table(orbits: Sequence[FacetOrbit], s: Scenario) -> str:
    """
    Text report: one block per orbit with its size, representative and members.
    """
    lines = [f"{'orbit':>5}  {'size':>4}  representative"]
    for k, orbit in enumerate(orbits):
        functional = BellFunctional.from_homogeneous(s, orbit.representative)
        lines.append(f"{k:>5}  {orbit.size:>4}  {functional}")
        for member in orbit.members:
            lines.append(f"{'':>13}{' '.join(str(v) for v in member)}")
    return '\n'.join(lines) + '\n'
