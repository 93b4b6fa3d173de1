"""
This module contains the correlation models: no-signaling (NS), local hidden variables (LHV), the original local
friendliness reduction (LF) and local friendliness under incomplete information (LFIC). It builds their vertex and
facet representations and decides membership of behaviors with certificates.
"""

__all__ = ['ModelKind', 'ns_hrep', 'lfic_block_hrep', 'lfic_vertices', 'lhv_vertices', 'lf_vertices',
           'model_vertices', 'model_hrep', 'FacetCensus', 'facet_census', 'MembershipResult', 'membership']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import enum
import functools
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from LFIC_sim.custom_exceptions import ScenarioShapeError
from LFIC_sim.geometry.dd import facets_to_vertices, vertices_to_facets
from LFIC_sim.geometry.lp import convex_combination
from LFIC_sim.geometry.polytope import LinearConstraint, PolytopeH, PolytopeV
from LFIC_sim.geometry.rational import integer_primitive, rank
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario
from LFIC_sim.utils.constants import NumericalTolerances
from LFIC_sim.utils.timer import sol_timer


logger = logging.getLogger(__name__)


class ModelKind(enum.Enum):
    LFIC = 'lfic'
    NS = 'ns'
    LHV = 'lhv'
    LF = 'lf'

    @classmethod
    def from_name(cls, name) -> "ModelKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"Unknown model '{name}'. Available models: {', '.join(m.value for m in cls)}.")


def _sum_constraint(s: Scenario, cells: Iterable[tuple], coefficient: int, base: Optional[list] = None) -> list:
    normal = base if base is not None else [Fraction(0)] * s.dimension
    for a, b, x, y in cells:
        normal[s.index(a, b, x, y)] += coefficient
    return normal


def _independent(constraints: list) -> tuple:
    """Greedy rank-increasing selection in the given order."""
    kept, rows = [], []
    for c in constraints:
        if rank(rows + [list(c.homogeneous)]) > len(rows):
            rows.append(list(c.homogeneous))
            kept.append(LinearConstraint.from_homogeneous(c.canonical_equality()))
    return tuple(kept)


def _ns_equalities(s: Scenario) -> list:
    equalities = []
    bob_outcomes, alice_outcomes = range(s.bob_outputs), range(s.alice_outputs)
    for x in range(s.alice_inputs):
        for y in range(s.bob_inputs):
            normal = _sum_constraint(s, ((a, b, x, y) for a in alice_outcomes for b in bob_outcomes), 1)
            equalities.append(LinearConstraint(tuple(normal), -1))
    for x in range(s.alice_inputs):
        for a in alice_outcomes:
            for y in range(1, s.bob_inputs):
                normal = _sum_constraint(s, ((a, b, x, y) for b in bob_outcomes), 1)
                normal = _sum_constraint(s, ((a, b, x, 0) for b in bob_outcomes), -1, normal)
                equalities.append(LinearConstraint(tuple(normal), 0))
    for y in range(s.bob_inputs):
        for b in bob_outcomes:
            for x in range(1, s.alice_inputs):
                normal = _sum_constraint(s, ((a, b, x, y) for a in alice_outcomes), 1)
                normal = _sum_constraint(s, ((a, b, 0, y) for a in alice_outcomes), -1, normal)
                equalities.append(LinearConstraint(tuple(normal), 0))
    return equalities


def _coordinate(s: Scenario, a: int, b: int, x: int, y: int) -> LinearConstraint:
    normal = [Fraction(0)] * s.dimension
    normal[s.index(a, b, x, y)] = Fraction(1)
    return LinearConstraint(tuple(normal), 0)


@functools.lru_cache(maxsize=None)
def ns_hrep(s: Scenario) -> PolytopeH:
    """
    No-signaling polytope: nonnegativity of every entry, normalization per (x, y) and both no-signaling families,
    reduced to a linearly independent set of equalities.
    """
    nonnegativity = tuple(_coordinate(s, a, b, x, y) for a, b, x, y in s.labels())
    return PolytopeH(s.dimension, nonnegativity, _independent(_ns_equalities(s)))


@functools.lru_cache(maxsize=None)
def lfic_block_hrep(s: Scenario, c: int) -> PolytopeH:
    """
    Conditional no-signaling polytope of the friend's outcome c: for x = c Alice answers a = c with certainty, for
    x != c the answer a = x never occurs.
    """
    s.require_lfic()
    if not 0 <= c < s.charlie_outputs:
        raise ScenarioShapeError(f"Charlie outcome {c} outside 0..{s.charlie_outputs - 1}.")
    consistency = []
    for a, b, x, y in s.labels():
        if (x == c and a != c) or (x != c and a == x):
            consistency.append(_coordinate(s, a, b, x, y))
    ns = ns_hrep(s)
    return PolytopeH(s.dimension, ns.inequalities, _independent(list(ns.equalities) + consistency))


@functools.lru_cache(maxsize=None)
@sol_timer
def lfic_vertices(s: Scenario) -> PolytopeV:
    """
    Union over c of the vertices of the conditional polytopes, merged in c order. Its convex hull is the LFIC polytope.
    """
    s.require_lfic()
    vertices = []
    for c in range(s.charlie_outputs):
        block = facets_to_vertices(lfic_block_hrep(s, c))
        logger.debug(f"lfic_vertices: block c={c} has {len(block)} vertices")
        vertices.extend(block.vertices)
    return PolytopeV(s.dimension, tuple(vertices))


def _deterministic_vertex(s: Scenario, alice: tuple, bob: tuple) -> tuple:
    return tuple(Fraction(int(a == alice[x] and b == bob[y])) for a, b, x, y in s.labels())


@functools.lru_cache(maxsize=None)
def lhv_vertices(s: Scenario) -> PolytopeV:
    """
    Products of deterministic strategies x -> a and y -> b.
    """
    alice_strategies = itertools.product(range(s.alice_outputs), repeat=s.alice_inputs)
    vertices = [_deterministic_vertex(s, alice, bob) for alice in alice_strategies
                for bob in itertools.product(range(s.bob_outputs), repeat=s.bob_inputs)]
    return PolytopeV(s.dimension, tuple(vertices))


@functools.lru_cache(maxsize=None)
def lf_vertices(s: Scenario) -> PolytopeV:
    """
    Alice outputs the friend's outcome c for every input; Bob answers deterministically.
    """
    if s.alice_outputs != s.charlie_outputs:
        raise ScenarioShapeError("the LF model needs alice_outputs = charlie_outputs.")
    vertices = [_deterministic_vertex(s, (c,) * s.alice_inputs, bob) for c in range(s.charlie_outputs)
                for bob in itertools.product(range(s.bob_outputs), repeat=s.bob_inputs)]
    return PolytopeV(s.dimension, tuple(vertices))


@functools.lru_cache(maxsize=None)
def model_vertices(kind, s: Scenario) -> PolytopeV:
    kind = ModelKind.from_name(kind)
    if kind is ModelKind.LFIC:
        return lfic_vertices(s)
    if kind is ModelKind.LHV:
        return lhv_vertices(s)
    if kind is ModelKind.LF:
        return lf_vertices(s)
    return facets_to_vertices(ns_hrep(s))


@functools.lru_cache(maxsize=None)
def model_hrep(kind, s: Scenario) -> PolytopeH:
    """
    Facet representation of the model. NS is given directly; the others are converted from their vertices, which
    for LHV beyond small scenarios is expensive.
    """
    kind = ModelKind.from_name(kind)
    if kind is ModelKind.NS:
        return ns_hrep(s)
    return vertices_to_facets(model_vertices(kind, s))


@dataclass
class FacetCensus:
    """
    Facets of the LFIC polytope split into those implied by no-signaling (valid on every vertex of NS intersected
    with the LFIC affine hull) and the strictly stronger ones.
    """
    hrep: PolytopeH
    ns_coincident: list = field(default_factory=list)
    strict: list = field(default_factory=list)

    @property
    def equalities(self) -> tuple:
        return self.hrep.equalities

    def __str__(self):
        return (f"{len(self.hrep.inequalities)} facets ({len(self.strict)} strictly stronger than NS, "
                f"{len(self.ns_coincident)} NS-coincident), {len(self.hrep.equalities)} equalities")


@functools.lru_cache(maxsize=None)
@sol_timer
def facet_census(s: Scenario) -> FacetCensus:
    hrep = model_hrep(ModelKind.LFIC, s)
    restricted = ns_hrep(s).with_equalities(hrep.equalities)
    restricted = PolytopeH(s.dimension, restricted.inequalities, _independent(list(restricted.equalities)))
    ns_points = facets_to_vertices(restricted).vertices
    census = FacetCensus(hrep)
    for facet in hrep.inequalities:
        if all(facet.value(v) >= 0 for v in ns_points):
            census.ns_coincident.append(facet)
        else:
            census.strict.append(facet)
    logger.info(f"facet census: {census}")
    return census


@dataclass
class MembershipResult:
    """
    inside: weights maps vertex index to its convex weight (nonzero weights only), vertices is the model vertex list.
    outside: certificate is a BellFunctional (sense 'lower') nonnegative on the model and negative on the behavior.
    """
    inside: bool
    model: ModelKind
    behavior: Behavior
    weights: dict = field(default_factory=dict)
    vertices: tuple = ()
    certificate: Optional[BellFunctional] = None

    def reconstruct(self) -> tuple:
        """Convex combination of the certificate vertices, entrywise."""
        dim = self.behavior.scenario.dimension
        point = [Fraction(0)] * dim
        for index, weight in self.weights.items():
            point = [p + weight * v for p, v in zip(point, self.vertices[index])]
        return tuple(point)

    def __str__(self):
        if self.inside:
            return f"inside {self.model.value}: convex combination of {len(self.weights)} vertices"
        return f"outside {self.model.value}: {self.certificate}"


def _violated_constraint(h: PolytopeH, point: tuple) -> Optional[tuple]:
    """Most violated inequality or equality of h at the point, as a homogeneous vector negative at the point."""
    best, best_value = None, Fraction(0)
    for c in h.inequalities:
        value = c.value(point)
        if value < best_value:
            best, best_value = c.homogeneous, value
    for c in h.equalities:
        value = c.value(point)
        if value != 0 and -abs(value) < best_value:
            best = c.homogeneous if value < 0 else tuple(-v for v in c.homogeneous)
            best_value = -abs(value)
    return best


def membership(p: Behavior, kind, use_facets: bool = True,
               denominator_cap: int = NumericalTolerances.RATIONAL_DENOMINATOR_CAP) -> MembershipResult:
    """
    Decides whether the behavior lies in the model's polytope.
    :param p: (Behavior) float behaviors are rationalized with the denominator cap first
    :param kind: (ModelKind or str)
    :param use_facets: (bool) for NS and LFIC, report the most violated facet (or equality) as the certificate instead
        of the Farkas functional of the vertex LP
    :return: (MembershipResult)
    """
    kind = ModelKind.from_name(kind)
    s = p.scenario
    if not p.exact:
        p = p.rationalize(denominator_cap)
    point = tuple(p.vector.tolist())
    vertices = model_vertices(kind, s).vertices
    status, data = convex_combination(vertices, point)
    if status == 'inside':
        weights = {i: w for i, w in enumerate(data) if w != 0}
        return MembershipResult(True, kind, p, weights, vertices)

    homogeneous = None
    if use_facets and kind in (ModelKind.NS, ModelKind.LFIC):
        homogeneous = _violated_constraint(model_hrep(kind, s), point)
    if homogeneous is None:
        w, w0 = data
        homogeneous = tuple(-v for v in w) + (-w0,)
    homogeneous = integer_primitive(homogeneous)
    certificate = BellFunctional.from_homogeneous(s, homogeneous, 'lower', f"separator of {kind.value}")
    return MembershipResult(False, kind, p, certificate=certificate, vertices=vertices)
