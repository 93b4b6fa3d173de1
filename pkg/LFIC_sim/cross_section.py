"""
Two-dimensional sections of the correlation sets. A SectionPlane is the affine plane through three behaviors; each
model is intersected with it exactly (polytopes) or along a fan of rays (the moment relaxation of the quantum set).
"""

__all__ = ['SectionPlane', 'Section', 'make_plane', 'anchor_points', 'project_to_affine_hull', 'section_boundary',
           'section_angles', 'is_convex_polygon', 'ANCHORS', 'QUANTUM_PREFIX']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from LFIC_sim.config import definations
from LFIC_sim.custom_exceptions import (CollinearPointsError, InfeasibleError, OutsideAffineHullError,
                                         ScenarioMismatchError)
from LFIC_sim.geometry.dd import facets_to_vertices
from LFIC_sim.geometry.lp import lp_optimize, simplex
from LFIC_sim.geometry.polytope import LinearConstraint, PolytopeH
from LFIC_sim.geometry.rational import integer_primitive, rank, solve
from LFIC_sim.models import ModelKind, model_hrep, model_vertices, ns_hrep
from LFIC_sim.npa.boundary import boundary_fan
from LFIC_sim.npa.moments import LEVELS
from LFIC_sim.presets import table_point
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario, to_fraction
from LFIC_sim.utils.constants import NumericalTolerances
from LFIC_sim.utils.timer import sol_timer


logger = logging.getLogger(__name__)

ZERO = Fraction(0)
QUANTUM_PREFIX = 'npa-'
ANCHORS = ('published', 'projected')


def _exact_vector(p: Behavior) -> tuple:
    if not p.exact:
        p = p.rationalize()
    return tuple(p.vector.tolist())


@dataclass
class SectionPlane:
    """
    The plane origin + s e1 + t e2 through three behaviors, anchored at their centroid with e1 = q1 - n0 and
    e2 = q2 - n0 (exact chart). Plot coordinates come from the Gram-Schmidt orthonormalization u1, u2 of e1, e2:
    xy = chart (s, t), where chart is the upper-triangular matrix of orthonormalization coefficients.
    """
    names: tuple
    points: tuple
    origin_exact: tuple
    directions_exact: tuple
    origin: np.ndarray
    basis: np.ndarray
    chart: np.ndarray

    @property
    def scenario(self):
        return self.points[0].scenario

    def exact_coordinates(self, p: Behavior) -> tuple:
        """Chart coordinates (s, t) of a behavior in the plane, exactly."""
        if p.scenario != self.scenario:
            raise ScenarioMismatchError(p.scenario, self.scenario)
        e1, e2 = self.directions_exact
        rhs = [v - o for v, o in zip(_exact_vector(p), self.origin_exact)]
        st = solve([[a, b] for a, b in zip(e1, e2)], rhs)
        if st is None:
            raise ValueError(f"{p.name or 'behavior'} does not lie in the plane.")
        return tuple(st)

    def coordinates(self, p: Union[Behavior, np.ndarray]) -> np.ndarray:
        """Orthogonal projection onto the plane, in plot coordinates."""
        vector = p.vector.astype(float) if isinstance(p, Behavior) else np.asarray(p, dtype=float).reshape(-1)
        return self.basis @ (vector - self.origin)

    def embed(self, xy: Sequence[float], name: Optional[str] = None) -> Behavior:
        return Behavior(self.scenario, self.origin + self.basis.T @ np.asarray(xy, dtype=float), exact=False,
                        name=name)

    def to_plot(self, st: Sequence) -> np.ndarray:
        return self.chart @ np.array([float(v) for v in st])

    def direction(self, angle: float) -> np.ndarray:
        """Unit vector in behavior space along the plot angle."""
        return self.basis.T @ np.array([math.cos(angle), math.sin(angle)])

    def exact_direction(self, angle: float) -> tuple:
        """Chart direction of the plot angle, rounded to rationals with DIRECTION_DENOMINATOR_CAP."""
        ds, dt = np.linalg.solve(self.chart, [math.cos(angle), math.sin(angle)])
        cap = NumericalTolerances.DIRECTION_DENOMINATOR_CAP
        return to_fraction(float(ds), cap), to_fraction(float(dt), cap)

    def point_on_plane(self, st: Sequence) -> tuple:
        e1, e2 = self.directions_exact
        return tuple(o + st[0] * a + st[1] * b for o, a, b in zip(self.origin_exact, e1, e2))

    def markers(self) -> dict:
        return {name: self.coordinates(p) for name, p in zip(self.names, self.points)}

    def __repr__(self):
        return f"SectionPlane({', '.join(self.names)})"


def make_plane(n0: Behavior, q1: Behavior, q2: Behavior) -> SectionPlane:
    """
    Plane through the three behaviors.
    :raises CollinearPointsError: if the points are not affinely independent
    :raises ScenarioMismatchError: if the behaviors belong to different scenarios
    """
    for p in (q1, q2):
        if p.scenario != n0.scenario:
            raise ScenarioMismatchError(n0.scenario, p.scenario)
    exact = [_exact_vector(p) for p in (n0, q1, q2)]
    e1 = tuple(v - w for v, w in zip(exact[1], exact[0]))
    e2 = tuple(v - w for v, w in zip(exact[2], exact[0]))
    if rank([e1, e2]) < 2:
        raise CollinearPointsError()
    origin_exact = tuple((a + b + c) / 3 for a, b, c in zip(*exact))

    floats = [p.vector.astype(float) for p in (n0, q1, q2)]
    f1, f2 = floats[1] - floats[0], floats[2] - floats[0]
    n1 = np.linalg.norm(f1)
    u1 = f1 / n1
    projection = u1 @ f2
    w = f2 - projection * u1
    n2 = np.linalg.norm(w)
    u2 = w / n2
    chart = np.array([[n1, projection], [0.0, n2]])
    names = tuple(p.name or default for p, default in zip((n0, q1, q2), ('P0', 'P1', 'P2')))
    plane = SectionPlane(names, (n0, q1, q2), origin_exact, (e1, e2), sum(floats) / 3, np.vstack([u1, u2]), chart)
    logger.debug(f"make_plane: {plane}, markers {plane.markers()}")
    return plane


def _marginal_chart(s: Scenario) -> list:
    """
    Directions in behavior space of the marginal coordinates p(A_x=a), p(B_y=b), p(A_x=a, B_y=b) for a, b >= 1.
    Moving along one of them changes that coordinate alone and keeps every no-signaling equality.
    """
    def unit(changes):
        table = np.full(s.shape, ZERO, dtype=object)
        for (x, y, a, b), sign in changes:
            table[x, y, a, b] += sign
        return tuple(table.reshape(-1).tolist())

    directions = []
    for x, y in itertools.product(range(s.alice_inputs), range(s.bob_inputs)):
        for a, b in itertools.product(range(1, s.alice_outputs), range(1, s.bob_outputs)):
            directions.append(unit([((x, y, a, b), 1), ((x, y, a, 0), -1), ((x, y, 0, b), -1), ((x, y, 0, 0), 1)]))
    for x, a in itertools.product(range(s.alice_inputs), range(1, s.alice_outputs)):
        directions.append(unit([(c, sign) for y in range(s.bob_inputs)
                                for c, sign in (((x, y, a, 0), 1), ((x, y, 0, 0), -1))]))
    for y, b in itertools.product(range(s.bob_inputs), range(1, s.bob_outputs)):
        directions.append(unit([(c, sign) for x in range(s.alice_inputs)
                                for c, sign in (((x, y, 0, b), 1), ((x, y, 0, 0), -1))]))
    return directions


def project_to_affine_hull(p: Behavior, kind: Union[ModelKind, str] = ModelKind.LFIC) -> Behavior:
    """
    Exact orthogonal projection of a behavior onto the affine hull of a model, measured in the marginal
    coordinates. The behavior must satisfy the no-signaling equalities; a behavior already in the hull is returned
    unchanged.
    :raises OutsideAffineHullError: if p leaves the no-signaling affine hull
    """
    kind = ModelKind.from_name(kind)
    s = p.scenario
    v = _exact_vector(p)
    directions = _marginal_chart(s)
    rows, residuals = [], []
    if any(c.value(v) != 0 for c in ns_hrep(s).equalities):
        raise OutsideAffineHullError()
    for c in model_hrep(kind, s).equalities:
        row = [sum((n * d for n, d in zip(c.normal, direction) if n), ZERO) for direction in directions]
        residual = c.value(v)
        if any(row) and rank(rows + [row]) > len(rows):
            rows.append(row)
            residuals.append(residual)
    if not any(residuals):
        return p
    gram = [[sum((a * b for a, b in zip(r, q)), ZERO) for q in rows] for r in rows]
    multipliers = solve(gram, residuals)
    shift = [-sum((row[k] * m for row, m in zip(rows, multipliers)), ZERO) for k in range(len(directions))]
    projected = list(v)
    for step, direction in zip(shift, directions):
        if step:
            projected = [w + step * d for w, d in zip(projected, direction)]
    logger.debug(f"project_to_affine_hull: {p.name} moved by {[str(r) for r in residuals]}")
    name = f"{p.name}'" if p.name else None
    return Behavior.from_vector(s, projected, exact=True, name=name)


def anchor_points(anchor: str = 'published') -> tuple:
    """
    Defining points of the section plane, in make_plane order.
    'published': N0, Q1, Q2 from the marginal table.
    'projected': Q2 projected onto the LFIC affine hull, Q1 and white noise. N0 violates A7 and the segment from N0
    to white noise meets the hull only at white noise, so white noise takes its place. The whole plane then lies in
    the hull and the LFIC section is a polygon around white noise.
    """
    if anchor == 'published':
        return table_point('N0'), table_point('Q1'), table_point('Q2')
    if anchor == 'projected':
        s = Scenario.main()
        q1 = project_to_affine_hull(table_point('Q1'))
        q2 = project_to_affine_hull(table_point('Q2'))
        return q2, q1, Behavior.uniform(s)
    raise ValueError(f"Unknown plane anchor '{anchor}'. Available anchors: {', '.join(ANCHORS)}.")


@dataclass
class Section:
    """
    Intersection of one model with the plane.
    boundary holds one plot point per angle: the exit point of the ray from ray_origin for NS, LFIC and the quantum
    relaxation, the support point in the angle's direction for LHV and LF. polygon holds the exact vertices in
    counter-clockwise plot order (polytope models only). An empty section carries a BellFunctional certificate that
    is nonnegative on the model and negative on every point of the plane.
    """
    model: str
    angles: np.ndarray
    boundary: np.ndarray
    empty: bool = False
    polygon: Optional[np.ndarray] = None
    exact_vertices: tuple = ()
    certificate: Optional[BellFunctional] = None
    ray_origin: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)

    def __str__(self):
        if self.empty:
            return f"{self.model}: empty"
        return f"{self.model}: {len(self.angles)} boundary points"


def section_angles(resolution: int) -> np.ndarray:
    if resolution < 3:
        raise ValueError("The angular resolution needs at least 3 rays.")
    return 2 * np.pi * np.arange(resolution) / resolution


def _counter_clockwise(points: np.ndarray, exact: Sequence = ()) -> tuple:
    center = points.mean(axis=0)
    order = np.argsort(np.arctan2(points[:, 1] - center[1], points[:, 0] - center[0]), kind='stable')
    return points[order], tuple(exact[i] for i in order) if exact else ()


def is_convex_polygon(points: np.ndarray, tol: float = 1e-12) -> bool:
    """Cross products of consecutive edges keep one sign (collinear edges allowed)."""
    points = np.asarray(points, dtype=float)
    if len(points) < 3:
        return True
    edges = np.roll(points, -1, axis=0) - points
    cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
    return bool(np.all(cross >= -tol) or np.all(cross <= tol))


def _restrict(h: PolytopeH, plane: SectionPlane) -> tuple:
    """
    The H-representation in chart coordinates. Constraints that are trivially satisfied on the plane are dropped;
    kept records the original index of every remaining row as ('ineq' | 'eq', index).
    """
    e1, e2 = plane.directions_exact
    inequalities, equalities, kept = [], [], []

    def pull_back(c):
        normal = (sum((n * v for n, v in zip(c.normal, e1) if n), ZERO),
                  sum((n * v for n, v in zip(c.normal, e2) if n), ZERO))
        return LinearConstraint(normal, c.value(plane.origin_exact))

    for i, c in enumerate(h.inequalities):
        r = pull_back(c)
        if r.normal == (0, 0) and r.offset >= 0:
            continue
        inequalities.append(r)
        kept.append(('ineq', i))
    for i, c in enumerate(h.equalities):
        r = pull_back(c)
        if r.normal == (0, 0) and r.offset == 0:
            continue
        equalities.append(r)
        kept.append(('eq', i))
    return PolytopeH(2, tuple(inequalities), tuple(equalities)), kept


def _lift_certificate(h: PolytopeH, kept: list, certificate) -> list:
    """Farkas multipliers of the restricted system combined into one homogeneous functional on behavior space."""
    combined = [ZERO] * (h.dimension + 1)
    inequality_rows = [index for kind, index in kept if kind == 'ineq']
    equality_rows = [index for kind, index in kept if kind == 'eq']
    for mu, i in zip(certificate.inequality_multipliers, inequality_rows):
        combined = [c + mu * v for c, v in zip(combined, h.inequalities[i].homogeneous)]
    for nu, i in zip(certificate.equality_multipliers, equality_rows):
        combined = [c + nu * v for c, v in zip(combined, h.equalities[i].homogeneous)]
    return combined


def _ray_exit(h2: PolytopeH, center: tuple, direction: tuple) -> Fraction:
    """
    Largest r with center + r direction in h2, by the exact ratio test (the optimum of this one-variable LP).
    """
    best = None
    for c in h2.equalities:
        if c.normal[0] * direction[0] + c.normal[1] * direction[1] != 0:
            return ZERO
    for c in h2.inequalities:
        slope = c.normal[0] * direction[0] + c.normal[1] * direction[1]
        if slope < 0:
            bound = c.value(center) / -slope
            best = bound if best is None or bound < best else best
    if best is None:
        raise ValueError("The section is unbounded along the ray.")
    return best


def _h_section(kind: ModelKind, plane: SectionPlane, angles: np.ndarray) -> Section:
    s = plane.scenario
    h = model_hrep(kind, s)
    h2, kept = _restrict(h, plane)
    try:
        lp_optimize([ZERO, ZERO], h2)
    except InfeasibleError as err:
        combined = _lift_certificate(h, kept, err.certificate)
        certificate = BellFunctional.from_homogeneous(s, integer_primitive(combined), 'lower',
                                                      f"{kind.value} plane separator")
        logger.info(f"section {kind.value}: empty")
        return Section(kind.value, angles, np.empty((0, 2)), empty=True, certificate=certificate)

    vertices = facets_to_vertices(h2).vertices
    center = tuple(sum(v[k] for v in vertices) / len(vertices) for k in range(2))
    points = []
    for angle in angles:
        d = plane.exact_direction(angle)
        r = _ray_exit(h2, center, d)
        points.append(plane.to_plot((center[0] + r * d[0], center[1] + r * d[1])))
    polygon, ordered = _counter_clockwise(np.array([plane.to_plot(v) for v in vertices]), vertices)
    logger.info(f"section {kind.value}: polygon with {len(vertices)} vertices")
    return Section(kind.value, angles, np.array(points), polygon=polygon, exact_vertices=ordered,
                   ray_origin=plane.to_plot(center))


def _v_system(kind: ModelKind, plane: SectionPlane) -> tuple:
    """
    Columns lambda_1..lambda_k, s+, s-, t+, t- of sum lambda v - s e1 - t e2 = origin, sum lambda = 1.
    """
    vertices = model_vertices(kind, plane.scenario).vertices
    e1, e2 = plane.directions_exact
    dim = plane.scenario.dimension
    A = [[v[i] for v in vertices] + [-e1[i], e1[i], -e2[i], e2[i]] for i in range(dim)]
    A.append([Fraction(1)] * len(vertices) + [ZERO] * 4)
    b = list(plane.origin_exact) + [Fraction(1)]
    return A, b, len(vertices)


def _v_section(kind: ModelKind, plane: SectionPlane, angles: np.ndarray) -> Section:
    s = plane.scenario
    A, b, k = _v_system(kind, plane)
    result = simplex([ZERO] * (k + 4), A, b)
    if result.status == 'infeasible':
        # y with A^T y <= 0, b.y > 0: the functional -(w.p + w0) is >= 0 on the vertices and < 0 on the plane
        w, w0 = result.farkas[:-1], result.farkas[-1]
        homogeneous = integer_primitive(tuple(-v for v in w) + (-w0,))
        certificate = BellFunctional.from_homogeneous(s, homogeneous, 'lower', f"{kind.value} plane separator")
        logger.info(f"section {kind.value}: empty")
        return Section(kind.value, angles, np.empty((0, 2)), empty=True, certificate=certificate)

    cap = NumericalTolerances.DIRECTION_DENOMINATOR_CAP
    points, exact = [], []
    for angle in angles:
        phi = plane.chart.T @ np.array([math.cos(angle), math.sin(angle)])
        fs, ft = (to_fraction(float(v), cap) for v in phi)
        support = simplex([ZERO] * k + [-fs, fs, -ft, ft], A, b)
        st = (support.x[k] - support.x[k + 1], support.x[k + 2] - support.x[k + 3])
        points.append(plane.to_plot(st))
        exact.append(st)
    unique = list(dict.fromkeys(exact))
    polygon, ordered = _counter_clockwise(np.array([plane.to_plot(v) for v in unique]), unique)
    logger.info(f"section {kind.value}: {len(unique)} support points")
    return Section(kind.value, angles, np.array(points), polygon=polygon, exact_vertices=ordered)


def _quantum_section(level: str, plane: SectionPlane, angles: np.ndarray, method: str,
                     threads: Optional[int]) -> Section:
    """Rays from the midpoint of the second and third defining points, which are quantum for both anchor choices."""
    start = (plane.points[1].vector.astype(float) + plane.points[2].vector.astype(float)) / 2
    origin = Behavior(plane.scenario, start, exact=False, name='ray origin')
    origin_xy = plane.coordinates(start)
    directions = [plane.direction(angle) for angle in angles]
    radii = boundary_fan(origin, directions, level=level, method=method, threads=threads)
    points = np.array([origin_xy + t * np.array([math.cos(a), math.sin(a)]) for t, a in zip(radii, angles)])
    logger.info(f"section {QUANTUM_PREFIX}{level}: {len(angles)} rays")
    return Section(f"{QUANTUM_PREFIX}{level}", angles, points, ray_origin=origin_xy, extras={'radii': radii})


def _target(model) -> tuple:
    if isinstance(model, ModelKind):
        return 'polytope', model
    name = str(model).lower()
    if name == 'quantum':
        return 'quantum', definations.DEFAULT_NPA_LEVEL
    if name.startswith(QUANTUM_PREFIX):
        level = str(model)[len(QUANTUM_PREFIX):]
        if level not in LEVELS:
            raise ValueError(f"Unknown relaxation level '{level}'. Available levels: {', '.join(LEVELS)}.")
        return 'quantum', level
    return 'polytope', ModelKind.from_name(name)


@sol_timer
def section_boundary(model: Union[ModelKind, str], plane: SectionPlane,
                     resolution: Optional[int] = None, method: str = 'bisection',
                     threads: Optional[int] = None) -> Section:
    """
    Intersects a model with the plane.
    :param model: ModelKind or its name, 'quantum' for the default relaxation level, or 'npa-<level>'
    :param plane: (SectionPlane)
    :param resolution: (int) number of rays; DEFAULT_ANGULAR_RESOLUTION for polytopes,
        DEFAULT_QUANTUM_RESOLUTION for the relaxation
    :param method: 'bisection' or 'direct', used by the relaxation only
    :return: (Section)
    :raises ValueError: for fewer than 3 rays
    """
    kind, target = _target(model)
    if resolution is None:
        resolution = (definations.DEFAULT_QUANTUM_RESOLUTION if kind == 'quantum'
                      else definations.DEFAULT_ANGULAR_RESOLUTION)
    angles = section_angles(resolution)
    if kind == 'quantum':
        return _quantum_section(target, plane, angles, method, threads)
    if target in (ModelKind.NS, ModelKind.LFIC):
        return _h_section(target, plane, angles)
    return _v_section(target, plane, angles)
