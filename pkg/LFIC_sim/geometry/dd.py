"""
Conversion between vertex and facet representations by the double description method over exact integers.

Both directions reduce to the same task: the extreme rays of a pointed polyhedral cone {h : row.h >= 0}. Rows are
inserted one at a time in the given order. Each ray carries its set of tight rows as a bitmask, and two rays are
adjacent when their common tight set has at least d - 2 rows and no third ray is tight on all of them.
"""

__all__ = ['extreme_rays', 'affine_hull', 'vertices_to_facets', 'facets_to_vertices', 'is_extreme_point']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import logging
import math
from fractions import Fraction
from typing import Sequence

from LFIC_sim.custom_exceptions import InfeasibleError, UnboundedError
from LFIC_sim.geometry.lp import lp_optimize
from LFIC_sim.geometry.polytope import LinearConstraint, PolytopeH, PolytopeV
from LFIC_sim.geometry.rational import (canonical_equality, integer_primitive, nullspace, rank, reduce_modulo,
                                        rref)
from LFIC_sim.utils.timer import sol_timer


logger = logging.getLogger(__name__)


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v) if a)


def _primitive(v: Sequence[int]) -> tuple:
    g = 0
    for x in v:
        g = math.gcd(g, x)
    return tuple(v) if g in (0, 1) else tuple(x // g for x in v)


def extreme_rays(rows: Sequence[Sequence], dim: int) -> list:
    """
    Extreme rays of the cone {h in Q^dim : row.h >= 0 for every row}, as primitive integer tuples.
    :param rows: constraint rows (rationals allowed, they are scaled to integers)
    :param dim: (int) ambient dimension
    :raises UnboundedError: if the cone is not pointed; the ray is a direction of its lineality space
    """
    rows = [integer_primitive(row) for row in rows]
    if dim == 0:
        return []
    if not rows:
        raise UnboundedError(tuple(Fraction(int(i == 0)) for i in range(dim)), "The cone contains a line.")
    if rank(rows) < dim:
        raise UnboundedError(tuple(nullspace(rows, dim)[0]), "The cone contains a line.")

    # initial simplicial cone from the first rows of full rank
    chosen = []
    for i, row in enumerate(rows):
        if rank([rows[j] for j in chosen] + [row]) > len(chosen):
            chosen.append(i)
            if len(chosen) == dim:
                break
    augmented = [list(rows[i]) + [int(k == j) for k in range(dim)] for j, i in enumerate(chosen)]
    inverse, _ = rref(augmented, 2 * dim)
    rays, zeros = [], []
    for j in range(dim):
        column = integer_primitive([inverse[k][dim + j] for k in range(dim)])
        rays.append(column)
        zeros.append(sum(1 << chosen[k] for k in range(dim) if k != j))

    chosen_set = set(chosen)
    for index, row in enumerate(rows):
        if index in chosen_set:
            continue
        bit = 1 << index
        values = [_dot(row, r) for r in rays]
        pos = [k for k, v in enumerate(values) if v > 0]
        neg = [k for k, v in enumerate(values) if v < 0]
        zero = [k for k, v in enumerate(values) if v == 0]
        new_rays = [rays[k] for k in pos] + [rays[k] for k in zero]
        new_zeros = [zeros[k] for k in pos] + [zeros[k] | bit for k in zero]
        if neg:
            for p in pos:
                for n in neg:
                    common = zeros[p] & zeros[n]
                    if bin(common).count('1') < dim - 2:
                        continue
                    if any(k != p and k != n and (zeros[k] & common) == common for k in range(len(rays))):
                        continue
                    vp, vn = values[p], values[n]
                    combined = _primitive([vp * a - vn * b for a, b in zip(rays[n], rays[p])])
                    new_rays.append(combined)
                    new_zeros.append(common | bit)
        rays, zeros = new_rays, new_zeros
        logger.debug(f"double description: row {index}, {len(rays)} rays")
    unique = {}
    for r in rays:
        unique.setdefault(r, None)
    return list(unique)


def _equality_system(vertices: Sequence[Sequence], dimension: int) -> tuple:
    """
    RREF basis (rows, pivots) of the affine functionals (normal..., offset) vanishing on every vertex.
    """
    generators = [list(v) + [1] for v in vertices]
    basis = nullspace(generators, dimension + 1)
    return rref(basis, dimension + 1) if basis else ([], [])


def affine_hull(v: PolytopeV) -> list:
    """
    Maximal independent list of equalities satisfied by every vertex, in canonical integer form.
    :param v: (PolytopeV) nonempty vertex set
    :return: (list of LinearConstraint)
    """
    if not v.vertices:
        raise ValueError("The affine hull of an empty vertex set is undefined.")
    reduced, _ = _equality_system(v.vertices, v.dimension)
    return [LinearConstraint.from_homogeneous(canonical_equality(row)) for row in reduced]


@sol_timer
def vertices_to_facets(v: PolytopeV) -> PolytopeH:
    """
    Irredundant facet inequalities and affine-hull equalities of conv(vertices). Inequalities are reduced modulo the
    equalities (their entries at the pivot columns of the equality system vanish) and written as primitive integer
    vectors, sorted lexicographically.
    :param v: (PolytopeV) nonempty vertex set
    :return: (PolytopeH)
    """
    if not v.vertices:
        raise ValueError("vertices_to_facets needs at least one vertex.")
    n = v.dimension
    reduced, pivots = _equality_system(v.vertices, n)
    free = [k for k in range(n + 1) if k not in pivots]
    generators = sorted(tuple(v_) + (Fraction(1),) for v_ in v.vertices)
    projected = [[g[k] for k in free] for g in generators]
    rays = extreme_rays(projected, len(free))

    # the functional 1 >= 0 is not a facet
    constant = reduce_modulo([0] * n + [1], reduced, pivots)
    constant_ray = integer_primitive([constant[k] for k in free])
    facets = []
    for ray in rays:
        if ray == constant_ray:
            continue
        full = [0] * (n + 1)
        for k, value in zip(free, ray):
            full[k] = value
        facets.append(integer_primitive(full))
    facets.sort()
    equalities = tuple(LinearConstraint.from_homogeneous(canonical_equality(row)) for row in reduced)
    logger.debug(f"vertices_to_facets: {len(facets)} facets, {len(equalities)} equalities")
    return PolytopeH(n, tuple(LinearConstraint.from_homogeneous(f) for f in facets), equalities)


def is_extreme_point(h: PolytopeH, point: Sequence) -> bool:
    """
    Rank test: the point is extreme iff the constraints tight at it have rank equal to the dimension.
    """
    tight = [c.normal for c in h.inequalities if c.value(point) == 0] + [c.normal for c in h.equalities]
    return h.contains(point) and (rank(tight) if tight else 0) == h.dimension


def _require_feasible(h: PolytopeH) -> None:
    lp_optimize([Fraction(0)] * h.dimension, h)


@sol_timer
def facets_to_vertices(h: PolytopeH, certify: bool = True) -> PolytopeV:
    """
    Extreme points of the bounded polytope h.
    :param h: (PolytopeH)
    :param certify: (bool) confirm every returned point by the rank test of is_extreme_point
    :return: (PolytopeV) vertices in lexicographic order
    :raises UnboundedError: if h is unbounded, naming a certifying ray
    :raises InfeasibleError: if h is empty, with a Farkas certificate
    """
    n = h.dimension
    eq_rows = [list(c.normal) + [c.offset] for c in h.equalities]
    basis = nullspace(eq_rows, n + 1) if eq_rows else [[Fraction(int(i == k)) for i in range(n + 1)]
                                                        for k in range(n + 1)]
    if not basis:
        _require_feasible(h)
    rows = [[sum((a * z for a, z in zip(c.homogeneous, b_k) if a), Fraction(0)) for b_k in basis]
            for c in h.inequalities]
    rows.append([b_k[-1] for b_k in basis])
    try:
        rays = extreme_rays(rows, len(basis))
    except UnboundedError as err:
        _require_feasible(h)
        direction = [sum((w * b_k[i] for w, b_k in zip(err.ray, basis)), Fraction(0)) for i in range(n + 1)]
        raise UnboundedError(tuple(direction[:n]), "The polytope contains a line.")

    vertices, directions = [], []
    for ray in rays:
        z = [sum((w * b_k[i] for w, b_k in zip(ray, basis) if w), Fraction(0)) for i in range(n + 1)]
        if z[-1] > 0:
            vertices.append(tuple(zi / z[-1] for zi in z[:n]))
        else:
            directions.append(tuple(z[:n]))
    if not vertices:
        _require_feasible(h)
        raise InfeasibleError(None, "The polytope has no vertices.")
    if directions:
        raise UnboundedError(directions[0], "The polytope is unbounded.")
    vertices.sort()
    if certify and not all(is_extreme_point(h, vertex) for vertex in vertices):
        raise ArithmeticError("A returned vertex failed the extremality rank test.")
    logger.debug(f"facets_to_vertices: {len(vertices)} vertices")
    return PolytopeV(n, tuple(vertices))
