#  Copyright (c) 2024. LFIC_sim developers. All rights reserved.

import itertools
import unittest
from fractions import Fraction

import numpy as np

from LFIC_sim.custom_exceptions import DocumentParseError, InfeasibleError, UnboundedError
from LFIC_sim.geometry.dd import affine_hull, facets_to_vertices, is_extreme_point, vertices_to_facets
from LFIC_sim.geometry.lp import convex_combination, lp_optimize, simplex
from LFIC_sim.geometry.polytope import LinearConstraint, PolytopeH, PolytopeV, polytope_from_text, polytope_to_text
from LFIC_sim.geometry.rational import canonical_equality, integer_primitive, nullspace, rank, rref, solve


def unit_square() -> PolytopeH:
    return PolytopeH(2, ((1, 0, 0), (0, 1, 0), (-1, 0, 1), (0, -1, 1)))


def unit_cube() -> PolytopeV:
    return PolytopeV(3, tuple(itertools.product((0, 1), repeat=3)))


def dot(u, v) -> Fraction:
    return sum((Fraction(a) * Fraction(b) for a, b in zip(u, v)), Fraction(0))


def brute_force_facets(points: list) -> set:
    """Planes through three of the points with every point on one side, as primitive integer vectors."""
    facets = set()
    for p, q, r in itertools.combinations(points, 3):
        u, w = [b - a for a, b in zip(p, q)], [b - a for a, b in zip(p, r)]
        normal = (u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0])
        if normal == (0, 0, 0):
            continue
        for sign in (1, -1):
            n = tuple(sign * c for c in normal)
            offset = -dot(n, p)
            if all(dot(n, v) + offset >= 0 for v in points):
                facets.add(integer_primitive(n + (offset,)))
    return facets


class TestRational(unittest.TestCase):
    def test_rref(self):
        reduced, pivots = rref([[2, 4, 2], [1, 2, 3]])
        self.assertEqual([0, 2], pivots)
        self.assertEqual([[1, 2, 0], [0, 0, 1]], reduced)

    def test_rank(self):
        self.assertEqual(1, rank([[1, 2], [2, 4]]))
        self.assertEqual(2, rank([[1, 2], [Fraction(1, 2), 0]]))

    def test_nullspace(self):
        rows = [[1, 1, 0], [0, 1, -1]]
        basis = nullspace(rows, 3)
        self.assertEqual(1, len(basis))
        for row in rows:
            self.assertEqual(0, dot(row, basis[0]))

    def test_solve(self):
        self.assertEqual([Fraction(1, 2), Fraction(1, 3)], solve([[2, 0], [0, 3]], [1, 1]))
        self.assertIsNone(solve([[1, 1], [2, 2]], [1, 3]))

    def test_integer_forms(self):
        self.assertEqual((3, -2), integer_primitive([Fraction(1, 2), Fraction(-1, 3)]))
        self.assertEqual((-3, 2), integer_primitive([Fraction(-1, 2), Fraction(1, 3)]))
        self.assertEqual((1, -2), canonical_equality([-2, 4]))
        self.assertEqual((0, 0), integer_primitive([0, 0]))


class TestPolytope(unittest.TestCase):
    def test_constraint(self):
        c = LinearConstraint((2, -4), 6)
        self.assertEqual(Fraction(6), c.value((1, 1)) + 2)
        self.assertEqual((1, -2, 3), c.canonical())
        self.assertEqual(c, LinearConstraint.from_homogeneous(c.homogeneous))

    def test_duplicate_vertices_merge(self):
        v = PolytopeV(2, ((0, 0), (1, 0), (0, 0)))
        self.assertEqual(2, len(v))
        self.assertIn((Fraction(1), 0), v)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            PolytopeV(2, ((0, 0, 0),))
        with self.assertRaises(ValueError):
            PolytopeH(2, ((1, 0),))

    def test_contains(self):
        h = unit_square()
        self.assertTrue(h.contains((Fraction(1, 2), 1)))
        self.assertFalse(h.contains((2, 0)))
        self.assertEqual([2], h.violated((2, 0)))

    def test_text_round_trip(self):
        h = unit_square().with_equalities([LinearConstraint((1, -1), 0)])
        back = polytope_from_text(polytope_to_text(h, header=['square diagonal']))
        self.assertEqual(h.facet_set(), back.facet_set())
        self.assertEqual(h.equalities, back.equalities)
        v = PolytopeV(2, ((0, 0), (Fraction(1, 3), 1)))
        self.assertEqual(v.vertex_set(), polytope_from_text(polytope_to_text(v)).vertex_set())

    def test_text_linearity_line(self):
        h = unit_square().with_equalities([LinearConstraint((1, -1), 0)])
        self.assertIn("linearity 1 5", polytope_to_text(h))

    def test_parse_error_location(self):
        text = "H-representation\nbegin\n1 2 rational\n1 abc\nend\n"
        with self.assertRaises(DocumentParseError) as context:
            polytope_from_text(text)
        self.assertEqual(4, context.exception.line)
        self.assertEqual(3, context.exception.column)

    def test_parse_missing_end(self):
        with self.assertRaises(DocumentParseError):
            polytope_from_text("V-representation\nbegin\n1 2 rational\n1 0\n")


class TestSimplex(unittest.TestCase):
    def test_optimal_with_duals(self):
        c = [-1, -1, 0, 0]
        A = [[1, 0, 1, 0], [0, 1, 0, 1]]
        b = [1, 1]
        result = simplex(c, A, b)
        self.assertEqual('optimal', result.status)
        self.assertEqual(Fraction(-2), result.value)
        self.assertEqual(result.value, dot(b, result.y))
        for j in range(len(c)):
            self.assertGreaterEqual(c[j] - sum(A[i][j] * result.y[i] for i in range(len(A))), 0)

    def test_infeasible_farkas(self):
        A = [[1, 1]]
        b = [-1]
        result = simplex([0, 0], A, b)
        self.assertEqual('infeasible', result.status)
        self.assertGreater(dot(b, result.farkas), 0)
        for j in range(2):
            self.assertLessEqual(sum(A[i][j] * result.farkas[i] for i in range(len(A))), 0)

    def test_unbounded_ray(self):
        A = [[1, -1]]
        result = simplex([-1, 0], A, [0])
        self.assertEqual('unbounded', result.status)
        self.assertTrue(all(d >= 0 for d in result.ray))
        self.assertEqual(0, dot(A[0], result.ray))
        self.assertLess(dot([-1, 0], result.ray), 0)

    def test_redundant_rows(self):
        result = simplex([1, 1], [[1, 1], [2, 2]], [1, 2])
        self.assertEqual('optimal', result.status)
        self.assertEqual(Fraction(1), result.value)


class TestLPOptimize(unittest.TestCase):
    def test_primal_equals_dual(self):
        h = unit_square()
        objective = LinearConstraint((1, 2), 1)
        result = lp_optimize(objective, h, sense='max')
        self.assertEqual(Fraction(4), result.optimum)
        self.assertEqual((Fraction(1), Fraction(1)), result.argument)
        self.assertTrue(result.verify(objective, h))
        result = lp_optimize([1, 2, 1], h, sense='min')
        self.assertEqual(Fraction(1), result.optimum)
        self.assertTrue(result.verify(LinearConstraint((1, 2), 1), h))

    def test_equalities(self):
        h = unit_square().with_equalities([LinearConstraint((1, 1), Fraction(-1, 2))])
        objective = LinearConstraint((1, 0), 0)
        result = lp_optimize(objective, h, sense='max')
        self.assertEqual(Fraction(1, 2), result.optimum)
        self.assertTrue(result.verify(objective, h))

    def test_infeasible(self):
        h = PolytopeH(1, ((1, -1), (-1, 0)))
        with self.assertRaises(InfeasibleError) as context:
            lp_optimize([0], h)
        self.assertTrue(context.exception.certificate.verify(h))

    def test_unbounded(self):
        with self.assertRaises(UnboundedError):
            lp_optimize([1], PolytopeH(1, ((1, 0),)), sense='max')

    def test_bad_arguments(self):
        with self.assertRaises(ValueError):
            lp_optimize([1, 0], unit_square(), sense='maximize')
        with self.assertRaises(ValueError):
            lp_optimize([1, 0, 0, 0], unit_square())

    def test_convex_combination(self):
        triangle = [(0, 0), (1, 0), (0, 1)]
        status, weights = convex_combination(triangle, (Fraction(1, 4), Fraction(1, 4)))
        self.assertEqual('inside', status)
        self.assertEqual(Fraction(1), sum(weights))
        for k in range(2):
            self.assertEqual(Fraction(1, 4), sum(w * v[k] for w, v in zip(weights, triangle)))
        status, (w, w0) = convex_combination(triangle, (1, 1))
        self.assertEqual('outside', status)
        self.assertGreater(dot(w, (1, 1)) + w0, 0)
        for vertex in triangle:
            self.assertLessEqual(dot(w, vertex) + w0, 0)


class TestDoubleDescription(unittest.TestCase):
    def test_cube(self):
        h = vertices_to_facets(unit_cube())
        self.assertEqual(6, len(h.inequalities))
        self.assertEqual(0, len(h.equalities))
        expected = {(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (-1, 0, 0, 1), (0, -1, 0, 1), (0, 0, -1, 1)}
        self.assertEqual(expected, set(h.facet_set()))
        self.assertEqual(unit_cube().vertex_set(), facets_to_vertices(h).vertex_set())

    def test_redundant_points_are_dropped(self):
        points = unit_cube().vertices + ((Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)),)
        h = vertices_to_facets(PolytopeV(3, points))
        self.assertEqual(unit_cube().vertex_set(), facets_to_vertices(h).vertex_set())

    def test_simplex_with_affine_hull(self):
        v = PolytopeV(3, ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
        self.assertEqual([LinearConstraint((1, 1, 1), -1)], affine_hull(v))
        h = vertices_to_facets(v)
        self.assertEqual(3, len(h.inequalities))
        self.assertEqual(1, len(h.equalities))
        for vertex in v.vertices:
            self.assertTrue(h.contains(vertex))
        self.assertFalse(h.contains((Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))))
        self.assertEqual(v.vertex_set(), facets_to_vertices(h).vertex_set())

    def test_single_point(self):
        v = PolytopeV(2, ((Fraction(1, 2), 3),))
        h = vertices_to_facets(v)
        self.assertEqual(0, len(h.inequalities))
        self.assertEqual(2, len(h.equalities))
        self.assertEqual(v.vertex_set(), facets_to_vertices(h).vertex_set())

    def test_matches_brute_force_search(self):
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 12:
            size = int(rng.integers(4, 9))
            points = sorted({tuple(int(c) for c in row) for row in rng.integers(-3, 4, size=(size, 3))})
            if len(points) < 4 or rank([[b - a for a, b in zip(points[0], v)] for v in points[1:]]) < 3:
                continue
            h = vertices_to_facets(PolytopeV(3, tuple(points)))
            self.assertEqual(0, len(h.equalities), points)
            self.assertEqual(brute_force_facets(points), set(h.facet_set()), points)
            checked += 1

    def test_extreme_point(self):
        h = unit_square()
        self.assertTrue(is_extreme_point(h, (1, 0)))
        self.assertFalse(is_extreme_point(h, (Fraction(1, 2), 0)))
        self.assertFalse(is_extreme_point(h, (2, 0)))

    def test_unbounded(self):
        with self.assertRaises(UnboundedError):
            facets_to_vertices(PolytopeH(1, ((1, 0),)))
        with self.assertRaises(UnboundedError):
            facets_to_vertices(PolytopeH(2, ((1, 0, 0), (-1, 0, 1))))

    def test_infeasible(self):
        with self.assertRaises(InfeasibleError):
            facets_to_vertices(PolytopeH(1, ((1, -1), (-1, 0))))

    def test_empty_vertex_set(self):
        with self.assertRaises(ValueError):
            vertices_to_facets(PolytopeV(2, ()))


if __name__ == '__main__':
    unittest.main()
