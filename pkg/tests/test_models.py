#  Copyright (c) 2024. LFIC_sim developers. All rights reserved.

import unittest
from fractions import Fraction

import LFIC_sim
from LFIC_sim.custom_exceptions import ScenarioShapeError
from LFIC_sim.geometry.lp import lp_optimize
from LFIC_sim.geometry.polytope import LinearConstraint
from LFIC_sim.geometry.rational import rank
from LFIC_sim.models import (ModelKind, facet_census, lf_vertices, lfic_block_hrep, lfic_vertices, lhv_vertices,
                             membership, model_hrep, model_vertices, ns_hrep)
from LFIC_sim.scenario import Behavior, Scenario, evaluate


def in_span(equalities, homogeneous) -> bool:
    rows = [list(c.homogeneous) for c in equalities]
    return rank(rows + [list(homogeneous)]) == rank(rows)


class TestModelKind(unittest.TestCase):
    def test_from_name(self):
        self.assertIs(ModelKind.LFIC, ModelKind.from_name('LFIC'))
        self.assertIs(ModelKind.NS, ModelKind.from_name(ModelKind.NS))
        with self.assertRaises(ValueError):
            ModelKind.from_name('quantum')


class TestVertexSets(unittest.TestCase):
    s = Scenario.main()

    def test_counts(self):
        self.assertEqual(108, len(lhv_vertices(self.s)))
        self.assertEqual(12, len(lf_vertices(self.s)))
        self.assertEqual(72, len(lfic_vertices(self.s)))

    def test_vertices_are_behaviors(self):
        for vertex in lfic_vertices(self.s).vertices[::7]:
            self.assertTrue(LFIC_sim.validate(Behavior.from_vector(self.s, vertex)).passed)

    def test_block_constraints(self):
        block = lfic_block_hrep(self.s, 1)
        for vertex in lf_vertices(self.s).vertices:
            p = Behavior.from_vector(self.s, vertex)
            # LF vertices answer c on every input, so only the c = 1 ones fit the block
            self.assertEqual(p.alice_marginal(1, 0) == 1, block.contains(vertex))
        with self.assertRaises(ScenarioShapeError):
            lfic_block_hrep(self.s, 3)

    def test_lfic_needs_square_alice(self):
        with self.assertRaises(ScenarioShapeError):
            lfic_vertices(Scenario(2, 3, 2, 2))

    def test_ns_equalities(self):
        self.assertEqual(36, len(ns_hrep(self.s).inequalities))
        self.assertEqual(16, len(ns_hrep(self.s).equalities))


class TestCHSHScenario(unittest.TestCase):
    s = Scenario.chsh()

    def test_local_polytope_facets(self):
        h = model_hrep(ModelKind.LHV, self.s)
        self.assertEqual(16, len(lhv_vertices(self.s)))
        self.assertEqual(24, len(h.inequalities))
        ch = LFIC_sim.ch_functional()
        # the CH expression is a facet of the local polytope
        self.assertEqual(Fraction(0), lp_optimize(LinearConstraint.from_homogeneous(ch.homogeneous()), h).optimum)

    def test_ns_vertices(self):
        self.assertEqual(24, len(model_vertices(ModelKind.NS, self.s)))

    def test_pr_box_membership(self):
        pr = Behavior.from_function(self.s, lambda a, b, x, y: Fraction(int((a + b) % 2 == x * y), 2))
        self.assertTrue(membership(pr, 'ns').inside)
        result = membership(pr, 'lhv')
        self.assertFalse(result.inside)
        self.assertLess(evaluate(result.certificate, pr), 0)
        for vertex in lhv_vertices(self.s).vertices:
            self.assertGreaterEqual(evaluate(result.certificate, Behavior.from_vector(self.s, vertex)), 0)


class TestLFICPolytope(unittest.TestCase):
    s = Scenario.main()

    @classmethod
    def setUpClass(cls):
        cls.census = facet_census(cls.s)

    def test_facet_counts(self):
        self.assertEqual(60, len(self.census.hrep.inequalities))
        self.assertEqual(32, len(self.census.strict))
        self.assertEqual(28, len(self.census.ns_coincident))
        self.assertIn("60 facets", str(self.census))

    def test_affine_hull_equalities(self):
        equalities = self.census.equalities
        for c in ns_hrep(self.s).equalities:
            self.assertTrue(in_span(equalities, c.homogeneous))
        for name in ('A5', 'A6', 'A7'):
            self.assertTrue(in_span(equalities, LFIC_sim.functional(name).homogeneous()), name)
        self.assertFalse(in_span(equalities, LFIC_sim.functional('Z1').homogeneous()))

    def test_facets_valid_on_vertices(self):
        vertices = lfic_vertices(self.s).vertices
        for facet in self.census.hrep.inequalities:
            values = [facet.value(v) for v in vertices]
            self.assertGreaterEqual(min(values), 0)
            self.assertEqual(0, min(values))

    def test_lf_inside_lfic(self):
        h = self.census.hrep
        for vertex in lf_vertices(self.s).vertices:
            self.assertTrue(h.contains(vertex))

    def test_z_bounds(self):
        h = self.census.hrep
        for name in ('Z1', 'Z2', 'A3', 'A4'):
            objective = LinearConstraint.from_homogeneous(LFIC_sim.functional(name).homogeneous())
            result = lp_optimize(objective, h)
            self.assertEqual(Fraction(0), result.optimum, name)
            self.assertTrue(result.verify(objective, h))

    def test_membership_of_table_points(self):
        q1 = LFIC_sim.table_point('Q1')
        result = membership(q1, ModelKind.LFIC)
        self.assertFalse(result.inside)
        self.assertLess(evaluate(result.certificate, q1), 0)
        self.assertTrue(membership(LFIC_sim.table_point('N0'), 'ns').inside)
        self.assertFalse(membership(LFIC_sim.table_point('N0'), 'lfic').inside)

    def test_membership_reconstructs_point(self):
        p = Behavior.uniform(self.s)
        result = membership(p, 'lf')
        self.assertTrue(result.inside)
        self.assertEqual(tuple(p.vector.tolist()), result.reconstruct())
        self.assertTrue(all(w > 0 for w in result.weights.values()))
        self.assertTrue(membership(p, 'lfic').inside)

    def test_uniform_behavior_decomposes_over_friend_outcomes(self):
        # block c: Alice answers c on input c and avoids a = x elsewhere, Bob is uniform and independent
        def block(c):
            def alice(a, x):
                if x == c:
                    return Fraction(int(a == c))
                return Fraction(0) if a == x else Fraction(1, 2)
            return Behavior.from_function(self.s, lambda a, b, x, y: alice(a, x) * Fraction(1, 2))

        blocks = [block(c) for c in range(3)]
        for c, p in enumerate(blocks):
            self.assertTrue(lfic_block_hrep(self.s, c).contains(tuple(p.vector.tolist())), c)
            self.assertTrue(membership(p, 'lfic', use_facets=False).inside, c)
        mixture = [sum(p.vector[i] for p in blocks) / 3 for i in range(self.s.dimension)]
        self.assertEqual(tuple(Behavior.uniform(self.s).vector.tolist()), tuple(mixture))

    def test_vertex_certificate_separates(self):
        q2 = LFIC_sim.table_point('Q2')
        result = membership(q2, 'lfic', use_facets=False)
        self.assertFalse(result.inside)
        self.assertLess(evaluate(result.certificate, q2), 0)
        for vertex in lfic_vertices(self.s).vertices:
            self.assertGreaterEqual(evaluate(result.certificate, Behavior.from_vector(self.s, vertex)), 0)


if __name__ == '__main__':
    unittest.main()
