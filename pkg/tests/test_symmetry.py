#  Copyright (c) 2024. LFIC_sim developers. All rights reserved.

import unittest

import LFIC_sim
from LFIC_sim.custom_exceptions import ScenarioMismatchError, ScenarioShapeError
from LFIC_sim.geometry.polytope import PolytopeV
from LFIC_sim.models import facet_census, lf_vertices, lfic_vertices, lhv_vertices
from LFIC_sim.scenario import Behavior, Scenario, evaluate
from LFIC_sim.symmetry import (Relabeling, _equality_system, apply, candidates, classify_facets, orbit_table,
                               reduce_facet, stabilizer_group)


class TestRelabeling(unittest.TestCase):
    s = Scenario.main()

    def sample(self) -> Relabeling:
        return Relabeling((1, 2, 0), (1, 2, 0), (1, 0), ((1, 0), (0, 1)))

    def test_not_a_permutation(self):
        with self.assertRaises(ValueError):
            Relabeling((0, 0, 1), (0, 1, 2), (0, 1), ((0, 1), (0, 1)))
        with self.assertRaises(ValueError):
            Relabeling((0, 1, 2), (0, 1, 2), (0, 1), ((0, 1),))

    def test_inverse_and_composition(self):
        r = self.sample()
        identity = Relabeling.identity(self.s)
        self.assertEqual(identity, r.then(r.inverse()))
        self.assertEqual(identity, r.inverse().then(r))
        self.assertEqual(r, identity.then(r))

    def test_composition_matches_sequential_application(self):
        r, q = self.sample(), Relabeling((0, 2, 1), (0, 1, 2), (0, 1), ((0, 1), (1, 0)))
        p = LFIC_sim.table_point('Q1')
        self.assertEqual(apply(q, apply(r, p)), apply(r.then(q), p))

    def test_evaluation_is_invariant(self):
        r = self.sample()
        p = LFIC_sim.table_point('Q1')
        for name in ('Z1', 'A3'):
            f = LFIC_sim.functional(name)
            self.assertEqual(evaluate(f, p), evaluate(apply(r, f), apply(r, p)))

    def test_scenario_checks(self):
        r = self.sample()
        with self.assertRaises(ScenarioShapeError):
            r.index_map(Scenario.chsh())
        with self.assertRaises(ValueError):
            apply(r, tuple(range(36)))
        with self.assertRaises(ScenarioShapeError):
            apply(r, (0, 1), self.s)

    def test_candidate_count(self):
        self.assertEqual(6 * 6 * 2 * 4, len(candidates(self.s)))
        self.assertEqual(6 * 6 * 2 * 2, len(candidates(self.s, global_bob_outputs=True)))


class TestStabilizerGroup(unittest.TestCase):
    s = Scenario.main()

    @classmethod
    def setUpClass(cls):
        cls.group = stabilizer_group(lfic_vertices(cls.s), cls.s)

    def test_order(self):
        self.assertEqual(48, len(self.group))
        self.assertEqual(24, len(stabilizer_group(lfic_vertices(self.s), self.s, global_bob_outputs=True)))
        self.assertEqual(Relabeling.identity(self.s), self.group[0])

    def test_alice_relabels_inputs_with_outputs(self):
        # the block constraint p(A_x = x | c) ties every input to the output of the same label
        for r in self.group:
            self.assertEqual(r.alice_input, r.alice_output)

    def test_group_axioms(self):
        members = set(self.group)
        for g in self.group:
            self.assertIn(g.inverse(), members)
            for h in self.group[::5]:
                self.assertIn(g.then(h), members)

    def test_lf_vertices_are_preserved(self):
        vertex_set = lf_vertices(self.s).vertex_set()
        for r in self.group:
            for vertex in lf_vertices(self.s).vertices:
                self.assertIn(apply(r, vertex, self.s), vertex_set)

    def test_lhv_is_invariant_under_every_candidate(self):
        vertices = lhv_vertices(self.s)
        group = stabilizer_group(vertices, self.s)
        self.assertEqual(288, len(group))
        self.assertEqual(candidates(self.s), group)
        self.assertEqual(144, len(stabilizer_group(vertices, self.s, global_bob_outputs=True)))

    def test_dimension_mismatch(self):
        with self.assertRaises(ScenarioMismatchError):
            stabilizer_group(PolytopeV(2, ((0, 0),)), self.s)


class TestFacetOrbits(unittest.TestCase):
    s = Scenario.main()

    @classmethod
    def setUpClass(cls):
        cls.census = facet_census(cls.s)
        cls.group = stabilizer_group(lfic_vertices(cls.s), cls.s)
        cls.orbits = classify_facets(cls.census.hrep, cls.group, cls.s, cls.census.strict)

    def test_four_classes(self):
        self.assertEqual(4, len(self.orbits))
        self.assertEqual(32, sum(o.size for o in self.orbits))
        for orbit in self.orbits:
            self.assertEqual(0, len(self.group) % orbit.size)
            self.assertEqual(min(orbit.members), orbit.representative)

    def test_orbits_cover_strict_facets(self):
        reduced, pivots = _equality_system(self.census.hrep)
        expected = {reduce_facet(f.homogeneous, reduced, pivots) for f in self.census.strict}
        members = set()
        for orbit in self.orbits:
            members.update(orbit.members)
        self.assertEqual(expected, members)

    def test_representatives_are_valid(self):
        for orbit in self.orbits:
            f = LFIC_sim.BellFunctional.from_homogeneous(self.s, orbit.representative)
            for vertex in lfic_vertices(self.s).vertices[::5]:
                self.assertGreaterEqual(evaluate(f, Behavior.from_vector(self.s, vertex)), 0)

    def test_trivial_group(self):
        facet = self.census.strict[0]
        orbits = classify_facets(self.census.hrep, [Relabeling.identity(self.s)], self.s, [facet])
        self.assertEqual(1, len(orbits))
        self.assertEqual(1, orbits[0].size)

    def test_orbit_table(self):
        text = orbit_table(self.orbits, self.s)
        lines = text.splitlines()
        self.assertTrue(lines[0].strip().startswith("orbit"))
        self.assertEqual(1 + 4 + 32, len(lines))
        self.assertIn(">= 0", lines[1])


if __name__ == '__main__':
    unittest.main()
