#  Copyright (c) 2024. LFIC_sim developers. All rights reserved.

import json
import math
import unittest
from fractions import Fraction

import numpy as np

import LFIC_sim
from LFIC_sim.custom_exceptions import DocumentParseError, SchemaError, ScenarioMismatchError, ScenarioShapeError
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario, evaluate, to_fraction, validate
from LFIC_sim.serialization import deserialize, serialize, to_document


def signaling_behavior() -> Behavior:
    # Alice's outcome copies Bob's input
    return Behavior.from_function(Scenario.main(), lambda a, b, x, y: Fraction(int(a == y and b == 0)))


class TestScenario(unittest.TestCase):
    def test_main(self):
        s = Scenario.main()
        self.assertEqual((3, 2, 3, 2), s.shape)
        self.assertEqual(36, s.dimension)
        self.assertEqual(3, s.charlie_outputs)
        self.assertTrue(s.is_lfic_compatible)
        self.assertEqual(Scenario(), s)

    def test_charlie_defaults_to_alice_outputs(self):
        self.assertEqual(4, Scenario(4, 4, 2, 2).charlie_outputs)
        self.assertEqual(Scenario.protocol2(), Scenario(4, 4, 2, 2))

    def test_invalid_cardinalities(self):
        with self.assertRaises(ValueError):
            Scenario(0, 3, 2, 2)
        with self.assertRaises(TypeError):
            Scenario(3, 2.5, 2, 2)
        with self.assertRaises(TypeError):
            Scenario(True, 3, 2, 2)

    def test_require_lfic(self):
        Scenario.main().require_lfic()
        with self.assertRaises(ScenarioShapeError):
            Scenario(2, 3, 2, 2).require_lfic()

    def test_index(self):
        s = Scenario.main()
        self.assertEqual(0, s.index(0, 0, 0, 0))
        self.assertEqual(1, s.index(0, 1, 0, 0))
        self.assertEqual(6, s.index(0, 0, 0, 1))
        self.assertEqual(35, s.index(2, 1, 2, 1))
        with self.assertRaises(IndexError):
            s.index(3, 0, 0, 0)

    def test_labels_follow_coordinate_order(self):
        s = Scenario.chsh()
        positions = [s.index(a, b, x, y) for a, b, x, y in s.labels()]
        self.assertEqual(list(range(s.dimension)), positions)


class TestBehavior(unittest.TestCase):
    def test_uniform(self):
        p = Behavior.uniform(Scenario.main())
        self.assertEqual(Fraction(1, 6), p[2, 1, 0, 1])
        self.assertTrue(validate(p).passed)

    def test_table_is_read_only(self):
        p = Behavior.uniform(Scenario.main())
        with self.assertRaises(ValueError):
            p.table[0, 0, 0, 0] = Fraction(1)

    def test_wrong_size(self):
        with self.assertRaises(ValueError):
            Behavior(Scenario.main(), [Fraction(1, 36)] * 35)

    def test_marginals(self):
        p = LFIC_sim.table_point('N0')
        self.assertEqual(Fraction(1, 2), p.alice_marginal(1, 0))
        self.assertEqual(Fraction(0), p.alice_marginal(2, 1))
        self.assertEqual(Fraction(1, 2), p.bob_marginal(1, 1))

    def test_mix(self):
        p = LFIC_sim.table_point('N0')
        q = Behavior.uniform(Scenario.main())
        mixed = p.mix(q, Fraction(1, 3))
        self.assertTrue(mixed.exact)
        self.assertEqual(Fraction(1, 3) * p[0, 0, 0, 0] + Fraction(2, 3) * q[0, 0, 0, 0], mixed[0, 0, 0, 0])
        self.assertFalse(p.mix(q, 0.25).exact)

    def test_rationalize(self):
        p = Behavior.uniform(Scenario.main(), exact=False)
        self.assertEqual(Behavior.uniform(Scenario.main()), p.rationalize())
        self.assertEqual(Fraction(1, 3), to_fraction(1 / 3, 1000))

    def test_validate_reports_signaling(self):
        report = validate(signaling_behavior())
        self.assertTrue(report.normalized)
        self.assertTrue(report.nonnegative)
        self.assertFalse(report.no_signaling)
        self.assertEqual(Fraction(1), report.signaling_discrepancy)

    def test_validate_reports_normalization(self):
        table = np.full(Scenario.chsh().shape, Fraction(1, 3), dtype=object)
        report = validate(Behavior(Scenario.chsh(), table))
        self.assertFalse(report.normalized)
        self.assertEqual(Fraction(1, 3), report.normalization_residuals[(1, 1)])

    def test_validate_float_tolerance(self):
        table = np.full(Scenario.chsh().shape, 0.25)
        table[0, 0, 0, 0] += 1e-14
        table[0, 0, 1, 1] -= 1e-14
        self.assertTrue(validate(Behavior(Scenario.chsh(), table, exact=False)).passed)


class TestBellFunctional(unittest.TestCase):
    def test_evaluate_table_points(self):
        self.assertAlmostEqual((1 - math.sqrt(2)) / 2, float(evaluate(LFIC_sim.functional('Z1'),
                                                                       LFIC_sim.table_point('Q1'))), 9)
        self.assertAlmostEqual((1 - math.sqrt(2)) / 2, float(evaluate(LFIC_sim.functional('Z2'),
                                                                       LFIC_sim.table_point('Q2'))), 9)
        self.assertEqual(Fraction(0), evaluate(LFIC_sim.functional('A5'), LFIC_sim.table_point('N0')))
        self.assertEqual(Fraction(1, 2), evaluate(LFIC_sim.functional('A7'), LFIC_sim.table_point('N0')))

    def test_evaluate_is_affine(self):
        f = LFIC_sim.functional('Z1')
        p = LFIC_sim.table_point('N0')
        q = Behavior.uniform(Scenario.main())
        w = Fraction(2, 7)
        self.assertEqual(w * evaluate(f, p) + (1 - w) * evaluate(f, q), evaluate(f, p.mix(q, w)))

    def test_evaluate_float(self):
        f = LFIC_sim.functional('Z1')
        p = LFIC_sim.table_point('Q1', exact=False)
        self.assertIsInstance(evaluate(f, p), float)

    def test_scenario_mismatch(self):
        with self.assertRaises(ScenarioMismatchError):
            evaluate(LFIC_sim.ch_functional(), LFIC_sim.table_point('N0'))

    def test_from_terms_adds_repeats(self):
        f = BellFunctional.from_terms(Scenario.chsh(), [(1, 0, 0, 0, 0), (Fraction(1, 2), 0, 0, 0, 0)])
        self.assertEqual([(Fraction(3, 2), 0, 0, 0, 0)], f.terms())

    def test_from_homogeneous(self):
        f = LFIC_sim.ch_functional()
        self.assertEqual(f.homogeneous(), BellFunctional.from_homogeneous(Scenario.chsh(), f.homogeneous()).homogeneous())
        with self.assertRaises(ValueError):
            BellFunctional.from_homogeneous(Scenario.chsh(), [0] * 16)

    def test_negated(self):
        f = LFIC_sim.functional('A3')
        g = f.negated()
        self.assertEqual('upper', g.sense)
        p = LFIC_sim.table_point('N0')
        self.assertEqual(-evaluate(f, p), evaluate(g, p))
        self.assertEqual(f.is_satisfied_by(p), g.is_satisfied_by(p))

    def test_invalid_sense(self):
        with self.assertRaises(ValueError):
            BellFunctional(Scenario.chsh(), [0] * 16, sense='equal')

    def test_str(self):
        f = BellFunctional.from_terms(Scenario.chsh(), [(1, 0, 0, 0, 0), (-2, 1, 1, 1, 1)], offset=1, name='f')
        self.assertEqual("f: p(A0=0,B0=0) - 2 p(A1=1,B1=1) + 1 >= 0", str(f))


class TestSerialization(unittest.TestCase):
    def test_behavior_round_trip(self):
        p = LFIC_sim.table_point('Q1')
        self.assertEqual(p, deserialize(serialize(p)))
        q = LFIC_sim.table_point('Q2', exact=False)
        self.assertEqual(q, deserialize(serialize(q)))

    def test_functional_and_scenario_round_trip(self):
        f = LFIC_sim.functional('A6')
        self.assertEqual(f, deserialize(serialize(f)))
        self.assertEqual(Scenario.protocol2(), deserialize(serialize(Scenario.protocol2())))

    def test_rationals_are_strings(self):
        document = to_document(Behavior.uniform(Scenario.chsh()))
        self.assertEqual('1/4', document['entries'][0]['p'])
        self.assertEqual('lfic/1', document['version'])

    def test_malformed_json(self):
        with self.assertRaises(DocumentParseError) as context:
            deserialize('{\n  "version": "lfic/1",\n  oops\n}')
        self.assertEqual(3, context.exception.line)

    def test_wrong_version(self):
        document = to_document(Scenario.main())
        document['version'] = 'lfic/0'
        with self.assertRaises(SchemaError):
            deserialize(json.dumps(document))

    def test_negative_probability(self):
        document = to_document(Behavior.uniform(Scenario.chsh()))
        document['entries'][3]['p'] = '-1/4'
        with self.assertRaises(SchemaError):
            deserialize(json.dumps(document))

    def test_missing_and_repeated_entries(self):
        document = to_document(Behavior.uniform(Scenario.chsh()))
        document['entries'].pop()
        with self.assertRaises(SchemaError):
            deserialize(json.dumps(document))
        document['entries'].append(dict(document['entries'][0]))
        with self.assertRaises(SchemaError):
            deserialize(json.dumps(document))

    def test_index_out_of_range(self):
        document = to_document(LFIC_sim.ch_functional())
        document['terms'][0]['a'] = 2
        with self.assertRaises(SchemaError):
            deserialize(json.dumps(document))

    def test_float_entries_need_numbers(self):
        document = to_document(Behavior.uniform(Scenario.chsh(), exact=False))
        document['entries'][0]['p'] = '0.25'
        with self.assertRaises(SchemaError):
            deserialize(json.dumps(document))


if __name__ == '__main__':
    unittest.main()
