#  Copyright (c) 2024. LFIC_sim developers. All rights reserved.

import json
import math
import unittest

import numpy as np

import LFIC_sim
from LFIC_sim.custom_exceptions import InvalidRealizationError, ScenarioMismatchError, SchemaError
from LFIC_sim.models import ModelKind, model_hrep
from LFIC_sim.quantum import behavior_from_realization, preset
from LFIC_sim.scenario import Scenario, evaluate
from LFIC_sim.simulator import (RunConfig, RunCounts, estimate_behavior, expected_behavior, functional_estimate,
                                sample_behavior, simulate_protocol2, simulate_runs)


TSIRELSON_VIOLATION = (1 - math.sqrt(2)) / 2


class TestRunConfig(unittest.TestCase):
    def test_defaults(self):
        cfg = RunConfig(preset('Q1'), 10)
        np.testing.assert_allclose(np.full(3, 1 / 3), cfg.x_distribution)
        np.testing.assert_allclose([0.5, 0.5], cfg.y_distribution)
        echo = cfg.echo()
        self.assertEqual('Q1', echo['realization'])
        self.assertEqual('lueders', echo['policy'])
        json.dumps(echo)

    def test_invalid_values(self):
        r = preset('Q1')
        with self.assertRaises(TypeError):
            RunConfig(LFIC_sim.table_point('Q1'), 10)
        with self.assertRaises(ValueError):
            RunConfig(r, -1)
        with self.assertRaises(ValueError):
            RunConfig(r, 10, policy='copenhagen')
        with self.assertRaises(ValueError):
            RunConfig(r, 10, protocol='protocol3')
        with self.assertRaises(ValueError):
            RunConfig(r, 10, device='broken')
        with self.assertRaises(ValueError):
            RunConfig(r, 10, chunk_size=0)
        with self.assertRaises(ValueError):
            RunConfig(r, 10, x_distribution=[0.5, 0.5])
        with self.assertRaises(ValueError):
            RunConfig(r, 10, y_distribution=[0.7, 0.7])


class TestExpectedBehavior(unittest.TestCase):
    def test_lueders_matches_born_rule(self):
        for name in ('Q1', 'Q2'):
            r = preset(name)
            if name == 'Q2':
                # Q2 cannot be copied into the register
                with self.assertRaises(InvalidRealizationError):
                    expected_behavior(r)
                continue
            p = expected_behavior(r, 'lueders')
            self.assertLess(np.max(np.abs(p.table - behavior_from_realization(r).table)), 1e-12)

    def test_von_neumann_stays_in_lfic(self):
        p = expected_behavior(preset('Q1'), 'von-neumann')
        self.assertTrue(LFIC_sim.validate(p, 1e-9).passed)
        h = model_hrep(ModelKind.LFIC, Scenario.main())
        for facet in h.inequalities:
            self.assertGreaterEqual(float(facet.value(p.vector)), -1e-9)
        self.assertGreaterEqual(evaluate(LFIC_sim.functional('Z1'), p), -1e-9)

    def test_faulty_device_answers_yes(self):
        p = expected_behavior(preset('Q1'), device='faulty')
        # c = x is possible for x in {0, 1} on the rank-two entangled state
        for x in range(2):
            for y in range(2):
                self.assertAlmostEqual(1.0, p.alice_marginal(x, x, y), 12)


class TestSimulateRuns(unittest.TestCase):
    def test_totals(self):
        counts = simulate_runs(RunConfig(preset('Q1'), 5000, seed=7))
        self.assertEqual(5000, counts.total)
        self.assertEqual(5000, int(counts.runs_per_setting.sum()))
        self.assertEqual('main', counts.protocol)
        self.assertEqual(0, counts.resampled)

    def test_zero_runs(self):
        counts = simulate_runs(RunConfig(preset('Q1'), 0))
        self.assertEqual(0, counts.total)
        estimate = estimate_behavior(counts)
        self.assertTrue(estimate.missing.all())
        with self.assertRaises(ValueError):
            estimate.behavior()

    def test_seed_determinism(self):
        first = simulate_runs(RunConfig(preset('Q1'), 5000, seed=7))
        second = simulate_runs(RunConfig(preset('Q1'), 5000, seed=7))
        np.testing.assert_array_equal(first.counts, second.counts)
        other = simulate_runs(RunConfig(preset('Q1'), 5000, seed=8))
        self.assertFalse(np.array_equal(first.counts, other.counts))

    def test_thread_independence(self):
        single = simulate_runs(RunConfig(preset('Q1'), 7000, seed=3, chunk_size=1000, threads=1))
        pooled = simulate_runs(RunConfig(preset('Q1'), 7000, seed=3, chunk_size=1000, threads=4))
        np.testing.assert_array_equal(single.counts, pooled.counts)

    def test_realization_needs_register_copy(self):
        with self.assertRaises(InvalidRealizationError):
            simulate_runs(RunConfig(preset('Q2'), 10))

    def test_z1_estimate(self):
        counts = simulate_runs(RunConfig(preset('Q1'), 1_000_000, seed=11))
        value, se = functional_estimate(LFIC_sim.functional('Z1'), counts)
        self.assertGreater(se, 0.0)
        self.assertLess(abs(value - TSIRELSON_VIOLATION), 3 * se)
        self.assertLess(value + 3 * se, 0.0)

    def test_von_neumann_estimate(self):
        counts = simulate_runs(RunConfig(preset('Q1'), 200_000, seed=11, policy='von-neumann'))
        value, se = functional_estimate(LFIC_sim.functional('Z1'), counts)
        self.assertGreaterEqual(value, -3 * se)


class TestEstimates(unittest.TestCase):
    def test_sample_behavior_converges(self):
        p = LFIC_sim.table_point('N0', exact=False)
        estimate = estimate_behavior(sample_behavior(p, 400_000, seed=5))
        self.assertTrue(estimate.complete)
        self.assertLess(np.max(np.abs(estimate.table - p.table)), 0.01)
        # outcomes of probability zero are never drawn
        np.testing.assert_array_equal(np.zeros(int((p.table == 0).sum())), estimate.table[p.table == 0])

    def test_missing_settings(self):
        counts = simulate_runs(RunConfig(preset('Q1'), 2000, x_distribution=[1.0, 0.0, 0.0]))
        estimate = estimate_behavior(counts)
        self.assertFalse(estimate.complete)
        self.assertTrue(estimate.missing[1:].all())
        self.assertFalse(estimate.missing[0].any())
        self.assertTrue(np.isnan(estimate.table[2, 0, 0, 0]))
        with self.assertRaises(ValueError):
            estimate.behavior()
        with self.assertRaises(ValueError):
            functional_estimate(LFIC_sim.functional('Z1'), counts)

    def test_standard_errors(self):
        counts = simulate_runs(RunConfig(preset('Q1'), 6000, seed=2))
        estimate = estimate_behavior(counts)
        expected = np.sqrt(estimate.table * (1 - estimate.table) / estimate.runs[:, :, None, None])
        np.testing.assert_allclose(expected, estimate.standard_errors)

    def test_functional_scenario_mismatch(self):
        counts = simulate_runs(RunConfig(preset('Q1'), 100))
        with self.assertRaises(ScenarioMismatchError):
            functional_estimate(LFIC_sim.ch_functional(), counts)


class TestCountsDocument(unittest.TestCase):
    def test_round_trip(self):
        counts = simulate_runs(RunConfig(preset('Q1'), 3000, seed=4))
        document = json.loads(json.dumps(counts.to_document()))
        back = RunCounts.from_document(document)
        np.testing.assert_array_equal(counts.counts, back.counts)
        self.assertEqual(counts.config, back.config)
        self.assertEqual(counts.scenario, back.scenario)

    def test_bad_documents(self):
        document = simulate_runs(RunConfig(preset('Q1'), 100)).to_document()
        with self.assertRaises(SchemaError):
            RunCounts.from_document(dict(document, type='behavior'))
        with self.assertRaises(SchemaError):
            RunCounts.from_document(dict(document, version='0.0'))
        with self.assertRaises(SchemaError):
            RunCounts.from_document(dict(document, entries=[{'x': 0, 'n': 3}]))

    def test_invalid_counts(self):
        s = Scenario.main()
        with self.assertRaises(ValueError):
            RunCounts(s, np.zeros((2, 2, 3, 2), dtype=np.int64))
        negative = np.zeros(s.shape, dtype=np.int64)
        negative[0, 0, 0, 0] = -1
        with self.assertRaises(ValueError):
            RunCounts(s, negative)


class TestProtocol2(unittest.TestCase):
    def config(self, **kwargs) -> RunConfig:
        return RunConfig(preset('Q1-K4'), 20000, seed=9, protocol='protocol2', **kwargs)

    def test_counts_layout(self):
        counts, reports = simulate_protocol2(self.config(), report_t=[3])
        self.assertEqual('protocol2', counts.protocol)
        self.assertEqual((4, 2, 4, 2, 4, 2), counts.counts.shape)
        self.assertEqual(20000, counts.total)
        self.assertEqual(Scenario.protocol2().shape, counts.main_counts().shape)
        self.assertEqual([3], list(reports))
        # c never equals 3, so the query about 3 is always answered no
        self.assertEqual(0, int(counts.counts[3, 0].sum()))

    def test_honest_device_is_consistent(self):
        _, reports = simulate_protocol2(self.config(), report_t=[3])
        report = reports[3]
        self.assertGreater(report.dof, 0)
        self.assertGreater(report.p_value, 0.001)
        self.assertIn("t=3", str(report))

    def test_faulty_device_is_flagged(self):
        _, reports = simulate_protocol2(self.config(device='faulty'), report_t=[3])
        self.assertTrue(reports[3].flagged)
        self.assertIn("flagged", str(reports[3]))

    def test_without_decoy_query(self):
        counts, reports = simulate_protocol2(self.config(decoy_query=False))
        self.assertEqual({}, reports)
        self.assertEqual('main', counts.protocol)
        self.assertEqual(20000, counts.total)

    def test_simulate_runs_delegates(self):
        counts = simulate_runs(RunConfig(preset('Q1-K4'), 500, protocol='protocol2'))
        self.assertEqual('protocol2', counts.protocol)


if __name__ == '__main__':
    unittest.main()
