#  Copyright (c) 2024. LFIC_sim developers. All rights reserved.

import math
import unittest

import numpy as np

import LFIC_sim
from LFIC_sim.custom_exceptions import (InvalidRealizationError, NoViolationError, UnknownPresetError,
                                        ZeroProbabilityOutcomeError)
from LFIC_sim.quantum import (QuantumRealization, behavior_from_realization, bell_operator, entangling_unitary, ket,
                              lueders_post_state, maximally_entangled_state, noise_threshold, partial_trace, preset,
                              projector, query_projector, von_neumann_post_state, with_white_noise)
from LFIC_sim.scenario import Scenario, evaluate, validate


TSIRELSON_VIOLATION = (1 - math.sqrt(2)) / 2


def registered_state() -> np.ndarray:
    """Maximally entangled Alice-Bob state after Charlie's outcome is copied into a blank three-level register."""
    u = entangling_unitary(3, 3, 2)
    return u @ np.kron(projector(ket(0, 3)), maximally_entangled_state(3)) @ u.conj().T


def min_partial_transpose_eigenvalue(rho: np.ndarray, dim_first: int, dim_rest: int) -> float:
    """Smallest eigenvalue after transposing the first factor; negative values witness entanglement."""
    dim = dim_first * dim_rest
    transposed = rho.reshape(dim_first, dim_rest, dim_first, dim_rest).transpose(2, 1, 0, 3).reshape(dim, dim)
    return float(np.min(np.linalg.eigvalsh(transposed)))


class TestPresets(unittest.TestCase):
    def test_table_reproduction(self):
        for name in ('Q1', 'Q2'):
            p = behavior_from_realization(preset(name))
            expected = LFIC_sim.table_point(name, exact=False)
            self.assertLess(np.max(np.abs(p.table - expected.table)), 1e-12, name)

    def test_maximal_violation(self):
        z1 = evaluate(LFIC_sim.functional('Z1'), behavior_from_realization(preset('Q1')))
        z2 = evaluate(LFIC_sim.functional('Z2'), behavior_from_realization(preset('Q2')))
        self.assertAlmostEqual(TSIRELSON_VIOLATION, z1, 12)
        self.assertAlmostEqual(TSIRELSON_VIOLATION, z2, 12)

    def test_behaviors_are_no_signaling(self):
        for name in ('Q1', 'Q2', 'Q1-K4'):
            self.assertTrue(validate(behavior_from_realization(preset(name)), 1e-12).passed, name)

    def test_four_outcome_preset(self):
        r = preset('Q1-K4')
        self.assertEqual(Scenario.protocol2(), r.scenario)
        self.assertEqual(4, r.dim_a)

    def test_table_preset(self):
        self.assertEqual(LFIC_sim.table_point('N0'), preset('N0-table'))

    def test_unknown_preset(self):
        with self.assertRaises(UnknownPresetError):
            preset('Q3')


class TestRealization(unittest.TestCase):
    def test_invalid_state(self):
        r = preset('Q1')
        with self.assertRaises(InvalidRealizationError):
            r.with_state(2 * r.state)
        with self.assertRaises(InvalidRealizationError):
            r.with_state(np.eye(3))

    def test_incomplete_effects(self):
        r = preset('Q1')
        alice = (r.alice[0][:2] + (np.zeros((3, 3)),),) + r.alice[1:]
        with self.assertRaises(InvalidRealizationError):
            QuantumRealization(r.scenario, r.state, alice, r.bob)

    def test_wrong_measurement_count(self):
        r = preset('Q1')
        with self.assertRaises(InvalidRealizationError):
            QuantumRealization(r.scenario, r.state, r.alice[:2], r.bob)

    def test_bell_operator(self):
        r = preset('Q2')
        f = LFIC_sim.functional('Z2')
        value = np.trace(r.state @ bell_operator(f, r)).real
        self.assertAlmostEqual(evaluate(f, behavior_from_realization(r)), value, 12)

    def test_noise_threshold(self):
        threshold = noise_threshold(preset('Q1'), LFIC_sim.functional('Z1'))
        self.assertAlmostEqual(2 / 17 * (3 * math.sqrt(2) + 1), threshold, 12)
        noisy = behavior_from_realization(with_white_noise(preset('Q1'), threshold))
        self.assertAlmostEqual(0.0, evaluate(LFIC_sim.functional('Z1'), noisy), 12)

    def test_no_violation(self):
        with self.assertRaises(NoViolationError):
            noise_threshold(preset('Q1'), LFIC_sim.functional('A3'))


class TestStateTools(unittest.TestCase):
    def test_kets(self):
        np.testing.assert_allclose([1 / math.sqrt(2), -1 / math.sqrt(2)], ket('-', 2))
        with self.assertRaises(ValueError):
            ket(2, 2)

    def test_partial_trace(self):
        rho = maximally_entangled_state(3)
        np.testing.assert_allclose(np.eye(2) / 2, partial_trace(rho, (3, 2), [1]), atol=1e-15)
        np.testing.assert_allclose(np.diag([0.5, 0.5, 0.0]), partial_trace(rho, (3, 2), [0]), atol=1e-15)

    def test_entangling_unitary(self):
        u = entangling_unitary(3, 3, 2)
        np.testing.assert_allclose(np.eye(18), u @ u.conj().T, atol=1e-15)
        for c in range(3):
            before = np.kron(np.kron(ket(0, 3), ket(c, 3)), ket(1, 2))
            after = np.kron(np.kron(ket(c, 3), ket(c, 3)), ket(1, 2))
            np.testing.assert_allclose(after, u @ before, atol=1e-15)

    def test_query_projector(self):
        p = query_projector(1, 3, 3, 2)
        np.testing.assert_allclose(p, p @ p)
        self.assertAlmostEqual(6.0, np.trace(p).real)

    def test_lueders_keeps_coherence(self):
        projectors = [projector(ket(k, 3)) for k in range(3)]
        state = projector((ket(0, 3) + ket(1, 3)) / math.sqrt(2))
        np.testing.assert_allclose(state, lueders_post_state(state, projectors, [0, 1]), atol=1e-15)
        np.testing.assert_allclose(np.diag([0.5, 0.5, 0.0]), von_neumann_post_state(state, projectors, [0, 1]),
                                   atol=1e-15)
        np.testing.assert_allclose(projectors[1], lueders_post_state(state, projectors, 1), atol=1e-15)

    def test_white_noise_is_affine(self):
        r = preset('Q1')
        clean = behavior_from_realization(r).table
        uniform = LFIC_sim.Behavior.uniform(r.scenario, exact=False).table
        for p in (0.0, 0.25, 0.5, 0.75, 1.0):
            noisy = behavior_from_realization(with_white_noise(r, p)).table
            np.testing.assert_allclose(p * clean + (1 - p) * uniform, noisy, rtol=0, atol=1e-12)

    def test_lueders_update_is_idempotent(self):
        joint = registered_state()
        projectors = [query_projector(x, 3, 3, 2) for x in range(3)]
        for observed in (0, 1, [0, 1], [1, 2]):
            once = lueders_post_state(joint, projectors, observed)
            twice = lueders_post_state(once, projectors, observed)
            np.testing.assert_allclose(once, twice, rtol=0, atol=1e-12)

    def test_von_neumann_update_is_separable(self):
        joint = registered_state()
        projectors = [query_projector(x, 3, 3, 2) for x in range(3)]
        # 'no' to the query about c = 2 keeps the register entangled with Alice and Bob
        coherent = lueders_post_state(joint, projectors, [0, 1])
        self.assertAlmostEqual(-0.5, min_partial_transpose_eigenvalue(coherent, 3, 6), 12)
        for observed in (0, 1, [0, 1], [0, 1, 2]):
            dephased = von_neumann_post_state(joint, projectors, observed)
            self.assertAlmostEqual(1.0, np.trace(dephased).real, 12)
            # block diagonal in the register basis: sum_m |m><m| x sigma_m with sigma_m >= 0
            blocks = dephased.reshape(3, 6, 3, 6)
            for m in range(3):
                self.assertGreaterEqual(np.min(np.linalg.eigvalsh(blocks[m, :, m, :])), -1e-12)
                for n in range(3):
                    if n != m:
                        np.testing.assert_allclose(np.zeros((6, 6)), blocks[m, :, n, :], atol=1e-12)
            self.assertGreaterEqual(min_partial_transpose_eigenvalue(dephased, 3, 6), -1e-12)

    def test_zero_probability_outcome(self):
        projectors = [projector(ket(k, 3)) for k in range(3)]
        with self.assertRaises(ZeroProbabilityOutcomeError):
            lueders_post_state(projectors[0], projectors, 2)

    def test_projectors_need_completeness(self):
        projectors = [projector(ket(k, 3)) for k in range(2)]
        with self.assertRaises(InvalidRealizationError):
            lueders_post_state(projectors[0], projectors, 0)


if __name__ == '__main__':
    unittest.main()
