#  Copyright (c) 2024. LFIC_sim developers. All rights reserved.

import unittest

from LFIC_sim.utils.constants import NumericalTolerances


class TestNumericalTolerances(unittest.TestCase):
    def test_constructor(self):
        self.assertEqual(1e-12, NumericalTolerances.EPS_NS)
        self.assertEqual(10 ** 12, NumericalTolerances.RATIONAL_DENOMINATOR_CAP)
        self.assertLess(NumericalTolerances.SDP_GAP_TOL, NumericalTolerances.BISECTION_WIDTH)

    def test_str(self):
        self.assertIn("EPS_NS = 1e-12", str(NumericalTolerances()))
