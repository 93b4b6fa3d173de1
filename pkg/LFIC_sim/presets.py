"""
This module loads the shipped preset data: the three reference points N0, Q1, Q2 of the cross-section plane and the
library of named functionals (the four facet-class representatives Z1, Z2, A3, A4 and the hyperplanes A5-A7).
"""

__all__ = ['ALPHA', 'BETA', 'table_point', 'functional', 'is_equality', 'available_table_points',
           'available_functionals', 'exact_alpha_beta', 'ch_functional']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import functools
from fractions import Fraction

import numpy as np
import pandas as pd

from LFIC_sim.config import definations
from LFIC_sim.custom_exceptions import UnknownPresetError
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario
from LFIC_sim.utils.constants import NumericalTolerances


ALPHA = (np.sqrt(2) - 1) / (4 * np.sqrt(2))
BETA = (np.sqrt(2) + 1) / (4 * np.sqrt(2))


def exact_alpha_beta(denominator_cap: int = NumericalTolerances.RATIONAL_DENOMINATOR_CAP) -> tuple:
    """
    Rational stand-ins for alpha and beta. beta is taken as 1/2 - alpha so that alpha + beta = 1/2 holds exactly.
    """
    alpha = Fraction(float(ALPHA)).limit_denominator(denominator_cap)
    return alpha, Fraction(1, 2) - alpha


@functools.lru_cache(maxsize=None)
def _table_frame() -> pd.DataFrame:
    return pd.read_csv(definations.PRESET_BEHAVIOR_DIR, dtype=str)


@functools.lru_cache(maxsize=None)
def _functional_frame() -> pd.DataFrame:
    return pd.read_csv(definations.PRESET_FUNCTIONAL_DIR, dtype=str)


def available_table_points() -> list:
    return list(dict.fromkeys(_table_frame()['point']))


def available_functionals() -> list:
    return list(dict.fromkeys(_functional_frame()['name']))


def table_point(name: str, exact: bool = True,
                denominator_cap: int = NumericalTolerances.RATIONAL_DENOMINATOR_CAP) -> Behavior:
    """
    Reconstructs a reference point of the main scenario from its marginal table. The table lists the marginals
    p(A_x=a) (row 'id'), p(B_y=1) (column 'id') and p(A_x=a, B_y=1) for a in {1, 2}; the remaining joint
    probabilities follow from normalization.
    :param name: (str) 'N0', 'Q1' or 'Q2'
    :param exact: (bool) rational entries with alpha, beta from exact_alpha_beta, otherwise floats
    :param denominator_cap: (int) continued-fraction cap for the rational alpha
    :return: (Behavior)
    """
    df = _table_frame()
    rows = df[df['point'] == name]
    if rows.empty:
        raise UnknownPresetError(name, available_table_points())
    if exact:
        alpha, beta = exact_alpha_beta(denominator_cap)
        symbols = {'alpha': alpha, 'beta': beta}
        parse = lambda text: symbols[text] if text in symbols else Fraction(text)
    else:
        symbols = {'alpha': float(ALPHA), 'beta': float(BETA)}
        parse = lambda text: symbols[text] if text in symbols else float(Fraction(text))
    cell = {(r, c): parse(v) for r, c, v in zip(rows['row'], rows['column'], rows['value'])}

    def marginal_alice(x, a):
        return cell[('id', f'A{x}={a}')]

    def joint_one(x, a, y):
        return cell[(f'B{y}=1', f'A{x}={a}')]

    def entry(a, b, x, y):
        bob_one = cell[(f'B{y}=1', 'id')]
        if b == 1:
            if a == 0:
                return bob_one - joint_one(x, 1, y) - joint_one(x, 2, y)
            return joint_one(x, a, y)
        if a == 0:
            return 1 - marginal_alice(x, 1) - marginal_alice(x, 2) - entry(0, 1, x, y)
        return marginal_alice(x, a) - joint_one(x, a, y)

    return Behavior.from_function(Scenario.main(), entry, exact=exact, name=name)


def is_equality(name: str) -> bool:
    df = _functional_frame()
    kinds = df.loc[df['name'] == name, 'kind']
    if kinds.empty:
        raise UnknownPresetError(name, available_functionals())
    return kinds.iloc[0] == 'equality'


def functional(name: str, scenario: Scenario = Scenario.main()) -> BellFunctional:
    """
    Named functional from the library. Marginal terms (b = '*') are expanded over Bob's outcomes at the listed input.
    :param name: (str) 'Z1', 'Z2', 'A3', 'A4', 'A5', 'A6' or 'A7'
    :param scenario: (Scenario) target scenario, the main one by default
    :return: (BellFunctional) with sense 'lower'; for A5-A7 the functional vanishes on the LFIC polytope
    """
    df = _functional_frame()
    rows = df[df['name'] == name]
    if rows.empty:
        raise UnknownPresetError(name, available_functionals())
    terms = []
    for coefficient, x, a, y, b in zip(rows['coefficient'], rows['x'], rows['a'], rows['y'], rows['b']):
        bob = None if b == '*' else int(b)
        terms.extend(BellFunctional.alice_marginal_terms(Fraction(coefficient), (int(a),), int(x), scenario,
                                                         y=int(y), b=bob))
    return BellFunctional.from_terms(scenario, terms, 0, 'lower', name)


def ch_functional(scenario: Scenario = Scenario.chsh()) -> BellFunctional:
    """
    Clauser-Horne expression in the lower-bound form
    p(A0=0) + p(B0=0) - p(00|00) - p(00|01) - p(00|10) + p(00|11) >= 0, with marginals at the other party's input 0.
    Its quantum minimum is (1 - sqrt(2))/2.
    """
    terms = [(-1, 0, 0, 0, 0), (-1, 0, 0, 0, 1), (-1, 0, 0, 1, 0), (1, 0, 0, 1, 1)]
    terms += BellFunctional.alice_marginal_terms(1, (0,), 0, scenario, y=0)
    terms += [(1, a, 0, 0, 0) for a in range(scenario.alice_outputs)]
    return BellFunctional.from_terms(scenario, terms, 0, 'lower', 'CH')
