"""
Moment-matrix relaxations of the quantum set. Operator words are built from Alice's projectors A_{x,a} (a below the
last outcome) and Bob's projectors B_{y,b} (b below the last outcome); the last outcome of each measurement is
eliminated by completeness. Words reduce by the projector algebra: Alice and Bob letters commute, equal adjacent
letters merge and adjacent letters of the same input with different outcomes give zero.
"""

__all__ = ['LEVELS', 'reduce_word', 'moment_label', 'MonomialBasis', 'MomentProgram', 'build_moment_program',
           'moment_matrix_from_realization', 'moments_from_matrix']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from LFIC_sim.custom_exceptions import ScenarioMismatchError
from LFIC_sim.scenario import BellFunctional, Scenario


logger = logging.getLogger(__name__)

LEVELS = ('1', '1+AB', '2')

IDENTITY = ((), ())


def _reduce_party(letters: Sequence[tuple]) -> Optional[tuple]:
    stack = []
    for letter in letters:
        if stack and stack[-1][1] == letter[1]:
            if stack[-1][2] == letter[2]:
                continue
            return None
        stack.append(letter)
    return tuple(stack)


def reduce_word(word: Sequence[tuple]) -> Optional[tuple]:
    """
    Normal form (alice letters, bob letters) of a word of letters ('A', x, a) / ('B', y, b), None if it vanishes.
    """
    alice = _reduce_party([l for l in word if l[0] == 'A'])
    bob = _reduce_party([l for l in word if l[0] == 'B'])
    if alice is None or bob is None:
        return None
    return alice, bob


def moment_label(left: tuple, right: tuple) -> Optional[tuple]:
    """
    Label of the moment <left^dagger right>. Moments are taken real, so a word and its reverse share the label.
    """
    word = tuple(reversed(left[0])) + tuple(reversed(left[1])) + right[0] + right[1]
    reduced = reduce_word(word)
    if reduced is None:
        return None
    alice, bob = reduced
    return min(reduced, (alice[::-1], bob[::-1]))


@dataclass
class MonomialBasis:
    scenario: Scenario
    level: str
    include_bb: bool = True
    words: list = field(default_factory=list)

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"level needs to be one of {', '.join(LEVELS)}.")
        s = self.scenario
        alice = [('A', x, a) for x in range(s.alice_inputs) for a in range(s.alice_outputs - 1)]
        bob = [('B', y, b) for y in range(s.bob_inputs) for b in range(s.bob_outputs - 1)]
        candidates = [()] + [(l,) for l in alice] + [(l,) for l in bob]
        if self.level == '1+AB':
            candidates += [(la, lb) for la in alice for lb in bob]
        elif self.level == '2':
            candidates += [(l1, l2) for l1, l2 in itertools.product(alice, alice) if l1[1] != l2[1]]
            candidates += [(la, lb) for la in alice for lb in bob]
            if self.include_bb:
                candidates += [(l1, l2) for l1, l2 in itertools.product(bob, bob) if l1[1] != l2[1]]
        seen = set()
        words = []
        for word in candidates:
            reduced = reduce_word(word)
            if reduced is not None and reduced not in seen:
                seen.add(reduced)
                words.append(reduced)
        self.words = words

    def __len__(self):
        return len(self.words)


@dataclass
class MomentProgram:
    """
    Gamma(y) = F0 + sum_k y_k F_k with one variable per moment label (the identity moment is fixed to 1 in F0), and
    the objective value = c0 + c.y. entry_expressions maps each behavior coordinate to {label index: coefficient}
    plus a constant under the key None.
    """
    basis: MonomialBasis
    labels: list
    F0: np.ndarray
    F: np.ndarray
    c: np.ndarray
    c0: float
    sense: str
    entry_expressions: list

    @property
    def size(self) -> int:
        return self.F0.shape[0]

    def gamma(self, y: np.ndarray) -> np.ndarray:
        return self.F0 + np.tensordot(y, self.F, axes=1)

    def label_index(self, label: tuple) -> int:
        return self._index[label]

    def __post_init__(self):
        self._index = {label: k for k, label in enumerate(self.labels)}

    def entry_values(self, y: np.ndarray) -> np.ndarray:
        """Behavior coordinates implied by the moments y."""
        return np.array([expr.get(None, 0.0) + sum(coef * y[k] for k, coef in expr.items() if k is not None)
                         for expr in self.entry_expressions])

    def dump(self) -> str:
        """Moment labels and the (row, column, label) triplets of the template, for debugging."""
        lines = [f"* moment program: level {self.basis.level}, size {self.size}, {len(self.labels)} labels"]
        lines += [f"label {k} {_format_label(label)}" for k, label in enumerate(self.labels)]
        for k in range(len(self.labels)):
            rows, cols = np.nonzero(np.triu(self.F[k]))
            lines += [f"entry {i} {j} {k}" for i, j in zip(rows, cols)]
        return '\n'.join(lines) + '\n'


def _format_label(label: tuple) -> str:
    letters = list(label[0]) + list(label[1])
    return '*'.join(f"{p}{i}{o}" for p, i, o in letters) or '1'


def _letter_expression(party: str, inp: int, out: int, outputs: int) -> list:
    """Projector of outcome out as (coefficient, letter or None) terms, the last outcome by completeness."""
    if out < outputs - 1:
        return [(1.0, (party, inp, out))]
    return [(1.0, None)] + [(-1.0, (party, inp, o)) for o in range(outputs - 1)]


def _entry_expression(s: Scenario, a: int, b: int, x: int, y: int) -> dict:
    expression = {}
    for ca, la in _letter_expression('A', x, a, s.alice_outputs):
        for cb, lb in _letter_expression('B', y, b, s.bob_outputs):
            word = ((la,) if la else (), (lb,) if lb else ())
            expression[word] = expression.get(word, 0.0) + ca * cb
    return expression


def build_moment_program(s: Scenario, f: BellFunctional, level: str = '2', sense: str = 'min',
                         include_bb: bool = True) -> MomentProgram:
    """
    Builds the moment program of the functional at the given level.
    :param s: (Scenario) bipartite scenario
    :param f: (BellFunctional) objective
    :param level: (str) '1', '1+AB' or '2'
    :param sense: (str) 'min' or 'max'
    :param include_bb: (bool) at level 2, whether words B_y B_y' of distinct inputs enter the basis
    :return: (MomentProgram)
    """
    if f.scenario != s:
        raise ScenarioMismatchError(f.scenario, s)
    if sense not in ('min', 'max'):
        raise ValueError("sense needs to be 'min' or 'max'.")
    basis = MonomialBasis(s, level, include_bb)
    n = len(basis)
    positions = {}
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        label = moment_label(basis.words[i], basis.words[j])
        if label is not None:
            positions.setdefault(label, []).append((i, j))
    # every behavior coordinate needs its moments present in the template
    expressions_by_word = [_entry_expression(s, a, b, x, y) for a, b, x, y in s.labels()]
    for expression in expressions_by_word:
        for word in expression:
            label = moment_label(IDENTITY, word)
            if label not in positions:
                raise ValueError(f"level {level} does not contain the moment {_format_label(label)}.")
    labels = sorted(label for label in positions if label != IDENTITY)
    index = {label: k for k, label in enumerate(labels)}
    F0 = np.zeros((n, n))
    for i, j in positions[IDENTITY]:
        F0[i, j] = F0[j, i] = 1.0
    F = np.zeros((len(labels), n, n))
    for label, cells in positions.items():
        if label == IDENTITY:
            continue
        k = index[label]
        for i, j in cells:
            F[k, i, j] = F[k, j, i] = 1.0
    entry_expressions = []
    for expression in expressions_by_word:
        converted = {}
        for word, coef in expression.items():
            label = moment_label(IDENTITY, word)
            key = None if label == IDENTITY else index[label]
            converted[key] = converted.get(key, 0.0) + coef
        entry_expressions.append(converted)
    c = np.zeros(len(labels))
    c0 = float(f.offset)
    for coefficient, expr in zip(f.coefficients.reshape(-1), entry_expressions):
        if coefficient == 0:
            continue
        for key, coef in expr.items():
            if key is None:
                c0 += float(coefficient) * coef
            else:
                c[key] += float(coefficient) * coef
    if sense == 'max':
        c, c0 = -c, -c0
    logger.debug(f"build_moment_program: level {level}, matrix size {n}, {len(labels)} moment labels")
    return MomentProgram(basis, labels, F0, F, c, c0, sense, entry_expressions)


def moment_matrix_from_realization(program: MomentProgram, realization) -> np.ndarray:
    """
    Real part of the moment matrix <w_i^dagger w_j> of an explicit realization in the program's basis.
    """
    dim_a, dim_b = realization.dim_a, realization.dim_b

    def operator(word):
        op = np.eye(dim_a * dim_b, dtype=complex)
        for _, x, a in word[0]:
            op = op @ np.kron(realization.alice[x][a], np.eye(dim_b))
        for _, y, b in word[1]:
            op = op @ np.kron(np.eye(dim_a), realization.bob[y][b])
        return op

    ops = [operator(word) for word in program.basis.words]
    rho = realization.state
    n = len(ops)
    gamma = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            gamma[i, j] = np.trace(rho @ ops[i].conj().T @ ops[j]).real
    return (gamma + gamma.T) / 2


def moments_from_matrix(program: MomentProgram, gamma: np.ndarray) -> np.ndarray:
    """Label values read off a moment matrix (averaged over the label's cells)."""
    weights = program.F.reshape(len(program.labels), -1)
    return weights @ gamma.reshape(-1) / weights.sum(axis=1)
