"""
This module contains the classes and functionalities of the measurement scenario, the behaviors (conditional probability
tables p(a,b|x,y)) and the linear functionals (Bell functionals) acting on them.
"""

__all__ = ['Scenario', 'Behavior', 'BellFunctional', 'ValidationReport', 'evaluate', 'validate', 'to_fraction']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import itertools
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Union

import numpy as np
import numpy.typing as npt

from LFIC_sim.custom_exceptions import ScenarioMismatchError, ScenarioShapeError
from LFIC_sim.utils.constants import NumericalTolerances


Number = Union[Fraction, float, int]


def to_fraction(value, denominator_cap: Optional[int] = None) -> Fraction:
    """
    Converts a number to a Fraction. Floats are rounded by continued fractions when a denominator cap is given.
    :param value: int, Fraction, float or a "num/den" string
    :param denominator_cap: (int) max. denominator for floats, None for the exact binary value
    :return: (Fraction)
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("Booleans are not probabilities.")
    if isinstance(value, (numbers.Integral, str)):
        return Fraction(value)
    if isinstance(value, numbers.Real):
        frac = Fraction(float(value))
        if denominator_cap is not None:
            frac = frac.limit_denominator(denominator_cap)
        return frac
    raise TypeError(f"Cannot convert {value!r} to a rational number.")


@dataclass(frozen=True)
class Scenario:
    """
    Scenario stores the input and output cardinalities of Alice (with Charlie) and Bob. Coordinates of behaviors are
    ordered by (x, y, a, b).
    """
    alice_inputs: int = 3
    alice_outputs: int = 3
    bob_inputs: int = 2
    bob_outputs: int = 2
    charlie_outputs: Optional[int] = None

    def __post_init__(self):
        if self.charlie_outputs is None:
            object.__setattr__(self, 'charlie_outputs', self.alice_outputs)
        for name in ('alice_inputs', 'alice_outputs', 'bob_inputs', 'bob_outputs', 'charlie_outputs'):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise TypeError(f"{name} needs to be an integer.")
            if value < 1:
                raise ValueError(f"{name} needs to be at least 1.")

    @classmethod
    def main(cls) -> "Scenario":
        """The main protocol: x, a, c in {0,1,2}; y, b in {0,1}."""
        return cls(3, 3, 2, 2, 3)

    @classmethod
    def chsh(cls) -> "Scenario":
        return cls(2, 2, 2, 2, 2)

    @classmethod
    def protocol2(cls) -> "Scenario":
        """Four-outcome scenario of the protocol with the preliminary query t."""
        return cls(4, 4, 2, 2, 4)

    @property
    def shape(self) -> tuple:
        return self.alice_inputs, self.bob_inputs, self.alice_outputs, self.bob_outputs

    @property
    def dimension(self) -> int:
        return self.alice_inputs * self.bob_inputs * self.alice_outputs * self.bob_outputs

    @property
    def is_lfic_compatible(self) -> bool:
        return self.alice_inputs == self.alice_outputs == self.charlie_outputs

    def require_lfic(self) -> None:
        if not self.is_lfic_compatible:
            raise ScenarioShapeError("the LFIC construction needs alice_inputs = alice_outputs = charlie_outputs.")

    def index(self, a: int, b: int, x: int, y: int) -> int:
        """
        Position of the entry p(a,b|x,y) in the flattened coordinate vector.
        """
        if not (0 <= a < self.alice_outputs and 0 <= b < self.bob_outputs and 0 <= x < self.alice_inputs
                and 0 <= y < self.bob_inputs):
            raise IndexError(f"(a={a}, b={b}, x={x}, y={y}) lies outside {self}.")
        return int(np.ravel_multi_index((x, y, a, b), self.shape))

    def labels(self) -> Iterator[tuple]:
        """
        Iterates over (a, b, x, y) in coordinate order.
        """
        for x, y, a, b in itertools.product(range(self.alice_inputs), range(self.bob_inputs),
                                            range(self.alice_outputs), range(self.bob_outputs)):
            yield a, b, x, y

    def to_dict(self) -> dict:
        return {'alice_inputs': self.alice_inputs, 'alice_outputs': self.alice_outputs,
                'bob_inputs': self.bob_inputs, 'bob_outputs': self.bob_outputs,
                'charlie_outputs': self.charlie_outputs}

    def __str__(self):
        return (f"({self.alice_inputs},{self.alice_outputs};{self.bob_inputs},{self.bob_outputs}) "
                f"with {self.charlie_outputs} Charlie outcomes")


def _as_table(scenario: Scenario, values, exact: bool) -> np.ndarray:
    array = np.asarray(values, dtype=object if exact else float)
    if array.size != scenario.dimension:
        raise ValueError(f"Expected {scenario.dimension} entries for {scenario}, got {array.size}.")
    array = array.reshape(scenario.shape)
    if exact:
        array = np.vectorize(to_fraction, otypes=[object])(array)
    else:
        array = array.astype(float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Behavior:
    """
    Behavior stores the conditional probability table p(a,b|x,y), either as exact rationals (exact=True) or as floats.
    The table is indexed as table[x, y, a, b] and is read-only.
    """
    scenario: Scenario
    table: npt.ArrayLike
    exact: bool = True
    name: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.scenario, Scenario):
            raise TypeError("scenario needs to be a Scenario object.")
        object.__setattr__(self, 'table', _as_table(self.scenario, self.table, self.exact))

    @classmethod
    def from_function(cls, scenario: Scenario, func: Callable[[int, int, int, int], Number], exact: bool = True,
                      name: Optional[str] = None) -> "Behavior":
        """
        Builds a behavior from a function func(a, b, x, y).
        """
        table = np.empty(scenario.shape, dtype=object if exact else float)
        for a, b, x, y in scenario.labels():
            table[x, y, a, b] = func(a, b, x, y)
        return cls(scenario, table, exact, name)

    @classmethod
    def from_vector(cls, scenario: Scenario, vector, exact: bool = True, name: Optional[str] = None) -> "Behavior":
        return cls(scenario, np.asarray(list(vector), dtype=object if exact else float), exact, name)

    @classmethod
    def uniform(cls, scenario: Scenario, exact: bool = True) -> "Behavior":
        value = Fraction(1, scenario.alice_outputs * scenario.bob_outputs)
        return cls.from_function(scenario, lambda a, b, x, y: value if exact else float(value), exact, "uniform")

    @property
    def vector(self) -> np.ndarray:
        return self.table.reshape(-1)

    def __getitem__(self, key: tuple) -> Number:
        a, b, x, y = key
        return self.table[x, y, a, b]

    def alice_marginal(self, a: int, x: int, y: int = 0) -> Number:
        return sum(self.table[x, y, a, :])

    def bob_marginal(self, b: int, y: int, x: int = 0) -> Number:
        return sum(self.table[x, y, :, b])

    def to_float(self) -> "Behavior":
        if not self.exact:
            return self
        return Behavior(self.scenario, self.table.astype(float), False, self.name)

    def rationalize(self, denominator_cap: int = NumericalTolerances.RATIONAL_DENOMINATOR_CAP) -> "Behavior":
        """
        Exact copy of the behavior. Float entries are rounded by continued fractions with the given denominator cap.
        """
        if self.exact:
            return self
        table = np.vectorize(lambda v: to_fraction(v, denominator_cap), otypes=[object])(self.table)
        return Behavior(self.scenario, table, True, self.name)

    def mix(self, other: "Behavior", weight: Number) -> "Behavior":
        """
        Returns weight * self + (1 - weight) * other. Exactness is kept only if both behaviors and the weight are exact.
        """
        if self.scenario != other.scenario:
            raise ScenarioMismatchError(self.scenario, other.scenario)
        exact = self.exact and other.exact and isinstance(weight, (Fraction, numbers.Integral))
        if exact:
            weight = Fraction(weight)
            table = weight * self.table + (1 - weight) * other.table
        else:
            table = float(weight) * self.table.astype(float) + (1 - float(weight)) * other.table.astype(float)
        return Behavior(self.scenario, table, exact)

    def __eq__(self, other):
        if not isinstance(other, Behavior):
            return NotImplemented
        return (self.scenario == other.scenario and self.exact == other.exact
                and bool(np.all(self.table == other.table)))

    def __hash__(self):
        return hash((self.scenario, self.exact, tuple(self.vector.tolist())))

    def __repr__(self):
        return f"Behavior({self.name or 'unnamed'}, {self.scenario}, exact={self.exact})"

    def __str__(self):
        return f"{self.name or 'behavior'} on {self.scenario}"


@dataclass(frozen=True, eq=False)
class BellFunctional:
    """
    A linear functional on behaviors, value = offset + sum coefficients * entries. With sense 'lower' the functional
    expresses the inequality value >= 0, with sense 'upper' the inequality value <= 0.
    """
    scenario: Scenario
    coefficients: npt.ArrayLike
    offset: Number = Fraction(0)
    sense: str = 'lower'
    name: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.scenario, Scenario):
            raise TypeError("scenario needs to be a Scenario object.")
        if self.sense not in ('lower', 'upper'):
            raise ValueError("sense needs to be 'lower' or 'upper'.")
        object.__setattr__(self, 'coefficients', _as_table(self.scenario, self.coefficients, exact=True))
        object.__setattr__(self, 'offset', to_fraction(self.offset))

    @classmethod
    def from_terms(cls, scenario: Scenario, terms: Iterable[tuple], offset: Number = 0, sense: str = 'lower',
                   name: Optional[str] = None) -> "BellFunctional":
        """
        Builds a functional from terms (coefficient, a, b, x, y). Repeated terms add up.
        """
        coefficients = np.full(scenario.shape, Fraction(0), dtype=object)
        for coefficient, a, b, x, y in terms:
            scenario.index(a, b, x, y)
            coefficients[x, y, a, b] += to_fraction(coefficient)
        return cls(scenario, coefficients, offset, sense, name)

    @classmethod
    def from_homogeneous(cls, scenario: Scenario, vector, sense: str = 'lower',
                         name: Optional[str] = None) -> "BellFunctional":
        """
        Builds a functional from a vector (coefficients..., offset) as used by the polytope representations.
        """
        vector = list(vector)
        if len(vector) != scenario.dimension + 1:
            raise ValueError(f"Expected {scenario.dimension + 1} homogeneous entries, got {len(vector)}.")
        return cls(scenario, np.asarray(vector[:-1], dtype=object), vector[-1], sense, name)

    @staticmethod
    def alice_marginal_terms(coefficient: Number, outputs: Iterable[int], x: int, scenario: Scenario,
                             y: int = 0, b: Optional[int] = None) -> list:
        """
        Expands a marginal expression coefficient * p(A_x in outputs [, B_y = b]) into joint terms. Without b, Bob's
        outcome is summed over for the input y (by default Bob's input 0).
        """
        bob_outcomes = range(scenario.bob_outputs) if b is None else (b,)
        return [(coefficient, a, b_, x, y) for a in outputs for b_ in bob_outcomes]

    def homogeneous(self) -> tuple:
        return tuple(self.coefficients.reshape(-1).tolist()) + (self.offset,)

    def terms(self) -> list:
        """
        Nonzero terms (coefficient, a, b, x, y) in coordinate order.
        """
        return [(self.coefficients[x, y, a, b], a, b, x, y) for a, b, x, y in self.scenario.labels()
                if self.coefficients[x, y, a, b] != 0]

    def negated(self) -> "BellFunctional":
        sense = 'upper' if self.sense == 'lower' else 'lower'
        return BellFunctional(self.scenario, -self.coefficients, -self.offset, sense, self.name)

    def is_satisfied_by(self, p: Behavior, tolerance: float = 0.0) -> bool:
        value = evaluate(self, p)
        return value >= -tolerance if self.sense == 'lower' else value <= tolerance

    def __eq__(self, other):
        if not isinstance(other, BellFunctional):
            return NotImplemented
        return (self.scenario == other.scenario and self.sense == other.sense and self.offset == other.offset
                and bool(np.all(self.coefficients == other.coefficients)))

    def __hash__(self):
        return hash((self.scenario, self.sense, self.homogeneous()))

    def __repr__(self):
        return f"BellFunctional({self.name or 'unnamed'}, {len(self.terms())} terms, sense={self.sense})"

    def __str__(self):
        parts = []
        for coefficient, a, b, x, y in self.terms():
            sign = '-' if coefficient < 0 else '+'
            magnitude = abs(coefficient)
            factor = '' if magnitude == 1 else f"{magnitude} "
            parts.append(f"{sign} {factor}p(A{x}={a},B{y}={b})")
        text = ' '.join(parts).lstrip('+ ') or '0'
        if self.offset != 0:
            text += f" {'-' if self.offset < 0 else '+'} {abs(self.offset)}"
        return f"{self.name + ': ' if self.name else ''}{text} {'>=' if self.sense == 'lower' else '<='} 0"


def evaluate(f: BellFunctional, p: Behavior) -> Number:
    """
    Evaluates the functional on the behavior: offset + sum coefficients * entries. The result is an exact Fraction when
    the behavior is exact, a float otherwise.
    :param f: (BellFunctional)
    :param p: (Behavior)
    :return: (Fraction or float)
    """
    if f.scenario != p.scenario:
        raise ScenarioMismatchError(f.scenario, p.scenario)
    if p.exact:
        return f.offset + sum((c * v for c, v in zip(f.coefficients.reshape(-1), p.vector) if c != 0), Fraction(0))
    coefficients = f.coefficients.reshape(-1).astype(float)
    return float(f.offset) + float(np.dot(coefficients, p.vector.astype(float)))


@dataclass
class ValidationReport:
    """
    Diagnostics of a behavior: per-(x,y) normalization residuals, the smallest entry and the largest signaling
    discrepancy. Exact behaviors report exact booleans, float behaviors are judged with NumericalTolerances.EPS_NS.
    """
    normalization_residuals: dict = field(default_factory=dict)
    min_entry: Number = 0
    signaling_discrepancy: Number = 0
    normalized: bool = True
    nonnegative: bool = True
    no_signaling: bool = True

    @property
    def passed(self) -> bool:
        return self.normalized and self.nonnegative and self.no_signaling


def validate(p: Behavior, tolerance: float = NumericalTolerances.EPS_NS) -> ValidationReport:
    """
    Checks normalization, nonnegativity and no-signaling of the behavior.
    :param p: (Behavior)
    :param tolerance: (float) tolerance for float-backed behaviors; ignored for exact ones
    :return: (ValidationReport)
    """
    s = p.scenario
    tol = 0 if p.exact else tolerance
    table = p.table
    residuals = {}
    for x in range(s.alice_inputs):
        for y in range(s.bob_inputs):
            residuals[(x, y)] = sum(table[x, y].reshape(-1)) - 1
    discrepancy = 0
    # Alice's marginals independent of y, Bob's marginals independent of x
    for x in range(s.alice_inputs):
        for a in range(s.alice_outputs):
            marginals = [sum(table[x, y, a, :]) for y in range(s.bob_inputs)]
            discrepancy = max([discrepancy] + [abs(m - marginals[0]) for m in marginals])
    for y in range(s.bob_inputs):
        for b in range(s.bob_outputs):
            marginals = [sum(table[x, y, :, b]) for x in range(s.alice_inputs)]
            discrepancy = max([discrepancy] + [abs(m - marginals[0]) for m in marginals])
    min_entry = min(table.reshape(-1))
    return ValidationReport(normalization_residuals=residuals, min_entry=min_entry,
                            signaling_discrepancy=discrepancy,
                            normalized=all(abs(r) <= tol for r in residuals.values()),
                            nonnegative=min_entry >= -tol,
                            no_signaling=discrepancy <= tol)
