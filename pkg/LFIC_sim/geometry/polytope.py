"""
This module contains the vertex (PolytopeV) and facet (PolytopeH) representations of polytopes over exact rationals,
and their text format. The text format follows the common polyhedron-file layout:

    H-representation
    linearity 2 5 6
    begin
    6 4 rational
    b  n_1  n_2  n_3
    ...
    end

Each H row [b, n] states b + n.v >= 0, rows listed after 'linearity' are equalities. Each V row [1, v] is a vertex and
[0, r] a ray. Lines starting with '*' are comments.
"""

__all__ = ['LinearConstraint', 'PolytopeV', 'PolytopeH', 'polytope_to_text', 'polytope_from_text']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from LFIC_sim.custom_exceptions import DocumentParseError
from LFIC_sim.geometry.rational import canonical_equality, integer_primitive
from LFIC_sim.scenario import to_fraction


def _rational_tuple(values: Iterable) -> tuple:
    return tuple(to_fraction(v) for v in values)


@dataclass(frozen=True)
class LinearConstraint:
    """
    The affine form normal.v + offset, read as '>= 0' for inequalities and '= 0' for equalities.
    """
    normal: tuple
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, 'normal', _rational_tuple(self.normal))
        object.__setattr__(self, 'offset', to_fraction(self.offset))

    @classmethod
    def from_homogeneous(cls, vector: Sequence) -> "LinearConstraint":
        """Builds the constraint from (normal..., offset)."""
        return cls(tuple(vector[:-1]), vector[-1])

    @property
    def homogeneous(self) -> tuple:
        return self.normal + (self.offset,)

    @property
    def dimension(self) -> int:
        return len(self.normal)

    def value(self, point: Sequence) -> Fraction:
        return self.offset + sum((n * to_fraction(p) for n, p in zip(self.normal, point) if n != 0), Fraction(0))

    def canonical(self) -> tuple:
        """Primitive integer (normal..., offset) of the inequality."""
        return integer_primitive(self.homogeneous)

    def canonical_equality(self) -> tuple:
        """Primitive integer (normal..., offset) of the equality, first nonzero entry positive."""
        return canonical_equality(self.homogeneous)

    def __str__(self):
        terms = ' '.join(f"{'-' if n < 0 else '+'} {abs(n)}*v{i}" for i, n in enumerate(self.normal) if n != 0)
        return f"{terms} {'-' if self.offset < 0 else '+'} {abs(self.offset)}".lstrip('+ ')


@dataclass(frozen=True)
class PolytopeV:
    """
    Vertex representation. Duplicate vertices are merged, keeping the first occurrence.
    """
    dimension: int
    vertices: tuple
    rays: tuple = ()

    def __post_init__(self):
        if not isinstance(self.dimension, int):
            raise TypeError("dimension needs to be an integer.")
        unique = {}
        for v in self.vertices:
            v = _rational_tuple(v)
            if len(v) != self.dimension:
                raise ValueError(f"Vertex of length {len(v)} in a polytope of dimension {self.dimension}.")
            unique.setdefault(v, None)
        rays = tuple(_rational_tuple(r) for r in self.rays)
        if any(len(r) != self.dimension for r in rays):
            raise ValueError("Ray length does not match the polytope dimension.")
        object.__setattr__(self, 'vertices', tuple(unique))
        object.__setattr__(self, 'rays', rays)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, vertex) -> bool:
        return _rational_tuple(vertex) in set(self.vertices)

    def vertex_set(self) -> frozenset:
        return frozenset(self.vertices)

    def to_array(self) -> np.ndarray:
        return np.array([[float(v) for v in vertex] for vertex in self.vertices], dtype=float)

    def __repr__(self):
        return f"PolytopeV(dimension={self.dimension}, {len(self.vertices)} vertices, {len(self.rays)} rays)"


@dataclass(frozen=True)
class PolytopeH:
    """
    Facet representation: inequalities normal.v + offset >= 0 and equalities normal.v + offset = 0.
    """
    dimension: int
    inequalities: tuple
    equalities: tuple = ()

    def __post_init__(self):
        if not isinstance(self.dimension, int):
            raise TypeError("dimension needs to be an integer.")
        ineqs = tuple(c if isinstance(c, LinearConstraint) else LinearConstraint.from_homogeneous(c)
                      for c in self.inequalities)
        eqs = tuple(c if isinstance(c, LinearConstraint) else LinearConstraint.from_homogeneous(c)
                    for c in self.equalities)
        for c in ineqs + eqs:
            if c.dimension != self.dimension:
                raise ValueError(f"Constraint of dimension {c.dimension} in a polytope of dimension {self.dimension}.")
        object.__setattr__(self, 'inequalities', ineqs)
        object.__setattr__(self, 'equalities', eqs)

    def contains(self, point: Sequence) -> bool:
        """Exact membership test."""
        return (all(c.value(point) >= 0 for c in self.inequalities)
                and all(c.value(point) == 0 for c in self.equalities))

    def violated(self, point: Sequence) -> list:
        """Indices of the inequalities violated by the point."""
        return [i for i, c in enumerate(self.inequalities) if c.value(point) < 0]

    def with_equalities(self, extra: Iterable[LinearConstraint]) -> "PolytopeH":
        return PolytopeH(self.dimension, self.inequalities, self.equalities + tuple(extra))

    def facet_set(self) -> frozenset:
        return frozenset(c.canonical() for c in self.inequalities)

    def __repr__(self):
        return (f"PolytopeH(dimension={self.dimension}, {len(self.inequalities)} inequalities, "
                f"{len(self.equalities)} equalities)")


def _format_row(values: Sequence) -> str:
    return ' '.join(str(to_fraction(v)) for v in values)


def polytope_to_text(polytope: Union[PolytopeV, PolytopeH], header: Sequence[str] = ()) -> str:
    """
    Writes the polytope in the polyhedron-file layout. Header lines are emitted as '*' comments.
    """
    lines = [f"* {line}" for line in header]
    if isinstance(polytope, PolytopeH):
        rows = [(c.offset,) + c.normal for c in polytope.inequalities]
        rows += [(c.offset,) + c.normal for c in polytope.equalities]
        lines.append("H-representation")
        if polytope.equalities:
            first = len(polytope.inequalities) + 1
            indices = ' '.join(str(i) for i in range(first, first + len(polytope.equalities)))
            lines.append(f"linearity {len(polytope.equalities)} {indices}")
    elif isinstance(polytope, PolytopeV):
        rows = [(1,) + v for v in polytope.vertices] + [(0,) + r for r in polytope.rays]
        lines.append("V-representation")
    else:
        raise TypeError("polytope needs to be a PolytopeV or PolytopeH object.")
    lines.append("begin")
    lines.append(f"{len(rows)} {polytope.dimension + 1} rational")
    lines.extend(_format_row(row) for row in rows)
    lines.append("end")
    return '\n'.join(lines) + '\n'


def _parse_fraction(token: str, line_no: int, column: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise DocumentParseError(f"'{token}' is not a rational number", line_no, column)


def polytope_from_text(text: str) -> Union[PolytopeV, PolytopeH]:
    """
    Reads a polytope written by polytope_to_text (or any file in the same layout).
    :raises DocumentParseError: with the line and column of the first malformed token
    """
    kind = None
    linearity = set()
    rows = []
    expected = None
    ncols = None
    state = 'preamble'
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('*'):
            continue
        if state == 'preamble':
            if line in ('H-representation', 'V-representation'):
                kind = line[0]
            elif line.startswith('linearity'):
                tokens = line.split()
                try:
                    count = int(tokens[1])
                    linearity = {int(t) for t in tokens[2:2 + count]}
                except (IndexError, ValueError):
                    raise DocumentParseError("malformed linearity line", line_no, 1)
                if len(linearity) != count:
                    raise DocumentParseError("linearity count does not match the listed rows", line_no, 1)
            elif line == 'begin':
                state = 'size'
            else:
                raise DocumentParseError(f"unexpected line '{line}'", line_no, 1)
        elif state == 'size':
            tokens = line.split()
            if len(tokens) != 3 or tokens[2] not in ('rational', 'integer'):
                raise DocumentParseError("expected '<rows> <columns> rational'", line_no, 1)
            try:
                expected, ncols = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise DocumentParseError("row and column counts must be integers", line_no, 1)
            state = 'rows'
        elif state == 'rows':
            if line == 'end':
                state = 'done'
                continue
            tokens = raw.split()
            if len(tokens) != ncols:
                raise DocumentParseError(f"expected {ncols} entries, found {len(tokens)}", line_no, 1)
            row = []
            search_from = 0
            for token in tokens:
                column = raw.index(token, search_from) + 1
                search_from = column - 1 + len(token)
                row.append(_parse_fraction(token, line_no, column))
            rows.append(row)
        else:
            raise DocumentParseError("content after 'end'", line_no, 1)
    if kind is None:
        raise DocumentParseError("missing representation header", 1, 1)
    if state != 'done':
        raise DocumentParseError("missing 'end'", len(text.splitlines()) or 1, 1)
    if len(rows) != expected:
        raise DocumentParseError(f"expected {expected} rows, found {len(rows)}", len(text.splitlines()), 1)
    dimension = ncols - 1
    if kind == 'H':
        ineqs, eqs = [], []
        for i, row in enumerate(rows, start=1):
            constraint = LinearConstraint(tuple(row[1:]), row[0])
            (eqs if i in linearity else ineqs).append(constraint)
        return PolytopeH(dimension, tuple(ineqs), tuple(eqs))
    vertices = [tuple(row[1:]) for row in rows if row[0] != 0]
    vertices = [tuple(v / row[0] for v in vertex) for vertex, row in zip(vertices, [r for r in rows if r[0] != 0])]
    rays = [tuple(row[1:]) for row in rows if row[0] == 0]
    return PolytopeV(dimension, tuple(vertices), tuple(rays))
