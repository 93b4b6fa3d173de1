"""
Exact linear algebra over the rationals: reduced row echelon form, rank, null spaces, linear solves and the integer
canonical forms used to deduplicate facets.
"""

__all__ = ['rref', 'rank', 'nullspace', 'solve', 'integer_primitive', 'canonical_equality', 'reduce_modulo']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import math
from fractions import Fraction
from typing import Optional, Sequence

from LFIC_sim.scenario import to_fraction


def _matrix(rows: Sequence[Sequence]) -> list:
    return [[to_fraction(v) for v in row] for row in rows]


def rref(rows: Sequence[Sequence], ncols: Optional[int] = None) -> tuple:
    """
    Reduced row echelon form by Gauss-Jordan elimination over the rationals. Zero rows are dropped.
    :param rows: matrix as a sequence of rows
    :param ncols: (int) number of columns, needed only when rows is empty
    :return: (list of rows, list of pivot columns)
    """
    m = _matrix(rows)
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for col in range(ncols):
        pivot_row = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if pivot_row is None:
            continue
        m[r], m[pivot_row] = m[pivot_row], m[r]
        inv = 1 / m[r][col]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                factor = m[i][col]
                m[i] = [vi - factor * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list:
    """
    Basis of {z : rows z = 0}, one vector per free column. Vector k has a 1 at the k-th free column.
    """
    reduced, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        z = [Fraction(0)] * ncols
        z[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            z[p] = -row[f]
        basis.append(z)
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence) -> Optional[list]:
    """
    One exact solution of rows z = rhs (free variables set to zero), None if the system is inconsistent.
    """
    if not rows:
        return None if any(to_fraction(v) != 0 for v in rhs) else []
    ncols = len(rows[0])
    augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
    reduced, pivots = rref(augmented, ncols + 1)
    if ncols in pivots:
        return None
    z = [Fraction(0)] * ncols
    for row, p in zip(reduced, pivots):
        z[p] = row[-1]
    return z


def integer_primitive(vector: Sequence) -> tuple:
    """
    Scales a rational vector by a positive factor to the primitive integer vector (gcd of entries 1). The sign is kept.
    """
    fracs = [to_fraction(v) for v in vector]
    lcm = 1
    for v in fracs:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    ints = [int(v * lcm) for v in fracs]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g == 0:
        return tuple(ints)
    return tuple(v // g for v in ints)


def canonical_equality(vector: Sequence) -> tuple:
    """
    Primitive integer form of an equality, signed so that its first nonzero entry is positive.
    """
    ints = integer_primitive(vector)
    lead = next((v for v in ints if v != 0), 0)
    return tuple(-v for v in ints) if lead < 0 else ints


def reduce_modulo(vector: Sequence, reduced_rows: Sequence[Sequence], pivots: Sequence[int]) -> list:
    """
    Representative of the vector modulo the row space of an RREF system: the entries at the pivot columns become 0.
    """
    g = [to_fraction(v) for v in vector]
    for row, p in zip(reduced_rows, pivots):
        if g[p] != 0:
            factor = g[p]
            g = [gi - factor * ri for gi, ri in zip(g, row)]
    return g
