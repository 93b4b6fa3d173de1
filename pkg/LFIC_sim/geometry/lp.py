"""
Exact rational linear programming. The core is a two-phase tableau simplex with Bland's rule on the standard form
min c.x s.t. Ax = b, x >= 0. On top of it sit the LP over an H-representation with dual certificate (lp_optimize) and
the convex-combination LP over a vertex set (convex_combination) used for membership decisions.
"""

__all__ = ['SimplexResult', 'LPCertificate', 'LPResult', 'FarkasCertificate', 'simplex', 'lp_optimize',
           'convex_combination']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from LFIC_sim.custom_exceptions import InfeasibleError, UnboundedError
from LFIC_sim.geometry.polytope import LinearConstraint, PolytopeH
from LFIC_sim.geometry.rational import solve
from LFIC_sim.scenario import to_fraction


logger = logging.getLogger(__name__)

ZERO = Fraction(0)


@dataclass(frozen=True)
class SimplexResult:
    """
    status is 'optimal', 'infeasible' or 'unbounded'. For 'optimal', x and the dual y (c - A^T y >= 0, b.y = c.x) are
    set. For 'infeasible', farkas is y with A^T y <= 0 and b.y > 0. For 'unbounded', ray is d >= 0 with Ad = 0, c.d < 0.
    """
    status: str
    value: Optional[Fraction] = None
    x: Optional[tuple] = None
    y: Optional[tuple] = None
    farkas: Optional[tuple] = None
    ray: Optional[tuple] = None
    pivots: int = 0


class _Tableau:
    """
    Dense simplex tableau. rows[i] = [B^-1 A | B^-1 b], cost = reduced costs with the negated objective value last.
    """
    def __init__(self, rows: list, basis: list, ncols: int):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols
        self.cost = [ZERO] * (ncols + 1)
        self.pivots = 0

    def set_cost(self, c: Sequence[Fraction]) -> None:
        cost = list(c) + [ZERO]
        for i, j in enumerate(self.basis):
            cj = cost[j]
            if cj != 0:
                row = self.rows[i]
                cost = [ck - cj * rk for ck, rk in zip(cost, row)]
        self.cost = cost

    def pivot(self, r: int, col: int) -> None:
        row = self.rows[r]
        inv = 1 / row[col]
        row = [v * inv for v in row]
        self.rows[r] = row
        for i, other in enumerate(self.rows):
            if i != r and other[col] != 0:
                factor = other[col]
                self.rows[i] = [o - factor * v for o, v in zip(other, row)]
        if self.cost[col] != 0:
            factor = self.cost[col]
            self.cost = [o - factor * v for o, v in zip(self.cost, row)]
        self.basis[r] = col
        self.pivots += 1

    def run(self, allowed: int) -> Optional[int]:
        """
        Bland's rule iterations over columns < allowed. Returns None at optimality, else the unbounded column.
        """
        while True:
            entering = next((j for j in range(allowed) if self.cost[j] < 0), None)
            if entering is None:
                return None
            leaving = None
            best = None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    ratio = row[-1] / row[entering]
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leaving]):
                        best, leaving = ratio, i
            if leaving is None:
                return entering
            self.pivot(leaving, entering)


def simplex(c: Sequence, A: Sequence[Sequence], b: Sequence) -> SimplexResult:
    """
    Solves min c.x s.t. Ax = b, x >= 0 exactly.
    :param c: objective of length n
    :param A: m x n constraint matrix
    :param b: right-hand side of length m
    :return: (SimplexResult)
    """
    c = [to_fraction(v) for v in c]
    A = [[to_fraction(v) for v in row] for row in A]
    b = [to_fraction(v) for v in b]
    m, n = len(A), len(c)
    signs = [-1 if bi < 0 else 1 for bi in b]
    rows = []
    for i in range(m):
        art = [ZERO] * m
        art[i] = Fraction(1)
        rows.append([signs[i] * v for v in A[i]] + art + [signs[i] * b[i]])
    tableau = _Tableau(rows, [n + i for i in range(m)], n + m)

    # phase 1: minimize the sum of the artificials
    tableau.set_cost([ZERO] * n + [Fraction(1)] * m)
    tableau.run(n + m)
    if -tableau.cost[-1] > 0:
        # reduced cost of artificial i is 1 - y_i
        y_flipped = [1 - tableau.cost[n + i] for i in range(m)]
        farkas = tuple(s * y for s, y in zip(signs, y_flipped))
        logger.debug(f"simplex: infeasible after {tableau.pivots} pivots")
        return SimplexResult('infeasible', farkas=farkas, pivots=tableau.pivots)

    # drive artificials out of the basis, dropping redundant rows
    kept = list(range(m))
    r = 0
    while r < len(tableau.rows):
        if tableau.basis[r] >= n:
            col = next((j for j in range(n) if tableau.rows[r][j] != 0), None)
            if col is None:
                del tableau.rows[r]
                del tableau.basis[r]
                del kept[r]
                continue
            tableau.pivot(r, col)
        r += 1
    tableau.rows = [row[:n] + [row[-1]] for row in tableau.rows]
    tableau.ncols = n

    # phase 2
    tableau.set_cost(c)
    unbounded = tableau.run(n)
    if unbounded is not None:
        ray = [ZERO] * n
        ray[unbounded] = Fraction(1)
        for i, j in enumerate(tableau.basis):
            ray[j] = -tableau.rows[i][unbounded]
        logger.debug(f"simplex: unbounded after {tableau.pivots} pivots")
        return SimplexResult('unbounded', ray=tuple(ray), pivots=tableau.pivots)

    x = [ZERO] * n
    for i, j in enumerate(tableau.basis):
        x[j] = tableau.rows[i][-1]
    value = sum((ci * xi for ci, xi in zip(c, x) if xi != 0), ZERO)
    # duals: B^T y = c_B on the kept rows, zero on the redundant ones
    y = [ZERO] * m
    if kept:
        basis_t = [[A[i][j] for i in kept] for j in tableau.basis]
        y_kept = solve(basis_t, [c[j] for j in tableau.basis])
        for i, yi in zip(kept, y_kept):
            y[i] = yi
    logger.debug(f"simplex: optimal value {value} after {tableau.pivots} pivots")
    return SimplexResult('optimal', value=value, x=tuple(x), y=tuple(y), pivots=tableau.pivots)


@dataclass(frozen=True)
class FarkasCertificate:
    """
    Multipliers mu >= 0 (inequalities) and nu (equalities) with G^T mu + E^T nu = 0 and h.mu + e.nu < 0, which
    contradicts G v + h >= 0, E v + e = 0.
    """
    inequality_multipliers: tuple
    equality_multipliers: tuple

    def verify(self, h: PolytopeH) -> bool:
        dim = h.dimension
        combined = [ZERO] * (dim + 1)
        for mu, con in zip(self.inequality_multipliers, h.inequalities):
            if mu < 0:
                return False
            combined = [s + mu * v for s, v in zip(combined, con.homogeneous)]
        for nu, con in zip(self.equality_multipliers, h.equalities):
            combined = [s + nu * v for s, v in zip(combined, con.homogeneous)]
        return all(v == 0 for v in combined[:-1]) and combined[-1] < 0


@dataclass(frozen=True)
class LPCertificate:
    """
    Dual certificate of an H-representation LP: the objective normal equals sign * (G^T mu + E^T nu) with mu >= 0,
    and the bound sign * (-h.mu - e.nu) + offset equals the optimum. sign is +1 for minimization, -1 for maximization.
    """
    inequality_multipliers: tuple
    equality_multipliers: tuple
    sign: int

    def bound(self, objective: LinearConstraint, h: PolytopeH) -> Fraction:
        dual = -sum((mu * c.offset for mu, c in zip(self.inequality_multipliers, h.inequalities)), ZERO)
        dual -= sum((nu * c.offset for nu, c in zip(self.equality_multipliers, h.equalities)), ZERO)
        return self.sign * dual + objective.offset

    def verify(self, objective: LinearConstraint, h: PolytopeH) -> bool:
        if any(mu < 0 for mu in self.inequality_multipliers):
            return False
        combined = [ZERO] * h.dimension
        for mu, c in zip(self.inequality_multipliers, h.inequalities):
            combined = [s + mu * n for s, n in zip(combined, c.normal)]
        for nu, c in zip(self.equality_multipliers, h.equalities):
            combined = [s + nu * n for s, n in zip(combined, c.normal)]
        return all(self.sign * s == f for s, f in zip(combined, objective.normal))


@dataclass(frozen=True)
class LPResult:
    optimum: Fraction
    argument: tuple
    certificate: LPCertificate
    sense: str

    def verify(self, objective: LinearConstraint, h: PolytopeH) -> bool:
        """Primal feasibility, dual feasibility and exact equality of primal and dual values."""
        return (h.contains(self.argument) and self.certificate.verify(objective, h)
                and objective.value(self.argument) == self.optimum == self.certificate.bound(objective, h))


def _as_objective(objective, dimension: int) -> LinearConstraint:
    if isinstance(objective, LinearConstraint):
        return objective
    values = list(objective)
    if len(values) == dimension:
        return LinearConstraint(tuple(values), 0)
    if len(values) == dimension + 1:
        return LinearConstraint.from_homogeneous(values)
    raise ValueError(f"Objective of length {len(values)} does not fit dimension {dimension}.")


def lp_optimize(objective: Union[LinearConstraint, Sequence], h: PolytopeH, sense: str = 'min') -> LPResult:
    """
    Optimizes the affine objective normal.v + offset over the polytope h exactly.
    :param objective: LinearConstraint, or a sequence of length dim (no offset) or dim + 1 (offset last)
    :param h: (PolytopeH)
    :param sense: 'min' or 'max'
    :return: (LPResult) optimum, optimal point and dual certificate
    :raises InfeasibleError: with a FarkasCertificate
    :raises UnboundedError: with a ray along which the objective improves without bound
    """
    if sense not in ('min', 'max'):
        raise ValueError("sense needs to be 'min' or 'max'.")
    objective = _as_objective(objective, h.dimension)
    sign = 1 if sense == 'min' else -1
    n = h.dimension
    G = [c.normal for c in h.inequalities]
    E = [c.normal for c in h.equalities]
    mg = len(G)
    # v = v+ - v-, G v - s = -h, E v = -e
    c = [sign * f for f in objective.normal] + [-sign * f for f in objective.normal] + [ZERO] * mg
    A = []
    for i, row in enumerate(G):
        slack = [ZERO] * mg
        slack[i] = Fraction(-1)
        A.append(list(row) + [-v for v in row] + slack)
    for row in E:
        A.append(list(row) + [-v for v in row] + [ZERO] * mg)
    b = [-con.offset for con in h.inequalities] + [-con.offset for con in h.equalities]
    result = simplex(c, A, b)
    if result.status == 'infeasible':
        certificate = FarkasCertificate(result.farkas[:mg], result.farkas[mg:])
        raise InfeasibleError(certificate, "The constraint system is infeasible.")
    if result.status == 'unbounded':
        ray = tuple(p - q for p, q in zip(result.ray[:n], result.ray[n:2 * n]))
        raise UnboundedError(ray, "The objective is unbounded over the polytope.")
    argument = tuple(p - q for p, q in zip(result.x[:n], result.x[n:2 * n]))
    certificate = LPCertificate(result.y[:mg], result.y[mg:], sign)
    optimum = objective.value(argument)
    return LPResult(optimum, argument, certificate, sense)


def convex_combination(vertices: Sequence[Sequence], point: Sequence) -> tuple:
    """
    Finds weights lambda >= 0, sum lambda = 1, with sum lambda_i v_i = point.
    :return: ('inside', weights) or ('outside', (w, w0)) where w.v + w0 <= 0 on every vertex and w.point + w0 > 0
    """
    vertices = [[to_fraction(v) for v in vertex] for vertex in vertices]
    point = [to_fraction(p) for p in point]
    dim = len(point)
    A = [[vertex[k] for vertex in vertices] for k in range(dim)]
    A.append([Fraction(1)] * len(vertices))
    b = point + [Fraction(1)]
    result = simplex([ZERO] * len(vertices), A, b)
    if result.status == 'optimal':
        return 'inside', result.x
    return 'outside', (result.farkas[:dim], result.farkas[dim])
