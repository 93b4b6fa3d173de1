"""
Membership of behaviors in a moment relaxation and the location of the relaxation's boundary along rays in behavior
space.
"""

__all__ = ['feasibility_margin', 'relaxation_contains', 'quantum_boundary_along_ray', 'boundary_fan']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence, Union

import numpy as np

from LFIC_sim.config import definations
from LFIC_sim.custom_exceptions import OutsideAffineHullError, SDPIterationLimitError
from LFIC_sim.npa.moments import build_moment_program
from LFIC_sim.npa.sdp import solve_lmi
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario
from LFIC_sim.utils.constants import NumericalTolerances


logger = logging.getLogger(__name__)

AFFINE_TOL = 1e-9


class _RelaxationModel:
    """
    Splits the moment labels into those fixed by the behavior (single letters and A.B products) and the free rest.
    Behavior coordinates are const + M v with v the fixed labels.
    """
    def __init__(self, s: Scenario, level: str, include_bb: bool):
        zero = BellFunctional.from_terms(s, [])
        self.program = build_moment_program(s, zero, level, 'min', include_bb)
        fixed = sorted({k for expr in self.program.entry_expressions for k in expr if k is not None})
        self.fixed = fixed
        self.free = [k for k in range(len(self.program.labels)) if k not in set(fixed)]
        column = {k: j for j, k in enumerate(fixed)}
        self.M = np.zeros((s.dimension, len(fixed)))
        self.const = np.zeros(s.dimension)
        for i, expr in enumerate(self.program.entry_expressions):
            for k, coef in expr.items():
                if k is None:
                    self.const[i] += coef
                else:
                    self.M[i, column[k]] += coef

    def fixed_values(self, vector: np.ndarray, affine: bool = True) -> np.ndarray:
        """Label values reproducing the vector; raises if the vector leaves the no-signaling affine hull."""
        target = vector - self.const if affine else vector
        values, *_ = np.linalg.lstsq(self.M, target, rcond=None)
        if np.max(np.abs(self.M @ values - target), initial=0.0) > AFFINE_TOL:
            raise OutsideAffineHullError()
        return values

    def base(self, values: np.ndarray) -> np.ndarray:
        return self.program.F0 + np.tensordot(values, self.program.F[self.fixed], axes=1)

    def linear(self, values: np.ndarray) -> np.ndarray:
        return np.tensordot(values, self.program.F[self.fixed], axes=1)


@functools.lru_cache(maxsize=None)
def _model(s: Scenario, level: str, include_bb: bool) -> _RelaxationModel:
    return _RelaxationModel(s, level, include_bb)


def _vector(p: Union[Behavior, np.ndarray]) -> np.ndarray:
    if isinstance(p, Behavior):
        return p.vector.astype(float)
    return np.asarray(p, dtype=float).reshape(-1)


def feasibility_margin(p: Behavior, level: str = definations.DEFAULT_NPA_LEVEL, include_bb: bool = True) -> float:
    """
    Largest lambda such that some moment matrix completing the behavior satisfies Gamma - lambda 1 >= 0.
    The behavior lies in the relaxation iff the margin is nonnegative.
    """
    model = _model(p.scenario, level, include_bb)
    values = model.fixed_values(_vector(p))
    n = model.program.size
    F = np.concatenate([model.program.F[model.free], -np.eye(n)[None]], axis=0)
    c = np.zeros(len(model.free) + 1)
    c[-1] = -1.0
    solution = solve_lmi(model.base(values), F, c)
    return -solution.primal_optimum


def relaxation_contains(p: Behavior, level: str = definations.DEFAULT_NPA_LEVEL, include_bb: bool = True) -> bool:
    """
    Feasibility with margin tolerance SDP_FEASIBILITY_TOL. A solve that hits the iteration limit counts as infeasible.
    """
    try:
        return feasibility_margin(p, level, include_bb) >= -NumericalTolerances.SDP_FEASIBILITY_TOL
    except SDPIterationLimitError:
        logger.warning("relaxation_contains: iteration limit reached, treating the point as infeasible")
        return False


def _ns_limit(origin: np.ndarray, direction: np.ndarray) -> float:
    negative = direction < -AFFINE_TOL
    if not np.any(negative):
        return math.inf
    return float(np.min(-origin[negative] / direction[negative]))


def quantum_boundary_along_ray(origin: Behavior, direction: Union[Behavior, np.ndarray, Sequence],
                               level: str = definations.DEFAULT_NPA_LEVEL, method: str = 'bisection',
                               width: float = NumericalTolerances.BISECTION_WIDTH, include_bb: bool = True) -> float:
    """
    Largest t with origin + t direction in the relaxation.
    :param origin: (Behavior) point inside the relaxation
    :param direction: vector in behavior coordinates, tangent to the no-signaling affine hull
    :param method: 'bisection' (feasibility checks up to the given width, the last feasible t is returned) or
        'direct' (a single SDP maximizing t, returning its safe upper bound)
    :return: (float) math.inf for the zero direction
    :raises OutsideAffineHullError: if the direction leaves the no-signaling affine hull
    """
    if method not in ('bisection', 'direct'):
        raise ValueError("method needs to be 'bisection' or 'direct'.")
    d = _vector(direction)
    if np.allclose(d, 0.0):
        return math.inf
    s = origin.scenario
    model = _model(s, level, include_bb)
    o = _vector(origin)
    slope = model.fixed_values(d, affine=False)
    t_ns = _ns_limit(o, d)

    if method == 'direct':
        values = model.fixed_values(o)
        n = model.program.size
        F0 = np.zeros((n + 1, n + 1))
        F0[:n, :n] = model.base(values)
        F0[n, n] = t_ns
        free = model.program.F[model.free]
        F = np.zeros((len(model.free) + 1, n + 1, n + 1))
        F[:-1, :n, :n] = free
        F[-1, :n, :n] = model.linear(slope)
        F[-1, n, n] = -1.0
        c = np.zeros(len(model.free) + 1)
        c[-1] = -1.0
        return -solve_lmi(F0, F, c).optimum

    def feasible(t):
        point = Behavior(s, o + t * d, exact=False)
        return relaxation_contains(point, level, include_bb)

    if not feasible(0.0):
        raise ValueError("The origin lies outside the relaxation.")
    if feasible(t_ns):
        return t_ns
    lo, hi = 0.0, t_ns
    while hi - lo > width:
        mid = (lo + hi) / 2
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    logger.debug(f"quantum_boundary_along_ray: t* in [{lo:.6f}, {hi:.6f}]")
    return lo


def boundary_fan(origin: Behavior, directions: Sequence, level: str = definations.DEFAULT_NPA_LEVEL,
                 method: str = 'bisection', threads: int = None, include_bb: bool = True) -> list:
    """
    Boundary parameters for several rays, solved concurrently and returned in the order of the directions.
    """
    threads = threads or definations.default_threads()
    solve = functools.partial(quantum_boundary_along_ray, origin, level=level, method=method, include_bb=include_bb)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(solve, directions))
