"""
See-saw search for quantum realizations that minimize a functional: Bob's effects, Alice's effects and the state are
optimized in turn with the other two held fixed. Every value it reports is attained by an explicit realization, so
it bounds the quantum minimum from above.
"""

__all__ = ['SeesawResult', 'seesaw_lower_bound']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from LFIC_sim.custom_exceptions import ScenarioMismatchError, SDPIterationLimitError
from LFIC_sim.npa.sdp import solve_standard_sdp
from LFIC_sim.quantum import QuantumRealization
from LFIC_sim.scenario import BellFunctional, Scenario
from LFIC_sim.utils.constants import NumericalTolerances


logger = logging.getLogger(__name__)

MAX_LOCAL_DIMENSION = 4


@dataclass
class SeesawResult:
    value: float
    realization: Optional[QuantumRealization]
    seed: int
    history: list = field(default_factory=list)


def _random_measurement(rng: np.random.Generator, dim: int, outcomes: int) -> list:
    """Projective measurement from a random orthonormal basis, basis vectors dealt out cyclically to the outcomes."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    effects = [np.zeros((dim, dim)) for _ in range(outcomes)]
    for k in range(dim):
        effects[k % outcomes] += np.outer(q[:, k], q[:, k])
    return effects


def _normalize_povm(effects: Sequence[np.ndarray]) -> list:
    """Clips negative eigenvalues and rescales so that the effects sum to the identity exactly."""
    clipped = []
    for e in effects:
        w, v = np.linalg.eigh((e + e.T) / 2)
        clipped.append((v * np.clip(w, 0, None)) @ v.T)
    total = sum(clipped)
    w, v = np.linalg.eigh(total)
    inv_half = (v / np.sqrt(np.clip(w, 1e-300, None))) @ v.T
    return [inv_half @ e @ inv_half for e in clipped]


def _optimal_povm(operators: Sequence[np.ndarray]) -> list:
    """
    Minimizes sum_o tr(E_o O_o) over POVMs. Two outcomes: E_0 projects on the negative eigenspace of O_0 - O_1.
    More outcomes: block-diagonal SDP with X = diag(E_o) and the completeness constraints.
    """
    dim = operators[0].shape[0]
    k = len(operators)
    if k == 1:
        return [np.eye(dim)]
    if k == 2:
        w, v = np.linalg.eigh(operators[0] - operators[1])
        negative = v[:, w < 0]
        e0 = negative @ negative.T
        return [e0, np.eye(dim) - e0]
    n = k * dim
    C = np.zeros((n, n))
    for o, op in enumerate(operators):
        C[o * dim:(o + 1) * dim, o * dim:(o + 1) * dim] = (op + op.T) / 2
    constraints, rhs = [], []
    for i in range(dim):
        for j in range(i, dim):
            A = np.zeros((n, n))
            for o in range(k):
                A[o * dim + i, o * dim + j] += 0.5
                A[o * dim + j, o * dim + i] += 0.5
            constraints.append(A)
            rhs.append(1.0 if i == j else 0.0)
    result = solve_standard_sdp(C, np.array(constraints), np.array(rhs))
    blocks = [result.X[o * dim:(o + 1) * dim, o * dim:(o + 1) * dim] for o in range(k)]
    return _normalize_povm(blocks)


def _value(coefficients: np.ndarray, offset: float, rho: np.ndarray, alice: list, bob: list, dims: tuple) -> float:
    R = rho.reshape(dims[0], dims[1], dims[0], dims[1])
    table = np.einsum('ijkl,xaki,yblj->xyab', R, np.array(alice), np.array(bob))
    return offset + float(np.sum(coefficients * table))


def _single_run(coefficients: np.ndarray, offset: float, s: Scenario, dims: tuple, rng: np.random.Generator,
                max_iter: int, tol: float) -> tuple:
    dim_a, dim_b = dims
    alice = [_random_measurement(rng, dim_a, s.alice_outputs) for _ in range(s.alice_inputs)]
    bob = [_random_measurement(rng, dim_b, s.bob_outputs) for _ in range(s.bob_inputs)]
    psi = rng.standard_normal(dim_a * dim_b)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi)
    history = [_value(coefficients, offset, rho, alice, bob, dims)]
    for _ in range(max_iter):
        R = rho.reshape(dim_a, dim_b, dim_a, dim_b)
        for y in range(s.bob_inputs):
            ops = []
            for b in range(s.bob_outputs):
                reduced = sum(coefficients[x, y, a, b] * np.einsum('ijkl,ki->jl', R, alice[x][a])
                              for x in range(s.alice_inputs) for a in range(s.alice_outputs))
                ops.append(np.zeros((dim_b, dim_b)) + reduced)
            bob[y] = _optimal_povm(ops)
        for x in range(s.alice_inputs):
            ops = []
            for a in range(s.alice_outputs):
                reduced = sum(coefficients[x, y, a, b] * np.einsum('ijkl,lj->ik', R, bob[y][b])
                              for y in range(s.bob_inputs) for b in range(s.bob_outputs))
                ops.append(np.zeros((dim_a, dim_a)) + reduced)
            alice[x] = _optimal_povm(ops)
        operator = sum(coefficients[x, y, a, b] * np.kron(alice[x][a], bob[y][b])
                       for x in range(s.alice_inputs) for y in range(s.bob_inputs)
                       for a in range(s.alice_outputs) for b in range(s.bob_outputs))
        operator = (operator + operator.T) / 2
        w, v = np.linalg.eigh(operator)
        rho = np.outer(v[:, 0], v[:, 0])
        history.append(offset + float(w[0]))
        if history[-2] - history[-1] < tol:
            break
    return history[-1], rho, alice, bob, history


def seesaw_lower_bound(s: Scenario, f: BellFunctional, dims: tuple = (3, 2), seed: int = 0, restarts: int = 10,
                       max_iter: int = NumericalTolerances.SEESAW_MAX_ITER,
                       tol: float = NumericalTolerances.SEESAW_TOL) -> SeesawResult:
    """
    Alternating minimization of the functional over real states and measurements of the given local dimensions.
    Restarts draw from a generator seeded with seed; the best restart is kept.
    :param s: (Scenario)
    :param f: (BellFunctional) minimized
    :param dims: (tuple) local dimensions (dim_a, dim_b), each at most 4
    :return: (SeesawResult) attained value, realization and the value history of the best restart
    """
    if f.scenario != s:
        raise ScenarioMismatchError(f.scenario, s)
    if max(dims) > MAX_LOCAL_DIMENSION or min(dims) < 1:
        raise ValueError(f"local dimensions need to lie in 1..{MAX_LOCAL_DIMENSION}.")
    coefficients = f.coefficients.astype(float)
    offset = float(f.offset)
    rng = np.random.default_rng(seed)
    best = SeesawResult(np.inf, None, seed)
    for restart in range(restarts):
        try:
            value, rho, alice, bob, history = _single_run(coefficients, offset, s, dims, rng, max_iter, tol)
        except (SDPIterationLimitError, np.linalg.LinAlgError) as err:
            logger.warning(f"seesaw restart {restart} failed: {err}")
            continue
        logger.debug(f"seesaw restart {restart}: value {value:.10f}")
        if value < best.value:
            realization = QuantumRealization(s, rho, tuple(tuple(m) for m in alice), tuple(tuple(m) for m in bob),
                                             name=f"seesaw seed {seed}")
            best = SeesawResult(value, realization, seed, history)
    return best
