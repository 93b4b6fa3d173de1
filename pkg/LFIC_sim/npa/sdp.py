"""
Dense primal-dual interior-point solver for small semidefinite programs

    (P)  min <C, X>   s.t. <A_k, X> = b_k,  X >= 0
    (D)  max b.y      s.t. S = C - sum_k y_k A_k >= 0

with Nesterov-Todd scaling and a Mehrotra-type centering parameter, plus the moment-program front end sdp_solve.
"""

__all__ = ['SDPResult', 'solve_standard_sdp', 'MomentSolution', 'sdp_solve', 'solve_lmi']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import logging
from dataclasses import dataclass

import numpy as np

from LFIC_sim.custom_exceptions import SDPIterationLimitError
from LFIC_sim.npa.moments import MomentProgram
from LFIC_sim.utils.constants import NumericalTolerances


logger = logging.getLogger(__name__)


@dataclass
class SDPResult:
    X: np.ndarray
    y: np.ndarray
    S: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int


def _sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(matrix)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.T


def _inv_sqrtm_pd(matrix: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(matrix)
    return (v / np.sqrt(w)) @ v.T


def _nt_scaling(X: np.ndarray, S: np.ndarray) -> np.ndarray:
    """W = X^1/2 (X^1/2 S X^1/2)^-1/2 X^1/2, the matrix with W S W = X."""
    x_half = _sqrtm_psd(X)
    middle = x_half @ S @ x_half
    middle = (middle + middle.T) / 2
    return x_half @ _inv_sqrtm_pd(middle) @ x_half


def _max_step(M: np.ndarray, dM: np.ndarray) -> float:
    """Largest alpha with M + alpha dM >= 0 (M positive definite)."""
    L = np.linalg.cholesky(M)
    L_inv = np.linalg.inv(L)
    eig_min = np.linalg.eigvalsh(L_inv @ dM @ L_inv.T).min()
    return np.inf if eig_min >= 0 else -1.0 / eig_min


def solve_standard_sdp(C: np.ndarray, A: np.ndarray, b: np.ndarray, tol: float = NumericalTolerances.SDP_GAP_TOL,
                       max_iter: int = NumericalTolerances.SDP_MAX_ITER) -> SDPResult:
    """
    Solves the primal-dual pair above from the infeasible start X = xi I, S = eta I.
    :param C: (n, n) symmetric cost
    :param A: (m, n, n) symmetric constraint matrices
    :param b: (m,) right-hand side
    :raises SDPIterationLimitError: if the stopping criteria are not met within max_iter iterations
    """
    n = C.shape[0]
    m = len(b)
    A_flat = A.reshape(m, n * n)
    norms_A = np.linalg.norm(A_flat, axis=1)
    xi = max(10.0, np.sqrt(n), n * np.max((1 + np.abs(b)) / (1 + norms_A))) if m else 10.0
    eta = max(10.0, np.sqrt(n), np.max(norms_A) if m else 0.0, np.linalg.norm(C))
    X = xi * np.eye(n)
    S = eta * np.eye(n)
    y = np.zeros(m)
    norm_b, norm_C = np.linalg.norm(b), np.linalg.norm(C)

    def residuals(X, y, S):
        rp = b - A_flat @ X.reshape(-1)
        Rd = C - S - np.tensordot(y, A, axes=1)
        return rp, Rd

    best_primal, gap = np.inf, np.inf
    for iteration in range(1, max_iter + 1):
        rp, Rd = residuals(X, y, S)
        primal_value = float(np.sum(C * X))
        dual_value = float(b @ y)
        gap = abs(primal_value - dual_value) / (1 + abs(primal_value) + abs(dual_value))
        p_res = np.linalg.norm(rp) / (1 + norm_b)
        d_res = np.linalg.norm(Rd) / (1 + norm_C)
        logger.debug(f"sdp iteration {iteration}: primal {primal_value:.10g}, dual {dual_value:.10g}, "
                     f"gap {gap:.2e}, residuals {p_res:.2e} {d_res:.2e}")
        if p_res <= tol:
            best_primal = min(best_primal, primal_value)
        if gap <= tol and p_res <= tol and d_res <= tol:
            return SDPResult(X, y, S, primal_value, dual_value, gap, p_res, d_res, iteration)

        mu = np.sum(X * S) / n
        W = _nt_scaling(X, S)
        WAW = W @ A @ W
        schur = A_flat @ WAW.reshape(m, n * n).T
        schur = (schur + schur.T) / 2
        try:
            factor = np.linalg.cholesky(schur)
            solve = lambda rhs: np.linalg.solve(factor.T, np.linalg.solve(factor, rhs))
        except np.linalg.LinAlgError:
            solve = lambda rhs: np.linalg.lstsq(schur, rhs, rcond=None)[0]
        S_inv = np.linalg.inv(S)
        WRW = W @ Rd @ W

        def direction(sigma):
            target = sigma * mu * S_inv - X
            rhs = rp - A_flat @ (target - WRW).reshape(-1)
            dy = solve(rhs)
            dS = Rd - np.tensordot(dy, A, axes=1)
            dX = target - W @ dS @ W
            dX = (dX + dX.T) / 2
            return dX, dy, dS

        def steps(dX, dS):
            return min(1.0, 0.95 * _max_step(X, dX)), min(1.0, 0.95 * _max_step(S, dS))

        dX, dy, dS = direction(0.0)
        alpha_p, alpha_d = steps(dX, dS)
        mu_aff = np.sum((X + alpha_p * dX) * (S + alpha_d * dS)) / n
        sigma = min(1.0, (mu_aff / mu) ** 3)
        dX, dy, dS = direction(sigma)
        alpha_p, alpha_d = steps(dX, dS)
        X = X + alpha_p * dX
        X = (X + X.T) / 2
        y = y + alpha_d * dy
        S = S + alpha_d * dS
        S = (S + S.T) / 2
    raise SDPIterationLimitError(best_primal, gap)


@dataclass
class MomentSolution:
    """
    optimum is the safe bound of the moment program in its own sense (a lower bound for 'min', an upper bound for
    'max'); primal_optimum is the objective at the returned moments.
    """
    optimum: float
    primal_optimum: float
    moments: np.ndarray
    moment_matrix: np.ndarray
    gap: float
    iterations: int


def solve_lmi(F0: np.ndarray, F: np.ndarray, c: np.ndarray, c0: float = 0.0, **kwargs) -> MomentSolution:
    """
    Solves min c.y + c0 s.t. F0 + sum_k y_k F_k >= 0 through the standard pair with C = F0, A_k = -F_k, b = -c.
    The returned optimum c0 - <F0, X> is a lower bound by weak duality.
    """
    try:
        result = solve_standard_sdp(F0, -F, -c, **kwargs)
    except SDPIterationLimitError as err:
        raise SDPIterationLimitError(c0 - err.best_bound, err.gap)
    lower = c0 - float(np.sum(F0 * result.X))
    value = c0 + float(c @ result.y)
    gamma = F0 + np.tensordot(result.y, F, axes=1)
    return MomentSolution(lower, value, result.y, gamma, result.gap, result.iterations)


def sdp_solve(m: MomentProgram, **kwargs) -> MomentSolution:
    """
    Optimizes the moment program. For 'max' programs the internal minimization is negated back.
    :param m: (MomentProgram)
    :return: (MomentSolution)
    """
    try:
        solution = solve_lmi(m.F0, m.F, m.c, m.c0, **kwargs)
    except SDPIterationLimitError as err:
        if m.sense == 'max':
            raise SDPIterationLimitError(-err.best_bound, err.gap)
        raise
    if m.sense == 'max':
        solution.optimum, solution.primal_optimum = -solution.optimum, -solution.primal_optimum
    logger.debug(f"sdp_solve: bound {solution.optimum:.10g} after {solution.iterations} iterations")
    return solution
