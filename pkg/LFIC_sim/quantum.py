"""
This module contains the quantum realizations (a shared state and the measurements of Alice and Bob), the behaviors
they produce, the shipped presets Q1 and Q2, white-noise robustness and the post-measurement update rules.
"""

__all__ = ['QuantumRealization', 'ket', 'projector', 'maximally_entangled_state', 'bob_effects', 'realization_from_kets',
           'behavior_from_realization', 'with_white_noise', 'bell_operator', 'noise_threshold', 'preset',
           'available_presets', 'partial_trace', 'entangling_unitary', 'query_projector', 'lueders_post_state',
           'von_neumann_post_state']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import functools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from LFIC_sim.config import definations
from LFIC_sim.custom_exceptions import (InvalidRealizationError, NoViolationError, UnknownPresetError,
                                        ZeroProbabilityOutcomeError)
from LFIC_sim.presets import table_point
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario, evaluate
from LFIC_sim.utils.constants import NumericalTolerances


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def ket(label: Union[str, int], dim: int) -> np.ndarray:
    """
    Basis kets '0', '1', ... and the superpositions '+' = (|0> + |1>)/sqrt(2), '-' = (|0> - |1>)/sqrt(2).
    """
    label = str(label)
    vec = np.zeros(dim, dtype=complex)
    if label in ('+', '-'):
        vec[0] = 1 / np.sqrt(2)
        vec[1] = 1 / np.sqrt(2) if label == '+' else -1 / np.sqrt(2)
        return vec
    index = int(label)
    if not 0 <= index < dim:
        raise ValueError(f"Ket |{label}> does not fit dimension {dim}.")
    vec[index] = 1
    return vec


def projector(vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector, dtype=complex)
    return np.outer(vector, vector.conj())


def maximally_entangled_state(dim_a: int, dim_b: int = 2) -> np.ndarray:
    """(|00> + |11>)/sqrt(2) on dim_a x dim_b, as a density matrix."""
    psi = (np.kron(ket(0, dim_a), ket(0, dim_b)) + np.kron(ket(1, dim_a), ket(1, dim_b))) / np.sqrt(2)
    return projector(psi)


def bob_effects(sigma_x: float, sigma_z: float) -> list:
    """
    Two-outcome measurement of the observable (sigma_x X + sigma_z Z)/sqrt(2). Outcome 0 is the +1 eigenvalue.
    """
    observable = (sigma_x * SIGMA_X + sigma_z * SIGMA_Z) / np.sqrt(2)
    identity = np.eye(2, dtype=complex)
    return [(identity + observable) / 2, (identity - observable) / 2]


def _check_psd(matrix: np.ndarray, name: str) -> None:
    if not np.allclose(matrix, matrix.conj().T, atol=NumericalTolerances.EPS_PSD):
        raise InvalidRealizationError(name, "not Hermitian")
    if np.linalg.eigvalsh(matrix).min() < -NumericalTolerances.EPS_PSD:
        raise InvalidRealizationError(name, "not positive semidefinite")


@dataclass(frozen=True, eq=False)
class QuantumRealization:
    """
    State on dim_a x dim_b (Alice's factor first) and the effects alice[x][a], bob[y][b].
    """
    scenario: Scenario
    state: np.ndarray
    alice: tuple
    bob: tuple
    name: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.scenario, Scenario):
            raise TypeError("scenario needs to be a Scenario object.")
        alice = tuple(tuple(np.asarray(e, dtype=complex) for e in effects) for effects in self.alice)
        bob = tuple(tuple(np.asarray(e, dtype=complex) for e in effects) for effects in self.bob)
        state = np.asarray(self.state, dtype=complex)
        for obj, value in (('alice', alice), ('bob', bob), ('state', state)):
            object.__setattr__(self, obj, value)
        s = self.scenario
        if len(alice) != s.alice_inputs or any(len(e) != s.alice_outputs for e in alice):
            raise InvalidRealizationError('alice', f"expected {s.alice_inputs} measurements of {s.alice_outputs} effects")
        if len(bob) != s.bob_inputs or any(len(e) != s.bob_outputs for e in bob):
            raise InvalidRealizationError('bob', f"expected {s.bob_inputs} measurements of {s.bob_outputs} effects")
        dim = self.dim_a * self.dim_b
        if state.shape != (dim, dim):
            raise InvalidRealizationError('state', f"expected shape {(dim, dim)}, got {state.shape}")
        _check_psd(state, 'state')
        if abs(np.trace(state) - 1) > NumericalTolerances.EPS_PSD:
            raise InvalidRealizationError('state', "trace differs from 1")
        for party, measurements, d in (('A', alice, self.dim_a), ('B', bob, self.dim_b)):
            for k, effects in enumerate(measurements):
                for o, effect in enumerate(effects):
                    if effect.shape != (d, d):
                        raise InvalidRealizationError(f"{party}[{k}][{o}]", f"expected shape {(d, d)}")
                    _check_psd(effect, f"{party}[{k}][{o}]")
                if not np.allclose(sum(effects), np.eye(d), atol=NumericalTolerances.EPS_PSD):
                    raise InvalidRealizationError(f"{party}[{k}]", "effects do not sum to the identity")

    @property
    def dim_a(self) -> int:
        return self.alice[0][0].shape[0]

    @property
    def dim_b(self) -> int:
        return self.bob[0][0].shape[0]

    def alice_array(self) -> np.ndarray:
        return np.array([[e for e in effects] for effects in self.alice])

    def bob_array(self) -> np.ndarray:
        return np.array([[e for e in effects] for effects in self.bob])

    def with_state(self, state: np.ndarray) -> "QuantumRealization":
        return QuantumRealization(self.scenario, state, self.alice, self.bob, self.name)

    def __repr__(self):
        return f"QuantumRealization({self.name or 'unnamed'}, {self.dim_a}x{self.dim_b}, {self.scenario})"


def realization_from_kets(scenario: Scenario, kets: dict, observables: dict, state: np.ndarray = None,
                          name: Optional[str] = None) -> QuantumRealization:
    """
    :param kets: maps (x, a) to a ket label; Alice's effect is its projector
    :param observables: maps y to the (sigma_x, sigma_z) coefficients of Bob's observable
    :param state: density matrix, the maximally entangled state of rank two by default
    """
    dim_a = scenario.alice_outputs
    alice = tuple(tuple(projector(ket(kets[(x, a)], dim_a)) for a in range(scenario.alice_outputs))
                  for x in range(scenario.alice_inputs))
    bob = tuple(tuple(bob_effects(*observables[y])) for y in range(scenario.bob_inputs))
    state = maximally_entangled_state(dim_a) if state is None else state
    return QuantumRealization(scenario, state, alice, bob, name)


def behavior_from_realization(r: QuantumRealization) -> Behavior:
    """
    p(a,b|x,y) = tr(state (A_xa x B_yb)), float-backed.
    """
    rho = r.state.reshape(r.dim_a, r.dim_b, r.dim_a, r.dim_b)
    table = np.einsum('ijkl,xaki,yblj->xyab', rho, r.alice_array(), r.bob_array()).real
    return Behavior(r.scenario, table, exact=False, name=r.name)


def with_white_noise(r: QuantumRealization, p: float) -> QuantumRealization:
    """State p rho + (1 - p) 1/d."""
    dim = r.dim_a * r.dim_b
    return r.with_state(p * r.state + (1 - p) * np.eye(dim) / dim)


def bell_operator(f: BellFunctional, r: QuantumRealization) -> np.ndarray:
    """
    Operator W with tr(state W) = evaluate(f, behavior_from_realization(r)).
    """
    dim = r.dim_a * r.dim_b
    operator = float(f.offset) * np.eye(dim, dtype=complex)
    for coefficient, a, b, x, y in f.terms():
        operator += float(coefficient) * np.kron(r.alice[x][a], r.bob[y][b])
    return operator


def noise_threshold(r: QuantumRealization, f: BellFunctional) -> float:
    """
    Smallest visibility p at which the functional still reaches 0 on the white-noise family. The value is affine in
    p, so the root follows from the two endpoints.
    :raises NoViolationError: if f is not negative on the noiseless behavior
    """
    value_one = evaluate(f, behavior_from_realization(r))
    if value_one >= 0:
        raise NoViolationError()
    value_zero = evaluate(f, behavior_from_realization(with_white_noise(r, 0.0)))
    return value_zero / (value_zero - value_one)


@functools.lru_cache(maxsize=None)
def _ket_frame() -> pd.DataFrame:
    return pd.read_csv(definations.PRESET_ALICE_KETS_DIR, dtype=str)


@functools.lru_cache(maxsize=None)
def _observable_frame() -> pd.DataFrame:
    return pd.read_csv(definations.PRESET_BOB_OBSERVABLES_DIR, dtype={'preset': str})


def available_presets() -> list:
    return list(dict.fromkeys(_ket_frame()['preset'])) + ['N0-table']


def preset(name: str) -> Union[QuantumRealization, Behavior]:
    """
    Q1, Q2 (main scenario) and Q1-K4 (four-outcome scenario) return realizations on the maximally entangled state;
    N0-table returns the rational reference behavior N0.
    """
    if name == 'N0-table':
        return table_point('N0')
    kets_df = _ket_frame()
    rows = kets_df[kets_df['preset'] == name]
    if rows.empty:
        raise UnknownPresetError(name, available_presets())
    kets = {(int(x), int(a)): label for x, a, label in zip(rows['x'], rows['a'], rows['ket'])}
    inputs = 1 + max(x for x, _ in kets)
    outputs = 1 + max(a for _, a in kets)
    obs_df = _observable_frame()
    obs_rows = obs_df[obs_df['preset'] == name]
    observables = {int(y): (float(sx), float(sz)) for y, sx, sz in
                   zip(obs_rows['y'], obs_rows['sigma_x'], obs_rows['sigma_z'])}
    scenario = Scenario(inputs, outputs, len(observables), 2, outputs)
    return realization_from_kets(scenario, kets, observables, name=name)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """
    Reduced density matrix on the subsystems listed in keep (in increasing order).
    """
    dims = list(dims)
    keep = sorted(keep)
    n = len(dims)
    tensor = rho.reshape(dims + dims)
    traced = [k for k in range(n) if k not in keep]
    for offset, k in enumerate(traced):
        axis = k - offset
        tensor = np.trace(tensor, axis1=axis, axis2=axis + tensor.ndim // 2)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return tensor.reshape(d, d)


def entangling_unitary(dim_m: int, dim_a: int, dim_b: int) -> np.ndarray:
    """
    Unitary on M x A x B copying Alice's computational basis into the device register M:
    |m>|c>|b> -> |m + c mod dim_m>|c>|b>. With M starting in |0> it records Charlie's outcome.
    """
    shift = np.zeros((dim_m, dim_m, dim_a), dtype=complex)
    for c in range(dim_a):
        for m in range(dim_m):
            shift[(m + c) % dim_m, m, c] = 1
    unitary = np.zeros((dim_m * dim_a, dim_m * dim_a), dtype=complex)
    for c in range(dim_a):
        unitary += np.kron(shift[:, :, c], projector(ket(c, dim_a)))
    return np.kron(unitary, np.eye(dim_b))


def query_projector(x: int, dim_m: int, dim_a: int, dim_b: int) -> np.ndarray:
    """Projector |x><x|_M x 1 of the 'yes' answer to the query 'is c = x?'."""
    return np.kron(projector(ket(x, dim_m)), np.eye(dim_a * dim_b))


def _combined(projectors: Sequence[np.ndarray], observed: Union[int, Iterable[int]]) -> np.ndarray:
    indices = [observed] if isinstance(observed, (int, np.integer)) else list(observed)
    dim = projectors[0].shape[0]
    if not np.allclose(sum(projectors), np.eye(dim), atol=NumericalTolerances.EPS_PSD):
        raise InvalidRealizationError('projectors', "do not sum to the identity")
    return sum(projectors[i] for i in indices)


def lueders_post_state(state: np.ndarray, projectors: Sequence[np.ndarray],
                       observed: Union[int, Iterable[int]]) -> np.ndarray:
    """
    Lueders update P rho P / tr(P rho P) for the projector P of the observed (possibly coarse-grained) outcome.
    :raises ZeroProbabilityOutcomeError: if tr(P rho P) vanishes
    """
    p = _combined(projectors, observed)
    post = p @ state @ p
    weight = np.trace(post).real
    if weight <= NumericalTolerances.EPS_PSD:
        raise ZeroProbabilityOutcomeError()
    return post / weight


def von_neumann_post_state(state: np.ndarray, projectors: Sequence[np.ndarray],
                           observed: Union[int, Iterable[int]]) -> np.ndarray:
    """
    Full dephasing in the fine-grained projectors before conditioning on the observed outcome: coherence inside a
    degenerate outcome is destroyed.
    """
    dephased = sum(p @ state @ p for p in projectors)
    return lueders_post_state(dephased, projectors, observed)
