"""
Run-level Monte-Carlo simulation of the friend protocols.

Charlie's measurement is modeled as the unitary that copies Alice's computational basis into the device register M.
Alice's query 'is c = x?' is a two-outcome measurement on M: on 'yes' she outputs a = x, on 'no' the entangling step
is undone and she measures her particle with the realization's effects for x. Under the 'lueders' policy the register
stays coherent; under 'von-neumann' it is fully dephased before the query.

Each setting has an exact branch tree whose leaves give the outcome distribution; runs are drawn from it with a
counter-based generator keyed by (seed, chunk index), so results do not depend on the number of threads.
"""

__all__ = ['POLICIES', 'PROTOCOLS', 'DEVICES', 'RunConfig', 'RunCounts', 'BehaviorEstimate', 'ReductionReport',
           'expected_behavior', 'outcome_table', 'simulate_runs', 'sample_behavior', 'estimate_behavior',
           'functional_estimate', 'simulate_protocol2', 'reduction_report']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from LFIC_sim.config import definations
from LFIC_sim.custom_exceptions import (InvalidRealizationError, ScenarioMismatchError, SchemaError,
                                        ZeroProbabilityOutcomeError)
from LFIC_sim.quantum import (QuantumRealization, entangling_unitary, ket, lueders_post_state, projector,
                              query_projector, von_neumann_post_state)
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario
from LFIC_sim.serialization import FORMAT_VERSION, scenario_from_dict
from LFIC_sim.utils.constants import NumericalTolerances
from LFIC_sim.utils.timer import sol_timer


logger = logging.getLogger(__name__)

POLICIES = ('lueders', 'von-neumann')
PROTOCOLS = ('main', 'protocol2')
DEVICES = ('honest', 'faulty')


def _distribution(values: Optional[Sequence[float]], size: int, name: str) -> np.ndarray:
    if values is None:
        return np.full(size, 1.0 / size)
    dist = np.asarray(values, dtype=float)
    if dist.shape != (size,):
        raise ValueError(f"{name} needs {size} probabilities, got {dist.size}.")
    if np.any(dist < 0) or abs(dist.sum() - 1.0) > NumericalTolerances.EPS_NS:
        raise ValueError(f"{name} is not a probability distribution.")
    return dist


@dataclass
class RunConfig:
    """
    Simulation parameters. Input distributions default to uniform; t_distribution is used by protocol2 only, where
    decoy_query=False skips the query about t.
    """
    realization: QuantumRealization
    runs: int
    seed: int = definations.DEFAULT_SEED
    policy: str = 'lueders'
    protocol: str = 'main'
    x_distribution: Optional[Sequence[float]] = None
    y_distribution: Optional[Sequence[float]] = None
    t_distribution: Optional[Sequence[float]] = None
    device: str = 'honest'
    decoy_query: bool = True
    chunk_size: int = definations.DEFAULT_CHUNK_SIZE
    threads: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.realization, QuantumRealization):
            raise TypeError("realization needs to be a QuantumRealization object.")
        if not isinstance(self.runs, (int, np.integer)) or self.runs < 0:
            raise ValueError("runs needs to be a nonnegative integer.")
        if self.policy not in POLICIES:
            raise ValueError(f"policy needs to be one of {', '.join(POLICIES)}.")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol needs to be one of {', '.join(PROTOCOLS)}.")
        if self.device not in DEVICES:
            raise ValueError(f"device needs to be one of {', '.join(DEVICES)}.")
        if self.chunk_size < 1:
            raise ValueError("chunk_size needs to be positive.")
        s = self.realization.scenario
        self.x_distribution = _distribution(self.x_distribution, s.alice_inputs, 'x_distribution')
        self.y_distribution = _distribution(self.y_distribution, s.bob_inputs, 'y_distribution')
        self.t_distribution = _distribution(self.t_distribution, s.charlie_outputs, 't_distribution')

    def echo(self) -> dict:
        """Parameters written next to the counts."""
        return {'realization': self.realization.name, 'runs': int(self.runs), 'seed': int(self.seed),
                'policy': self.policy, 'protocol': self.protocol, 'device': self.device,
                'decoy_query': self.decoy_query, 'chunk_size': int(self.chunk_size),
                'x_distribution': [float(v) for v in self.x_distribution],
                'y_distribution': [float(v) for v in self.y_distribution],
                't_distribution': [float(v) for v in self.t_distribution]}


@dataclass
class RunCounts:
    """
    counts[x, y, a, b] for the main protocol, counts[t, answer, x, y, a, b] for protocol2 where answer 0 means
    Charlie confirmed c = t. resampled counts the runs redrawn after landing on a branch of numerically vanishing
    weight.
    """
    scenario: Scenario
    counts: np.ndarray
    protocol: str = 'main'
    config: dict = field(default_factory=dict)
    resampled: int = 0

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        expected = self.scenario.shape
        if self.protocol == 'protocol2':
            expected = (self.scenario.charlie_outputs, 2) + expected
        if self.counts.shape != expected:
            raise ValueError(f"counts of shape {self.counts.shape} do not fit {expected}.")
        if np.any(self.counts < 0):
            raise ValueError("counts need to be nonnegative.")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def main_counts(self) -> np.ndarray:
        """Counts indexed [x, y, a, b], summed over t and the answer for protocol2."""
        if self.protocol == 'protocol2':
            return self.counts.sum(axis=(0, 1))
        return self.counts

    @property
    def runs_per_setting(self) -> np.ndarray:
        return self.main_counts().sum(axis=(2, 3))

    def to_document(self) -> dict:
        entries = []
        for index in zip(*np.nonzero(self.counts)):
            keys = ('t', 'answer', 'x', 'y', 'a', 'b') if self.protocol == 'protocol2' else ('x', 'y', 'a', 'b')
            entry = {k: int(v) for k, v in zip(keys, index)}
            entry['n'] = int(self.counts[index])
            entries.append(entry)
        return {'version': FORMAT_VERSION, 'type': 'counts', 'protocol': self.protocol,
                'scenario': self.scenario.to_dict(), 'config': self.config, 'resampled': int(self.resampled),
                'entries': entries}

    @classmethod
    def from_document(cls, data: dict) -> "RunCounts":
        if not isinstance(data, dict) or data.get('type') != 'counts':
            raise SchemaError("document is not a counts document.")
        if data.get('version') != FORMAT_VERSION:
            raise SchemaError(f"unsupported version {data.get('version')!r}, expected {FORMAT_VERSION!r}.")
        scenario = scenario_from_dict(data.get('scenario'))
        protocol = data.get('protocol', 'main')
        if protocol not in PROTOCOLS:
            raise SchemaError(f"unknown protocol {protocol!r}.")
        keys = ('t', 'answer', 'x', 'y', 'a', 'b') if protocol == 'protocol2' else ('x', 'y', 'a', 'b')
        shape = ((scenario.charlie_outputs, 2) if protocol == 'protocol2' else ()) + scenario.shape
        counts = np.zeros(shape, dtype=np.int64)
        for position, entry in enumerate(data.get('entries', [])):
            try:
                index = tuple(entry[k] for k in keys)
                counts[index] += entry['n']
            except (KeyError, IndexError, TypeError):
                raise SchemaError(f"counts entry {position} is malformed.")
        return cls(scenario, counts, protocol, data.get('config', {}), data.get('resampled', 0))


def _require_protocol_realization(r: QuantumRealization) -> None:
    s = r.scenario
    if r.dim_a != s.charlie_outputs:
        raise InvalidRealizationError('alice', f"needs dimension {s.charlie_outputs} to be copied into the device")
    for x in range(s.alice_inputs):
        if x >= s.alice_outputs or not np.allclose(r.alice[x][x], projector(ket(x, r.dim_a)),
                                                   atol=NumericalTolerances.EPS_PSD):
            raise InvalidRealizationError(f"A[{x}][{x}]", "needs to be the projector on Charlie's basis state")


class _Protocol:
    """Operators on M x A x B shared by all branch trees of one realization."""
    def __init__(self, r: QuantumRealization, policy: str, device: str):
        _require_protocol_realization(r)
        s = r.scenario
        self.r, self.policy, self.device = r, policy, device
        self.dims = (s.charlie_outputs, r.dim_a, r.dim_b)
        dim_m = self.dims[0]
        U = entangling_unitary(*self.dims)
        self.undo = U.conj().T
        start = np.kron(projector(ket(0, dim_m)), r.state)
        self.state = U @ start @ self.undo
        self.register = [query_projector(m, *self.dims) for m in range(dim_m)]
        eye_m = np.eye(dim_m)
        self.alice = [[np.kron(eye_m, np.kron(e, np.eye(r.dim_b))) for e in effects] for effects in r.alice]
        self.bob = [[np.kron(eye_m, np.kron(np.eye(r.dim_a), e)) for e in effects] for effects in r.bob]

    def condition(self, state: np.ndarray, outcomes: Sequence[int]) -> tuple:
        """Weight and post state of the register outcome set; (weight, None) when the weight underflows."""
        weight = sum(np.trace(self.register[m] @ state).real for m in outcomes)
        update = von_neumann_post_state if self.policy == 'von-neumann' else lueders_post_state
        try:
            return weight, update(state, self.register, list(outcomes))
        except ZeroProbabilityOutcomeError:
            return weight, None

    def branch_table(self, state: np.ndarray, x: int, y: int) -> tuple:
        """
        Joint distribution of (a, b) after the query about x, starting from the given global state, and the weight
        lost to branches of vanishing probability.
        """
        s = self.r.scenario
        table = np.zeros((s.alice_outputs, s.bob_outputs))
        dropped = 0.0
        others = [m for m in range(self.dims[0]) if m != x]
        yes_weight, yes_state = self.condition(state, [x])
        if self.device == 'faulty' and yes_state is not None:
            # the device hands out c = x whenever that outcome is possible
            yes_weight = 1.0
            others = []
        if yes_state is None:
            dropped += max(yes_weight, 0.0)
        else:
            for b in range(s.bob_outputs):
                table[x, b] = yes_weight * np.trace(yes_state @ self.bob[y][b]).real
        if others:
            no_weight, no_state = self.condition(state, others)
            if no_state is None:
                dropped += max(no_weight, 0.0)
            else:
                undone = self.undo @ no_state @ self.undo.conj().T
                for a in range(s.alice_outputs):
                    for b in range(s.bob_outputs):
                        table[a, b] += no_weight * np.trace(undone @ self.alice[x][a] @ self.bob[y][b]).real
        return np.clip(table, 0.0, None), dropped


def outcome_table(cfg: RunConfig) -> tuple:
    """
    Exact outcome probabilities per setting and the weight lost to vanishing branches.
    :return: main: (P[x, y, a, b], dropped[x, y]); protocol2: (P[t, x, y, answer, a, b], dropped[t, x, y])
    """
    s = cfg.realization.scenario
    protocol = _Protocol(cfg.realization, cfg.policy, cfg.device)
    if cfg.protocol == 'main' or not cfg.decoy_query:
        P = np.zeros(s.shape)
        dropped = np.zeros((s.alice_inputs, s.bob_inputs))
        for x in range(s.alice_inputs):
            for y in range(s.bob_inputs):
                P[x, y], dropped[x, y] = protocol.branch_table(protocol.state, x, y)
        return P, dropped
    T = s.charlie_outputs
    P = np.zeros((T, s.alice_inputs, s.bob_inputs, 2, s.alice_outputs, s.bob_outputs))
    dropped = np.zeros((T, s.alice_inputs, s.bob_inputs))
    for t in range(T):
        # the query about t is always answered from the register as it stands
        branches = [protocol.condition(protocol.state, [t]),
                    protocol.condition(protocol.state, [m for m in range(T) if m != t])]
        for answer, (weight, post) in enumerate(branches):
            if post is None:
                dropped[t] += max(weight, 0.0)
                continue
            for x in range(s.alice_inputs):
                for y in range(s.bob_inputs):
                    table, lost = protocol.branch_table(post, x, y)
                    P[t, x, y, answer] = weight * table
                    dropped[t, x, y] += weight * lost
    return P, dropped


def expected_behavior(r: QuantumRealization, policy: str = 'lueders', device: str = 'honest') -> Behavior:
    """
    Exact behavior of the main protocol. Under 'lueders' it equals behavior_from_realization(r).
    """
    P, _ = outcome_table(RunConfig(r, 0, policy=policy, device=device))
    P = P / P.sum(axis=(2, 3), keepdims=True)
    return Behavior(r.scenario, P, exact=False, name=f"{r.name} ({policy})")


def _chunk_counts(chunk: int, size: int, seed: int, setting_cdfs: list, outcome_cdf: np.ndarray,
                  valid_cdf: np.ndarray) -> tuple:
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, chunk], dtype=np.uint64)))
    axes = [np.minimum(np.searchsorted(cdf, rng.random(size), side='right'), len(cdf) - 1) for cdf in setting_cdfs]
    settings = np.ravel_multi_index(axes, [len(cdf) for cdf in setting_cdfs]) if axes else np.zeros(size, int)
    n_outcomes = valid_cdf.shape[1]
    u = rng.random(size)
    outcomes = np.sum(u[:, None] >= outcome_cdf[settings], axis=1)
    lost = outcomes == n_outcomes
    resampled = int(lost.sum())
    if resampled:
        redraw = rng.random(resampled)
        outcomes[lost] = np.sum(redraw[:, None] >= valid_cdf[settings[lost]], axis=1)
        logger.debug(f"chunk {chunk}: {resampled} runs resampled")
    outcomes = np.minimum(outcomes, n_outcomes - 1)
    flat = np.bincount(settings * n_outcomes + outcomes, minlength=outcome_cdf.shape[0] * n_outcomes)
    return flat, resampled


def _sample(probabilities: np.ndarray, dropped: np.ndarray, setting_distributions: list, runs: int, seed: int,
            chunk_size: int, threads: Optional[int]) -> tuple:
    """
    Draws runs: a setting from the independent input distributions, then an outcome of that setting. The last
    outcome bucket holds the dropped weight; runs landing there are redrawn from the renormalized valid outcomes.
    :return: (counts shaped like probabilities, resampled runs)
    """
    n_settings = int(np.prod(probabilities.shape[:len(setting_distributions)]))
    P = probabilities.reshape(n_settings, -1)
    with_lost = np.hstack([P, dropped.reshape(n_settings, 1)])
    totals = with_lost.sum(axis=1, keepdims=True)
    totals[totals == 0] = 1.0
    outcome_cdf = np.cumsum(with_lost / totals, axis=1)
    valid = P.sum(axis=1, keepdims=True)
    valid[valid == 0] = 1.0
    valid_cdf = np.cumsum(P / valid, axis=1)
    setting_cdfs = [np.cumsum(d) for d in setting_distributions]
    sizes = [min(chunk_size, runs - start) for start in range(0, runs, chunk_size)]
    threads = threads or definations.default_threads()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda job: _chunk_counts(job[0], job[1], seed, setting_cdfs, outcome_cdf, valid_cdf),
                                enumerate(sizes)))
    flat = sum((r[0] for r in results), np.zeros(n_settings * P.shape[1], dtype=np.int64))
    return flat.reshape(probabilities.shape), sum(r[1] for r in results)


@sol_timer
def simulate_runs(cfg: RunConfig) -> RunCounts:
    """
    Simulates cfg.runs runs of the main protocol. Deterministic in (cfg, seed) and independent of the thread count.
    :param cfg: (RunConfig) with protocol 'main'; protocol2 configurations are handed to simulate_protocol2
    :return: (RunCounts)
    """
    if cfg.protocol == 'protocol2':
        return simulate_protocol2(cfg)[0]
    s = cfg.realization.scenario
    P, dropped = outcome_table(cfg)
    counts, resampled = _sample(P, dropped, [cfg.x_distribution, cfg.y_distribution], cfg.runs, cfg.seed,
                                cfg.chunk_size, cfg.threads)
    if resampled:
        logger.warning(f"simulate_runs: {resampled} runs hit vanishing branches and were resampled")
    logger.info(f"simulate_runs: {cfg.runs} runs of {cfg.realization.name} under {cfg.policy}")
    return RunCounts(s, counts, 'main', cfg.echo(), resampled)


def sample_behavior(p: Behavior, runs: int, seed: int = definations.DEFAULT_SEED,
                    x_distribution: Optional[Sequence[float]] = None,
                    y_distribution: Optional[Sequence[float]] = None,
                    chunk_size: int = definations.DEFAULT_CHUNK_SIZE, threads: Optional[int] = None) -> RunCounts:
    """Multinomial runs drawn directly from a behavior table, with the same generator layout as simulate_runs."""
    s = p.scenario
    P = np.clip(p.table.astype(float), 0.0, None)
    xd = _distribution(x_distribution, s.alice_inputs, 'x_distribution')
    yd = _distribution(y_distribution, s.bob_inputs, 'y_distribution')
    counts, _ = _sample(P, np.zeros(s.shape[:2]), [xd, yd], runs, seed, chunk_size, threads)
    config = {'behavior': p.name, 'runs': int(runs), 'seed': int(seed), 'protocol': 'main'}
    return RunCounts(s, counts, 'main', config)


@dataclass
class BehaviorEstimate:
    """
    Empirical frequencies per setting with binomial standard errors sqrt(p (1 - p) / n). Settings without runs are
    flagged in missing and hold NaN.
    """
    table: np.ndarray
    standard_errors: np.ndarray
    runs: np.ndarray
    missing: np.ndarray
    scenario: Scenario

    @property
    def complete(self) -> bool:
        return not bool(self.missing.any())

    def behavior(self) -> Behavior:
        """Float behavior of the estimate; needs every setting to have runs."""
        if not self.complete:
            missing = [tuple(int(v) for v in idx) for idx in zip(*np.nonzero(self.missing))]
            raise ValueError(f"settings {missing} have no runs.")
        return Behavior(self.scenario, self.table, exact=False, name='estimate')


def estimate_behavior(c: RunCounts) -> BehaviorEstimate:
    counts = c.main_counts().astype(float)
    runs = counts.sum(axis=(2, 3))
    missing = runs == 0
    with np.errstate(invalid='ignore', divide='ignore'):
        table = counts / runs[:, :, None, None]
        errors = np.sqrt(table * (1 - table) / runs[:, :, None, None])
    table[missing] = np.nan
    errors[missing] = np.nan
    return BehaviorEstimate(table, errors, runs.astype(np.int64), missing, c.scenario)


def functional_estimate(f: BellFunctional, c: RunCounts) -> tuple:
    """
    Value and standard error of the functional on the empirical behavior. Settings are sampled independently, so
    the variance is the sum of the per-setting multinomial variances.
    :raises ValueError: if a setting the functional weighs has no runs
    """
    if f.scenario != c.scenario:
        raise ScenarioMismatchError(f.scenario, c.scenario)
    estimate = estimate_behavior(c)
    coefficients = f.coefficients.astype(float)
    weighted = np.any(coefficients != 0, axis=(2, 3))
    if np.any(weighted & estimate.missing):
        raise ValueError("The functional weighs settings without runs.")
    value, variance = float(f.offset), 0.0
    for x, y in zip(*np.nonzero(weighted)):
        p, w = estimate.table[x, y], coefficients[x, y]
        mean = float(np.sum(w * p))
        value += mean
        variance += (float(np.sum(w * w * p)) - mean ** 2) / estimate.runs[x, y]
    return value, math.sqrt(max(variance, 0.0))


@dataclass
class ReductionReport:
    """
    Comparison at fixed t of the protocol2 runs with c != t and x != t against a main-protocol run on the state left
    by the answer 'c != t'. The per-setting chi-square statistics of the 2 x outcomes contingency tables are summed.
    """
    t: int
    statistic: float
    dof: int
    p_value: float
    level: float
    restricted: np.ndarray
    reference: np.ndarray

    @property
    def consistent(self) -> bool:
        return self.p_value >= self.level

    @property
    def flagged(self) -> bool:
        return not self.consistent

    def __str__(self):
        verdict = "consistent" if self.consistent else "flagged"
        return f"t={self.t}: chi2 {self.statistic:.3f} on {self.dof} dof, p {self.p_value:.4f} ({verdict})"


def _post_decoy_realization(r: QuantumRealization, t: int) -> Optional[QuantumRealization]:
    """Realization on the state conditioned on c != t, None if that answer is impossible."""
    keep = np.kron(np.eye(r.dim_a) - projector(ket(t, r.dim_a)), np.eye(r.dim_b))
    try:
        state = lueders_post_state(r.state, [keep, np.eye(len(keep)) - keep], 0)
    except ZeroProbabilityOutcomeError:
        return None
    return QuantumRealization(r.scenario, state, r.alice, r.bob, f"{r.name} given c!={t}")


def reduction_report(counts: RunCounts, cfg: RunConfig, t: int, level: float = 0.05) -> ReductionReport:
    """
    Chi-square homogeneity test of the restricted protocol2 statistics against an honest main-protocol run of the
    same size on the post-decoy state, with x restricted to x != t.
    """
    s = counts.scenario
    restricted = counts.counts[t, 1].copy()
    restricted[t] = 0
    xd = np.array([0.0 if x == t else 1.0 for x in range(s.alice_inputs)])
    xd /= xd.sum()
    reference_realization = _post_decoy_realization(cfg.realization, t)
    if reference_realization is None or restricted.sum() == 0:
        return ReductionReport(t, 0.0, 0, 1.0, level, restricted, np.zeros_like(restricted))
    reference_cfg = RunConfig(reference_realization, int(restricted.sum()), seed=cfg.seed + 1 + t,
                              policy=cfg.policy, x_distribution=xd, y_distribution=cfg.y_distribution,
                              chunk_size=cfg.chunk_size, threads=cfg.threads)
    reference = simulate_runs(reference_cfg).counts
    statistic, dof = 0.0, 0
    for x in range(s.alice_inputs):
        if x == t:
            continue
        for y in range(s.bob_inputs):
            table = np.vstack([restricted[x, y].reshape(-1), reference[x, y].reshape(-1)])
            table = table[:, table.sum(axis=0) > 0]
            if table.shape[1] < 2 or np.any(table.sum(axis=1) == 0):
                continue
            result = stats.chi2_contingency(table, correction=False)
            statistic += float(result[0])
            dof += int(result[2])
    p_value = float(stats.chi2.sf(statistic, dof)) if dof else 1.0
    report = ReductionReport(t, statistic, dof, p_value, level, restricted, reference)
    logger.info(f"reduction report {report}")
    return report


@sol_timer
def simulate_protocol2(cfg: RunConfig, level: float = 0.05, report_t: Optional[Sequence[int]] = None) -> tuple:
    """
    Simulates Protocol II: a query about a random t precedes the query about x.
    :param cfg: (RunConfig) on a realization whose Charlie register has as many outcomes as Alice's inputs
    :param level: (float) significance level of the reduction reports
    :param report_t: values of t to report on, all by default
    :return: (RunCounts, dict t -> ReductionReport); with decoy_query=False the main-protocol counts and no reports
    """
    s = cfg.realization.scenario
    if s.alice_inputs != s.charlie_outputs:
        raise ValueError("Protocol II needs as many Alice inputs as Charlie outcomes.")
    if not cfg.decoy_query:
        main_cfg = RunConfig(cfg.realization, cfg.runs, cfg.seed, cfg.policy, 'main', cfg.x_distribution,
                             cfg.y_distribution, device=cfg.device, chunk_size=cfg.chunk_size, threads=cfg.threads)
        return simulate_runs(main_cfg), {}
    P, dropped = outcome_table(cfg)
    counts, resampled = _sample(P, dropped, [cfg.t_distribution, cfg.x_distribution, cfg.y_distribution], cfg.runs,
                                cfg.seed, cfg.chunk_size, cfg.threads)
    # P is indexed [t, x, y, answer, a, b]; RunCounts keeps [t, answer, x, y, a, b]
    result = RunCounts(s, np.transpose(counts, (0, 3, 1, 2, 4, 5)), 'protocol2', cfg.echo(), resampled)
    targets = range(s.charlie_outputs) if report_t is None else report_t
    reports = {t: reduction_report(result, cfg, t, level) for t in targets}
    return result, reports
