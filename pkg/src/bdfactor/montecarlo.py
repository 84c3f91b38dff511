"""Monte Carlo simulation of birth-death paths and stopping-time estimators.

Trials advance in lockstep as numpy arrays.  Randomness comes from a
counter-based hash keyed by ``(seed, trial, event, slot)``, so any single
trial can be replayed by ``sample_path`` and trials never share a stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import RuntimeCap, TooFewAccepted
from .process import BirthDeathProcess, _log_a_terms, log_potential, log_q_at_zero_table, series_A
from .series import log_tails

EVENT_CAP = 10_000_000
MIN_TRIALS = 100
EXTINCTION_CEILING = 60

_PHI = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def trial_keys(seed: int, trials) -> np.ndarray:
    """Per-trial stream keys."""
    with np.errstate(over="ignore"):
        base = _mix(np.array([np.uint64(seed % 2**64)]) + _PHI)
        t = np.asarray(trials, dtype=np.uint64)
        return _mix(base ^ ((t + np.uint64(1)) * _PHI))


def uniforms(keys: np.ndarray, event, slot: int) -> np.ndarray:
    """Uniforms in ``(0, 1)`` for the given stream keys and event counters."""
    with np.errstate(over="ignore"):
        ctr = np.asarray(event, dtype=np.uint64) * np.uint64(2) + np.uint64(slot + 1)
        z = _mix(keys + ctr * _PHI)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


class Quantity(str, Enum):
    HITTING_MEAN = "hitting_mean"
    CONDITIONAL_HITTING = "conditional_hitting"
    ABSORPTION_PROB = "absorption_prob"
    OCCUPATION_TIME = "occupation_time"
    EXTINCTION_PROB = "extinction_prob"
    TRANSITION_PROB = "transition_prob"


@dataclass(frozen=True)
class SimulationEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int
    quantity: Quantity
    target: float = math.nan
    accepted: int | None = None

    @property
    def z(self) -> float:
        """Standardized distance to the target."""
        if self.stderr == 0.0:
            return 0.0 if self.mean == self.target else math.inf
        return (self.mean - self.target) / self.stderr

    def within(self, k: float = 3.0) -> bool:
        return abs(self.z) <= k

    def to_dict(self) -> dict:
        return {"quantity": self.quantity.value, "mean": self.mean, "stderr": self.stderr,
                "trials": self.trials, "seed": self.seed, "target": self.target,
                "accepted": self.accepted}


@dataclass(frozen=True)
class PathEvent:
    time: float
    state: int


@dataclass(frozen=True)
class HitState:
    j: int


@dataclass(frozen=True)
class TimeHorizon:
    T: float


@dataclass(frozen=True)
class Absorbed:
    pass


def _rates(p: BirthDeathProcess, n: np.ndarray, top: int | None):
    lam = p.lam(n)
    if top is not None:
        lam = np.where(n >= top, 0.0, lam)
    mu = np.where(n >= 1, p.mu(np.maximum(n, 1)), p.mu0)
    return lam, mu


@dataclass
class _Outcome:
    state: np.ndarray
    time: np.ndarray
    occupation: np.ndarray


def simulate(p: BirthDeathProcess, start: int, trials: int, seed: int, *, low: int = -1,
             high: int | None = None, horizon: float = math.inf, top: int | None = None,
             occupy: int | None = None, cap: int = EVENT_CAP) -> _Outcome:
    """Run ``trials`` paths from ``start`` until they reach ``low`` or ``high``,
    are absorbed at -1, or pass ``horizon``.

    ``top`` truncates the chain (no births from ``top``); ``occupy`` names a
    state whose total sojourn time is accumulated.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    state = np.full(trials, start, dtype=np.int64)
    time = np.zeros(trials)
    occ = np.zeros(trials)
    keys = trial_keys(seed, np.arange(trials))
    act = np.arange(trials)
    if start == -1 or start == low or start == high:
        act = act[:0]
    event = 0
    while len(act):
        if event >= cap:
            raise RuntimeCap(int(act[0]), cap)
        n = state[act]
        lam, mu = _rates(p, n, top)
        tot = lam + mu
        dt = -np.log(uniforms(keys[act], event, 0)) / tot
        up = uniforms(keys[act], event, 1) * tot < lam
        t_old = time[act]
        over = t_old + dt > horizon
        dt = np.where(over, horizon - t_old, dt)
        if occupy is not None:
            occ[act] += np.where(n == occupy, dt, 0.0)
        time[act] = t_old + dt
        nxt = np.where(over, n, n + np.where(up, 1, -1))
        state[act] = nxt
        done = over | (nxt == -1) | (nxt == low)
        if high is not None:
            done |= nxt == high
        act = act[~done]
        event += 1
    return _Outcome(state, time, occ)


def sample_path(p: BirthDeathProcess, start: int, stop, seed: int, trial: int = 0,
                cap: int = EVENT_CAP) -> list[PathEvent]:
    """One path as a list of ``(time, state)`` events, starting with ``(0, start)``.

    Uses the same random stream as trial ``trial`` of ``simulate``.
    """
    if start < 0:
        raise ValueError("start must be a nonnegative state")
    key = trial_keys(seed, [trial])
    horizon = stop.T if isinstance(stop, TimeHorizon) else math.inf
    target = stop.j if isinstance(stop, HitState) else None
    events = [PathEvent(0.0, start)]
    n, t = start, 0.0
    block = 1024
    base = 0
    while True:
        ev = np.arange(base, base + block)
        u1 = uniforms(np.repeat(key, block), ev, 0)
        u2 = uniforms(np.repeat(key, block), ev, 1)
        for k in range(block):
            if base + k >= cap:
                raise RuntimeCap(trial, cap)
            lam = p.lam(n)
            mu = p.mu(n) if n >= 1 else p.mu0
            tot = lam + mu
            dt = -math.log(u1[k]) / tot
            if t + dt > horizon:
                return events
            t += dt
            n = n + 1 if u2[k] * tot < lam else n - 1
            events.append(PathEvent(t, n))
            if n == -1 or n == target:
                return events
        base += block
        block = min(block * 2, 1 << 16)


def _estimate(values: np.ndarray, seed: int, q: Quantity, target: float,
              accepted: int | None = None) -> SimulationEstimate:
    m = len(values)
    if m < MIN_TRIALS:
        raise TooFewAccepted(m, MIN_TRIALS)
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1))
    return SimulationEstimate(mean, sd / math.sqrt(m), m, seed, q, target, accepted)


def _pi(p, count):
    return np.exp(log_potential(p, count))


def _q0(p, count):
    return np.exp(log_q_at_zero_table(p, count))


def hitting_mean_target(p: BirthDeathProcess, n: int) -> float:
    pi = _pi(p, n + 1)
    return float(math.fsum(pi) / (p.lam(n) * pi[n]))


def estimate_hitting_mean(p: BirthDeathProcess, n: int, trials: int, seed: int) -> SimulationEstimate:
    """``E_n[tau_{n+1}]`` for a conservative process."""
    if p.mu0 != 0.0:
        raise ValueError("the unconditional hitting mean needs mu0 = 0")
    out = simulate(p, n, trials, seed, high=n + 1)
    return _estimate(out.time, seed, Quantity.HITTING_MEAN, hitting_mean_target(p, n))


def conditional_hitting_target(p: BirthDeathProcess, n: int) -> float:
    pi, q = _pi(p, n + 2), _q0(p, n + 2)
    return float(math.fsum(pi[: n + 1] * q[: n + 1] ** 2) / (p.lam(n) * pi[n] * q[n] * q[n + 1]))


def estimate_conditional_hitting(p: BirthDeathProcess, n: int, trials: int,
                                 seed: int) -> SimulationEstimate:
    """``E_n[tau_{n+1} | tau_{n+1} < tau_{-1}]``."""
    if not p.mu0 > 0:
        raise ValueError("conditioning on avoiding absorption needs mu0 > 0")
    out = simulate(p, n, trials, seed, high=n + 1)
    ok = out.state == n + 1
    return _estimate(out.time[ok], seed, Quantity.CONDITIONAL_HITTING,
                     conditional_hitting_target(p, n), int(ok.sum()))


def absorption_prob_target(p: BirthDeathProcess, i: int, n: int) -> float:
    q = _q0(p, n + 1)
    return float(q[i] / q[n])


def estimate_absorption_prob(p: BirthDeathProcess, i: int, n: int, trials: int,
                             seed: int) -> SimulationEstimate:
    """``P_i(tau_n < tau_{-1})``."""
    if not p.mu0 > 0:
        raise ValueError("needs mu0 > 0")
    if not 0 <= i <= n:
        raise ValueError("needs 0 <= i <= n")
    out = simulate(p, i, trials, seed, high=n)
    return _estimate((out.state == n).astype(float), seed, Quantity.ABSORPTION_PROB,
                     absorption_prob_target(p, i, n))


def occupation_time_target(p: BirthDeathProcess, i: int, n: int) -> float:
    if i < 0:
        return 0.0
    return float(_pi(p, n + 1)[n] * _q0(p, i + 1)[i] / p.mu0)


def estimate_occupation_time(p: BirthDeathProcess, i: int, n: int, trials: int,
                             seed: int) -> SimulationEstimate:
    """Expected time spent in ``n`` before absorption, chain truncated at ``n``."""
    if not p.mu0 > 0:
        raise ValueError("needs mu0 > 0")
    if i > n:
        raise ValueError("needs i <= n")
    out = simulate(p, i, trials, seed, top=n, occupy=n)
    return _estimate(out.occupation, seed, Quantity.OCCUPATION_TIME, occupation_time_target(p, i, n))


def _extinction_tails(p: BirthDeathProcess, n_max: int):
    a = series_A(p)
    if not a.finite:
        raise ValueError("extinction estimates need a transient process (A finite)")

    def terms(n):
        return _log_a_terms(p, int(n[-1]) + 1)[n]

    return np.exp(log_tails(terms, n_max, a) - math.log(a.value))


def extinction_target(p: BirthDeathProcess, i: int) -> float:
    return float(_extinction_tails(p, i)[i])


def extinction_ceiling(p: BirthDeathProcess, i: int, trials: int, floor: int = EXTINCTION_CEILING) -> int:
    """Smallest ceiling ``>= floor`` whose truncation bias ``q(ceiling)`` is below 0.1 stderr."""
    q = _extinction_tails(p, max(4 * floor, i + 1))
    qi = q[i]
    budget = 0.1 * math.sqrt(max(qi * (1 - qi), 1.0 / trials) / trials)
    for c in range(max(floor, i + 1), len(q)):
        if q[c] < budget:
            return c
    return len(q) - 1


def estimate_extinction_prob(p: BirthDeathProcess, i: int, trials: int, seed: int,
                             horizon_cap: int | None = None) -> SimulationEstimate:
    """Probability of ever reaching 0 from ``i``; paths reaching the ceiling count as escapes."""
    if p.mu0 != 0.0:
        raise ValueError("needs mu0 = 0")
    ceiling = horizon_cap if horizon_cap is not None else extinction_ceiling(p, i, trials)
    if i == 0:
        return _estimate(np.ones(trials), seed, Quantity.EXTINCTION_PROB, 1.0)
    out = simulate(p, i, trials, seed, low=0, high=ceiling)
    return _estimate((out.state == 0).astype(float), seed, Quantity.EXTINCTION_PROB,
                     extinction_target(p, i))


def estimate_transition_prob(p: BirthDeathProcess, i: int, j: int, t: float, trials: int,
                             seed: int, target: float = math.nan) -> SimulationEstimate:
    """``P_i(X_t = j)``."""
    out = simulate(p, i, trials, seed, horizon=t)
    alive = out.time >= t
    return _estimate(((out.state == j) & alive).astype(float), seed, Quantity.TRANSITION_PROB, target)
