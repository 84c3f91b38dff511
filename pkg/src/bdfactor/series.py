"""Convergence tests and summation for positive series given in log scale.

A series is described by a vectorised callable ``log_terms(n) -> log a_n``.
Three tests run on growing prefixes of the sequence:

* a ratio test with a confirmation window (geometric tails),
* a power-law test on the local exponent ``p`` of ``a_n ~ C n^-p``
  (Raabe/Gauss: ``p <= 1`` diverges),
* Richardson extrapolation of partial sums for convergent power-law tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

LogTerms = Callable[[np.ndarray], np.ndarray]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_TERMS = 100_000
DEFAULT_WINDOW = 20
DEFAULT_CAP = 1e15

_FIRST_CHUNK = 256
_EXPONENT_TOL = 1e-6


class SeriesKind(str, Enum):
    FINITE = "Finite"
    DIVERGENT = "Divergent"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class SeriesVerdict:
    """Outcome of a convergence test.

    ``method`` records how the verdict was reached: ``"geometric"``,
    ``"power"``, ``"exact"`` (all remaining terms vanish), ``"ratio"``,
    ``"cap"``, ``"raabe"`` or ``"rule"``.
    """

    kind: SeriesKind
    value: float | None = None
    tail_bound: float | None = None
    terms_used: int = 0
    evidence: str = ""
    method: str = ""

    @property
    def finite(self) -> bool:
        return self.kind is SeriesKind.FINITE

    @property
    def divergent(self) -> bool:
        return self.kind is SeriesKind.DIVERGENT

    @property
    def undetermined(self) -> bool:
        return self.kind is SeriesKind.UNDETERMINED

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "value": self.value,
            "tail_bound": self.tail_bound,
            "terms_used": self.terms_used,
            "evidence": self.evidence,
        }


def divergent_by_rule(evidence: str) -> SeriesVerdict:
    """Divergent verdict justified analytically rather than numerically."""
    return SeriesVerdict(SeriesKind.DIVERGENT, evidence=evidence, method="rule")


def _richardson(values: list[float], exponents: list[float]) -> tuple[float, float]:
    """Eliminate error terms ``c_j h^e_j`` from values at ``h = 1, 1/2, 1/4, ...``."""
    table = [list(values)]
    for e in exponents[: len(values) - 1]:
        prev = table[-1]
        r = 2.0**e
        table.append([(r * prev[i + 1] - prev[i]) / (r - 1.0) for i in range(len(prev) - 1)])
    best = table[-1][0]
    err = abs(best - table[-2][-1]) if len(table) > 1 else math.inf
    return best, err


def local_exponent(logs: np.ndarray, m0: int, levels: int = 5) -> tuple[float, float]:
    """Extrapolated exponent ``p`` of ``a_n ~ C n^-p`` from terms at ``m0 * 2^i``.

    Returns ``(p, error_estimate)``; requires ``len(logs) > m0 * 2**levels``.
    """
    ms = [m0 * 2**i for i in range(levels)]
    e = [-(logs[2 * m] - logs[m]) / math.log(2.0) for m in ms]
    if not all(math.isfinite(v) for v in e):
        return math.nan, math.inf
    return _richardson(e, [1.0, 2.0, 3.0, 4.0])


def _snap_exponent(p: float) -> float:
    q = round(2.0 * p) / 2.0
    return q if abs(p - q) < 2 * _EXPONENT_TOL else p


def _power_sum(logs: np.ndarray, n_hi: int, p: float) -> tuple[float, float]:
    """Richardson-extrapolated sum of a power-law series from partial sums."""
    levels = 7
    n0 = n_hi // 2 ** (levels - 1)
    shift = float(np.max(logs[:n_hi]))
    scaled = np.exp(logs[:n_hi] - shift)
    partial = []
    acc = 0.0
    start = 0
    for i in range(levels):
        end = n0 * 2**i
        acc = math.fsum([acc, math.fsum(scaled[start:end])])
        start = end
        partial.append(acc)
    exps = [(p - 1.0) + j for j in range(levels - 1)]
    value, err = _richardson(partial, exps)
    scale = math.exp(shift)
    return value * scale, err * scale


def _eval_logs(log_terms: LogTerms, lo: int, hi: int) -> np.ndarray:
    out = np.asarray(log_terms(np.arange(lo, hi)), dtype=float)
    if out.shape != (hi - lo,):
        raise ValueError("log_terms must return one value per index")
    return out


def sum_log_series(
    log_terms: LogTerms,
    tol: float = DEFAULT_TOL,
    max_terms: int = DEFAULT_MAX_TERMS,
    window: int = DEFAULT_WINDOW,
    cap: float = DEFAULT_CAP,
    n_limit: int | None = None,
) -> SeriesVerdict:
    """Classify and, when convergent, sum ``sum_n exp(log_terms(n))``.

    Parameters
    ----------
    log_terms : callable
        Vectorised map from an integer array to the logs of positive terms.
    tol : float
        Required tail bound, relative to ``max(1, value)``.
    max_terms : int
        Largest number of terms examined before giving up.
    window : int
        Confirmation window for the ratio tests.
    cap : float
        Partial sums beyond this value are declared divergent.
    n_limit : int, optional
        Number of terms available at all (table-backed rates).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_terms < 10:
        raise ValueError("max_terms must be at least 10")
    limit = max_terms if n_limit is None else min(max_terms, n_limit)
    logs = np.empty(0)
    n_hi = 0
    log_cap = math.log(cap)
    prev_p = None
    while True:
        target = min(limit, _FIRST_CHUNK if n_hi == 0 else 2 * n_hi)
        if target > n_hi:
            logs = np.concatenate([logs, _eval_logs(log_terms, n_hi, target)])
            n_hi = target
        if np.any(np.isnan(logs)) or np.any(logs == np.inf):
            return SeriesVerdict(SeriesKind.UNDETERMINED, terms_used=n_hi,
                                 evidence="non-finite term encountered")
        log_sum = float(np.logaddexp.reduce(logs))
        if log_sum > log_cap:
            return SeriesVerdict(SeriesKind.DIVERGENT, terms_used=n_hi,
                                 evidence=f"partial sum exceeded cap {cap:g}", method="cap")
        total = math.exp(log_sum)
        tail = logs[-(window + 1):]
        if np.all(tail == -np.inf):
            return SeriesVerdict(SeriesKind.FINITE, total, 0.0, n_hi,
                                 "remaining terms vanish", "exact")
        d = np.diff(tail)
        if np.all(np.isfinite(d)):
            dd = np.diff(d)
            if np.all(d >= -1e-12) and np.all(dd >= -1e-12):
                return SeriesVerdict(SeriesKind.DIVERGENT, terms_used=n_hi,
                                     evidence="ratio of consecutive terms >= 1 over window",
                                     method="ratio")
            verdict = _geometric_check(logs, d, total, tol, n_hi)
            if verdict is not None:
                return verdict
            if n_hi >= 2 * _FIRST_CHUNK:
                p, perr = local_exponent(logs, (n_hi - 1) // 32)
                stable = perr < _EXPONENT_TOL * max(1.0, abs(p))
                if stable and prev_p is not None and abs(p - prev_p) < 1e-4 * max(1.0, abs(p)):
                    if p <= 1.0 + _EXPONENT_TOL:
                        return SeriesVerdict(SeriesKind.DIVERGENT, terms_used=n_hi,
                                             evidence=f"power-law exponent p={p:.8g} <= 1",
                                             method="raabe")
                    value, err = _power_sum(logs, n_hi, _snap_exponent(p))
                    err = max(err, 64 * np.finfo(float).eps * abs(value))
                    if value > 0 and err <= tol * max(1.0, value):
                        return SeriesVerdict(SeriesKind.FINITE, value, err, n_hi,
                                             f"power-law tail p={p:.8g}, extrapolated",
                                             "power")
                prev_p = p if stable else None
        if n_hi >= limit:
            why = "term table exhausted" if n_limit is not None and limit == n_limit else \
                "max_terms reached"
            return SeriesVerdict(SeriesKind.UNDETERMINED, terms_used=n_hi, evidence=why)


def _geometric_check(logs, d, total, tol, n_hi):
    log_r = float(np.max(d))
    if log_r >= 0:
        return None
    m = len(d)
    # extrapolate the ratio to infinity assuming r_n = r + c/n
    n1, n2 = n_hi - m, n_hi - 1
    r1, r2 = math.exp(d[0]), math.exp(d[-1])
    r_inf = (n2 * r2 - n1 * r1) / (n2 - n1) if r2 > r1 else r2
    r = max(math.exp(log_r), r_inf)
    if r >= 1.0 - 1e-9:
        return None
    bound = math.exp(float(logs[-1])) * r / (1.0 - r)
    if bound <= tol * max(1.0, total):
        return SeriesVerdict(SeriesKind.FINITE, total, bound, n_hi,
                             f"ratio <= {r:.6g} over window, geometric tail", "geometric")
    return None


def log_tails(log_terms: LogTerms, n_max: int, verdict: SeriesVerdict,
              max_terms: int = 10 * DEFAULT_MAX_TERMS) -> np.ndarray:
    """Logs of the tails ``sum_{k>=n} a_k`` for ``n = 0..n_max`` of a finite series.

    Tails are formed by backward summation plus a remainder estimate, which
    keeps full relative accuracy where ``value - partial_sum`` would cancel.
    """
    if not verdict.finite:
        raise ValueError("tails requested for a series that is not finite")
    if verdict.method == "power":
        m = max(verdict.terms_used, n_max + 1)
        logs = _eval_logs(log_terms, 0, m)
        head = math.fsum(np.exp(logs))
        rem = verdict.value - head
        log_rem = math.log(rem) if rem > 0 else -np.inf
        return _suffix(logs, log_rem)[: n_max + 1]
    m = max(verdict.terms_used, n_max + 1) + 64
    while True:
        logs = _eval_logs(log_terms, 0, m)
        suffix = _suffix(logs, -np.inf)
        d = np.diff(logs[-(DEFAULT_WINDOW + 1):])
        if np.all(logs[-DEFAULT_WINDOW:] == -np.inf):
            return suffix[: n_max + 1]
        r = math.exp(float(np.max(d)))
        if r < 1.0:
            log_rem = float(logs[-1]) + math.log(r / (1.0 - r))
            if log_rem < suffix[n_max] + math.log(1e-18):
                return np.logaddexp(suffix, log_rem)[: n_max + 1]
        if m >= max_terms:
            return np.logaddexp(suffix, log_rem if r < 1.0 else -np.inf)[: n_max + 1]
        m *= 2


def _suffix(logs: np.ndarray, log_rem: float) -> np.ndarray:
    rev = np.logaddexp.accumulate(np.concatenate([[log_rem], logs[::-1]]))
    return rev[::-1][:-1] if len(logs) else rev
