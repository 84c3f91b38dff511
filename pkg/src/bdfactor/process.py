"""Birth-death processes, potential coefficients and classification series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidRates, NonHarmonic, RateTableExhausted
from .series import (
    DEFAULT_MAX_TERMS,
    DEFAULT_TOL,
    SeriesVerdict,
    divergent_by_rule,
    sum_log_series,
)

RateFn = Callable[[np.ndarray], np.ndarray]


def _vectorize(fn: Callable) -> RateFn:
    """Return a version of ``fn`` that maps integer arrays to float arrays."""

    def wrapped(n: np.ndarray) -> np.ndarray:
        n = np.asarray(n)
        try:
            out = np.asarray(fn(n), dtype=float)
            if out.shape == n.shape:
                return out
            if out.ndim == 0:
                return np.full(n.shape, float(out))
        except (TypeError, ValueError):
            pass
        return np.array([float(fn(int(k))) for k in n.ravel()], dtype=float).reshape(n.shape)

    return wrapped


@dataclass(frozen=True, eq=False)
class BirthDeathProcess:
    """Birth-death process on the nonnegative integers.

    Parameters
    ----------
    birth : callable
        ``n -> lambda_n`` for ``n >= 0``; should accept integer arrays.
    death : callable
        ``n -> mu_n`` for ``n >= 1``; the value at ``n = 0`` is never used.
    mu0 : float
        Absorption rate from state 0 to the cemetery state -1.
    label : str
        Free-text name.
    n_birth, n_death : int, optional
        For table-backed rates, ``birth`` is valid for ``n < n_birth`` and
        ``death`` for ``1 <= n <= n_death``.
    """

    birth: RateFn
    death: RateFn
    mu0: float = 0.0
    label: str = ""
    n_birth: int | None = None
    n_death: int | None = None
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.mu0) and self.mu0 >= 0):
            raise InvalidRates(0, self.mu0, "mu0")
        object.__setattr__(self, "birth", _vectorize(self.birth))
        object.__setattr__(self, "death", _vectorize(self.death))

    @classmethod
    def from_table(cls, lam: Sequence[float], mu: Sequence[float], mu0: float = 0.0,
                   label: str = "table") -> "BirthDeathProcess":
        """Table-backed process; ``mu[k]`` is the death rate of state ``k + 1``."""
        lam_a = np.asarray(lam, dtype=float)
        mu_a = np.asarray(mu, dtype=float)
        if lam_a.ndim != 1 or mu_a.ndim != 1 or len(lam_a) == 0:
            raise ValueError("rate tables must be nonempty 1-d sequences")
        mu_ext = np.concatenate([[np.nan], mu_a])
        return cls(lambda n: lam_a[n], lambda n: mu_ext[n], float(mu0), label,
                   n_birth=len(lam_a), n_death=len(mu_a),
                   meta={"table": {"lambda": lam_a.tolist(), "mu": mu_a.tolist(), "mu0": mu0}})

    @property
    def conservative(self) -> bool:
        return self.mu0 == 0.0

    @property
    def ladder_limit(self) -> int | None:
        """Number of potential coefficients computable from the tables."""
        if self.n_birth is None and self.n_death is None:
            return None
        nb = math.inf if self.n_birth is None else self.n_birth + 1
        nd = math.inf if self.n_death is None else self.n_death + 1
        return int(min(nb, nd))

    def lam(self, n):
        """Birth rates at ``n`` (scalar or array), validated positive."""
        return self._rates(n, self.birth, "lambda", 0, self.n_birth)

    def mu(self, n):
        """Death rates at ``n >= 1`` (scalar or array), validated positive."""
        return self._rates(n, self.death, "mu", 1, None if self.n_death is None else self.n_death + 1)

    def _rates(self, n, fn, which, lo, hi):
        scalar = np.ndim(n) == 0
        idx = np.atleast_1d(np.asarray(n, dtype=np.int64))
        if idx.size and idx.min() < lo:
            raise ValueError(f"{which} is defined for n >= {lo}")
        if hi is not None and idx.size and idx.max() >= hi:
            raise RateTableExhausted(int(idx.max()), which)
        vals = fn(idx)
        bad = ~(np.isfinite(vals) & (vals > 0))
        if np.any(bad):
            k = int(np.argmax(bad))
            raise InvalidRates(int(idx[k]), float(vals[k]), which)
        return float(vals[0]) if scalar else vals

    def describe(self) -> dict:
        """JSON-friendly description of the process."""
        out = {"label": self.label, "mu0": self.mu0}
        out.update(self.meta)
        return out


@dataclass(frozen=True)
class LogWeightLadder:
    """Potential coefficients ``pi_n`` and partial sums, stored as logs."""

    log_pi: np.ndarray
    log_partial_sum: np.ndarray

    @property
    def N(self) -> int:
        return len(self.log_pi) - 1

    def pi(self, n=None):
        return np.exp(self.log_pi if n is None else self.log_pi[n])


def log_potential(p: BirthDeathProcess, count: int) -> np.ndarray:
    """``log pi_n`` for ``n = 0..count-1``."""
    if count <= 0:
        return np.zeros(0)
    if count == 1:
        return np.zeros(1)
    n = np.arange(count - 1)
    steps = np.log(p.lam(n)) - np.log(p.mu(n + 1))
    return np.concatenate([[0.0], np.cumsum(steps)])


def build_ladder(p: BirthDeathProcess, N: int) -> LogWeightLadder:
    """Log potential coefficients and log partial sums for ``n = 0..N``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    lp = log_potential(p, N + 1)
    return LogWeightLadder(lp, np.logaddexp.accumulate(lp))


def _log_a_terms(p: BirthDeathProcess, count: int) -> np.ndarray:
    """``log(1 / (lambda_n pi_n))`` for ``n < count``."""
    return -np.log(p.lam(np.arange(count))) - log_potential(p, count)


def _exclusive_logcumsum(logs: np.ndarray) -> np.ndarray:
    return np.concatenate([[-np.inf], np.logaddexp.accumulate(logs)[:-1]]) if len(logs) else logs


def log_q_at_zero_table(p: BirthDeathProcess, count: int) -> np.ndarray:
    """``log Q_n(0)`` for ``n < count`` (all ``Q_n(0) >= 1``)."""
    if p.mu0 == 0.0:
        return np.zeros(count)
    partial = _exclusive_logcumsum(_log_a_terms(p, count))
    return np.logaddexp(0.0, math.log(p.mu0) + partial)


def q_at_zero_table(p: BirthDeathProcess, N: int) -> np.ndarray:
    """``Q_n(0)`` for ``n = 0..N``."""
    return np.exp(log_q_at_zero_table(p, N + 1))


def q_assoc_at_zero_table(p: BirthDeathProcess, N: int) -> np.ndarray:
    """``Q_n^(0)(0) = -sum_{k<n} 1/(lambda_k pi_k)`` for ``n = 0..N``."""
    return -np.exp(_exclusive_logcumsum(_log_a_terms(p, N + 1)))


def q_at_zero(p: BirthDeathProcess, n: int) -> float:
    """``Q_n(0) = 1 + mu0 * sum_{k<n} 1/(lambda_k pi_k)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return float(q_at_zero_table(p, n)[n])


def q_assoc_at_zero(p: BirthDeathProcess, n: int) -> float:
    """Value at 0 of the 0-th associated polynomial of degree ``n - 1``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return float(q_assoc_at_zero_table(p, n)[n])


def _terms(fn: Callable[[int], np.ndarray]):
    def log_terms(n: np.ndarray) -> np.ndarray:
        return fn(int(n[-1]) + 1)[n] if len(n) else np.zeros(0)

    return log_terms


def series_A(p: BirthDeathProcess, tol: float = DEFAULT_TOL,
             max_terms: int = DEFAULT_MAX_TERMS) -> SeriesVerdict:
    """``A = sum_n 1/(lambda_n pi_n)``."""
    return sum_log_series(_terms(lambda c: _log_a_terms(p, c)), tol, max_terms,
                          n_limit=_a_limit(p))


def series_B(p: BirthDeathProcess, tol: float = DEFAULT_TOL,
             max_terms: int = DEFAULT_MAX_TERMS) -> SeriesVerdict:
    """``B = sum_n pi_n``."""
    return sum_log_series(_terms(lambda c: log_potential(p, c)), tol, max_terms,
                          n_limit=p.ladder_limit)


def log_s_terms(p: BirthDeathProcess, count: int) -> np.ndarray:
    """``log(pi_k Q_k(0)^2)`` for ``k < count``."""
    return log_potential(p, count) + 2.0 * log_q_at_zero_table(p, count)


def series_S(p: BirthDeathProcess, tol: float = DEFAULT_TOL,
             max_terms: int = DEFAULT_MAX_TERMS) -> SeriesVerdict:
    """``S = sum_k pi_k Q_k(0)^2``; equals ``B`` when ``mu0 = 0``."""
    if p.mu0 > 0:
        b = series_B(p, tol, max_terms)
        if b.divergent:
            return divergent_by_rule("S >= B since Q_k(0) >= 1, and B diverges")
    return sum_log_series(_terms(lambda c: log_s_terms(p, c)), tol, max_terms,
                          n_limit=_a_limit(p))


def _a_limit(p: BirthDeathProcess) -> int | None:
    lim = p.ladder_limit
    if lim is None:
        return None
    return lim if p.n_birth is None else min(lim, p.n_birth)


class Regime(str, Enum):
    POSITIVE_RECURRENT = "PositiveRecurrent"
    NULL_RECURRENT = "NullRecurrent"
    TRANSIENT = "Transient"
    CERTAIN_ERGODIC_ABSORPTION = "CertainErgodicAbsorption"
    CERTAIN_NON_ERGODIC_ABSORPTION = "CertainNonErgodicAbsorption"
    TRANSIENT_ABSORPTION = "TransientAbsorption"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Classification:
    conservative: bool
    regime: Regime
    A: SeriesVerdict
    B: SeriesVerdict

    def to_dict(self) -> dict:
        return {
            "conservative": self.conservative,
            "regime": self.regime.value,
            "A": self.A.to_dict(),
            "B": self.B.to_dict(),
        }


def classify(p: BirthDeathProcess, tol: float = DEFAULT_TOL,
             max_terms: int = DEFAULT_MAX_TERMS) -> Classification:
    """Recurrence or absorption regime from the characters of ``A`` and ``B``."""
    a = series_A(p, tol, max_terms)
    b = series_B(p, tol, max_terms)
    cons = p.conservative
    if a.finite:
        regime = Regime.TRANSIENT if cons else Regime.TRANSIENT_ABSORPTION
    elif a.divergent and b.finite:
        regime = Regime.POSITIVE_RECURRENT if cons else Regime.CERTAIN_ERGODIC_ABSORPTION
    elif a.divergent and b.divergent:
        regime = Regime.NULL_RECURRENT if cons else Regime.CERTAIN_NON_ERGODIC_ABSORPTION
    else:
        regime = Regime.UNDETERMINED
    return Classification(cons, regime, a, b)


def doob_transform(p: BirthDeathProcess, h: Callable, tol: float = 1e-10,
                   check_upto: int = 50) -> BirthDeathProcess:
    """Doob h-transform by a positive harmonic function ``h``.

    Harmonicity ``(A h)(i) = 0`` (with ``h(-1) = 0``) is checked for
    ``i = 0..check_upto``; the result is conservative.
    """
    hv = _vectorize(h)
    top = check_upto
    if p.n_birth is not None:
        top = min(top, p.n_birth - 2)
    if p.n_death is not None:
        top = min(top, p.n_death - 1)
    i = np.arange(top + 1)
    hi = hv(i)
    if np.any(~(hi > 0)):
        k = int(np.argmax(~(hi > 0)))
        raise NonHarmonic(k, float("nan"))
    lam = p.lam(i)
    mu = np.concatenate([[p.mu0], p.mu(i[1:])]) if top >= 1 else np.array([p.mu0])
    h_prev = np.concatenate([[0.0], hi[:-1]])
    res = lam * hv(i + 1) - (lam + mu) * hi + mu * h_prev
    rel = np.abs(res) / ((lam + mu) * hi)
    if np.any(rel > tol):
        k = int(np.argmax(rel > tol))
        raise NonHarmonic(k, float(res[k]))
    birth, death = p.birth, p.death
    return BirthDeathProcess(
        lambda n: birth(n) * hv(n + 1) / hv(n),
        lambda n: death(n) * hv(n - 1) / hv(n),
        0.0,
        f"doob({p.label})",
        n_birth=None if p.n_birth is None else p.n_birth - 1,
        n_death=None if p.n_death is None else
        (p.n_death if p.n_birth is None else min(p.n_death, p.n_birth - 1)),
    )


def q_at_zero_function(p: BirthDeathProcess) -> Callable[[np.ndarray], np.ndarray]:
    """``n -> Q_n(0)`` as a vectorised callable."""

    def h(n):
        n = np.asarray(n)
        return np.exp(log_q_at_zero_table(p, int(np.max(n)) + 1)[n])

    return h


def truncated_generator(p: BirthDeathProcess, N: int) -> np.ndarray:
    """Rows and columns ``0..N-1`` of the generator."""
    if N < 2:
        raise ValueError("N must be at least 2")
    lam = p.lam(np.arange(N))
    mu = np.concatenate([[p.mu0], p.mu(np.arange(1, N))])
    g = np.diag(-(lam + mu))
    g += np.diag(lam[:-1], 1)
    g += np.diag(mu[1:], -1)
    return g
