"""UL factorization of a birth-death generator and its Darboux transform.

The generator is written as ``A = U L`` with ``U`` upper bidiagonal
(diagonal ``y``, superdiagonal ``x``) and ``L`` lower bidiagonal (diagonal
``s``, subdiagonal ``r``).  The factorization has a free parameter
``x0 > 0``; swapping the factors gives ``L U`` with absorption ``mu0_tilde``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._recur import minimal_backward
from .errors import ConservativeRecurrentBlocked, Inadmissible, RateTableExhausted, UndeterminedSeries
from .polynomials import primary
from .process import BirthDeathProcess, _log_a_terms, log_potential, series_A, series_B
from .series import (
    DEFAULT_MAX_TERMS,
    DEFAULT_TOL,
    SeriesVerdict,
    divergent_by_rule,
    log_tails,
    sum_log_series,
)

CASE_TOL = 1e-12


class ULVerdict(str, Enum):
    ADMISSIBLE = "Admissible"
    REJECTED = "Rejected"


class TCase(str, Enum):
    T_INFINITE = "TInfinite"
    T_FINITE = "TFinite"


@dataclass(frozen=True)
class USequence:
    """``u_n = Q_n(0) + c Q_n^(0)(0)`` with ``c = x0 + mu0_tilde``, in log form.

    ``case`` follows the sign of ``mu0 - c``: 1 (positive), 2 (zero),
    3 (negative, ``u`` has a positive limit), 4 (``c = mu0 + 1/A``,
    ``u`` decreases to 0).
    """

    process: BirthDeathProcess
    c: float
    case: int
    A: SeriesVerdict
    u_inf: float

    def log_u(self, count: int) -> np.ndarray:
        p = self.process
        if self.case == 2:
            return np.zeros(count)
        if self.case == 1:
            la = _log_a_terms(p, count)
            partial = np.concatenate([[-np.inf], np.logaddexp.accumulate(la)[:-1]])
            return np.logaddexp(0.0, math.log(p.mu0 - self.c) + partial)
        lt = log_tails(lambda n: _log_a_terms(p, int(n[-1]) + 1)[n], count - 1, self.A)
        beta = self.c - p.mu0
        if self.case == 4:
            return lt - math.log(self.A.value)
        return np.logaddexp(math.log(self.u_inf), math.log(beta) + lt)

    def log_t_terms(self, count: int) -> np.ndarray:
        return log_potential(self.process, count) + 2.0 * self.log_u(count)


@dataclass(frozen=True)
class ULAdmissibility:
    """Admissibility of ``(x0, mu0_tilde)`` for the UL Darboux transform."""

    verdict: ULVerdict
    reason: str
    T: SeriesVerdict | None
    upper_limit: float
    case: TCase | None
    c_interval: tuple[float, float]
    mu0_tilde_interval: tuple[float, float]
    u_case: int | None = None
    at_T_bound: bool = False
    regime: str = ""
    A: SeriesVerdict | None = field(default=None, repr=False)
    B: SeriesVerdict | None = field(default=None, repr=False)
    u: USequence | None = field(default=None, repr=False)

    @property
    def admissible(self) -> bool:
        return self.verdict is ULVerdict.ADMISSIBLE

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "reason": self.reason,
            "T": None if self.T is None else self.T.to_dict(),
            "upper_limit": self.upper_limit,
            "case": None if self.case is None else self.case.value,
            "c_interval": list(self.c_interval),
            "mu0_tilde_interval": list(self.mu0_tilde_interval),
            "u_case": self.u_case,
            "regime": self.regime,
        }


def _regime(a: SeriesVerdict, b: SeriesVerdict) -> str:
    ka = "A<inf" if a.finite else "A=inf"
    kb = "B<inf" if b.finite else "B=inf"
    return f"{ka}, {kb}"


def ul_admissibility(p: BirthDeathProcess, x0: float, mu0_tilde: float,
                     tol: float = DEFAULT_TOL,
                     max_terms: int = DEFAULT_MAX_TERMS) -> ULAdmissibility:
    """Decide whether ``(x0, mu0_tilde)`` yields a genuine birth-death process.

    Raises
    ------
    ConservativeRecurrentBlocked
        ``mu0 = 0`` and ``A`` diverges.
    UndeterminedSeries
        ``A``, ``B`` or ``T`` could not be classified.
    """
    if not (x0 > 0 and math.isfinite(x0)):
        raise ValueError("x0 must be positive and finite")
    if not (mu0_tilde >= 0 and math.isfinite(mu0_tilde)):
        raise ValueError("mu0_tilde must be nonnegative and finite")
    a = series_A(p, tol, max_terms)
    if a.undetermined:
        raise UndeterminedSeries("A", a.evidence)
    if p.mu0 == 0.0 and a.divergent:
        raise ConservativeRecurrentBlocked()
    b = series_B(p, tol, max_terms)
    if b.undetermined:
        raise UndeterminedSeries("B", b.evidence)
    mu0 = p.mu0
    c = x0 + mu0_tilde
    upper = mu0 + (1.0 / a.value if a.finite else 0.0)
    regime = _regime(a, b)

    def reject(reason, T=None, case=None, u_case=None):
        return ULAdmissibility(ULVerdict.REJECTED, reason, T, upper, case, (0.0, upper),
                               (0.0, 0.0), u_case, False, regime, a, b)

    scale = max(1.0, mu0)
    if abs(c - mu0) <= CASE_TOL * scale:
        u_case, u_inf = 2, 1.0
    elif c < mu0:
        u_case, u_inf = 1, math.inf
    else:
        if not a.finite:
            return reject(f"x0+mu0_tilde={c!r} exceeds mu0+1/A={upper!r} (A diverges)")
        beta_max = 1.0 / a.value
        slack = CASE_TOL * max(1.0, upper) + a.tail_bound / a.value**2
        beta = c - mu0
        if abs(beta - beta_max) <= slack:
            u_case, u_inf = 4, 0.0
        elif beta < beta_max:
            u_case, u_inf = 3, 1.0 - beta * a.value
        else:
            return reject(f"x0+mu0_tilde={c!r} exceeds mu0+1/A={upper!r}")
    useq = USequence(p, c, u_case, a, u_inf)
    if b.divergent and u_case in (1, 2, 3):
        T = divergent_by_rule("u_n is bounded below by a positive constant and B diverges")
    elif u_case == 2:
        T = b
    else:
        lim = p.ladder_limit

        def terms(n):
            return useq.log_t_terms(int(n[-1]) + 1)[n]

        T = sum_log_series(terms, tol, max_terms, n_limit=lim)
    if T.undetermined:
        raise UndeterminedSeries("T", T.evidence)
    if T.divergent:
        if mu0_tilde != 0.0:
            return reject("T diverges, which requires mu0_tilde = 0", T, TCase.T_INFINITE, u_case)
        return ULAdmissibility(ULVerdict.ADMISSIBLE, "T diverges and mu0_tilde = 0", T, upper,
                               TCase.T_INFINITE, (0.0, upper), (0.0, 0.0), u_case, False,
                               regime, a, b, useq)
    t_val = T.value
    mu_hi = c / t_val
    slack = CASE_TOL * c + mu0_tilde * T.tail_bound
    if mu0_tilde * t_val > c + slack:
        return reject(f"mu0_tilde*T={mu0_tilde * t_val!r} exceeds x0+mu0_tilde={c!r}",
                      T, TCase.T_FINITE, u_case)
    at_bound = mu0_tilde > 0 and abs(mu0_tilde * t_val - c) <= slack
    return ULAdmissibility(ULVerdict.ADMISSIBLE, "mu0_tilde*T <= x0+mu0_tilde <= mu0+1/A", T,
                           upper, TCase.T_FINITE, (mu0_tilde * t_val, upper), (0.0, mu_hi),
                           u_case, at_bound, regime, a, b, useq)


@dataclass(frozen=True)
class ULFactors:
    """Coefficient tables of the UL factorization for ``n = 0..N``.

    ``r[0]`` is unused and set to NaN; ``q[0]`` likewise.
    """

    process: BirthDeathProcess
    x0: float
    mu0_tilde: float
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    r: np.ndarray
    u: np.ndarray
    t: np.ndarray
    q: np.ndarray
    report: ULAdmissibility | None = field(default=None, repr=False)
    route: str = "closed"

    @property
    def N(self) -> int:
        return len(self.x) - 1

    def upper(self, size: int | None = None) -> np.ndarray:
        size = self.N + 1 if size is None else size
        return np.diag(self.y[:size]) + np.diag(self.x[: size - 1], 1)

    def lower(self, size: int | None = None) -> np.ndarray:
        size = self.N + 1 if size is None else size
        return np.diag(self.s[:size]) + np.diag(self.r[1:size], -1)

    def darboux_rates(self) -> tuple[np.ndarray, np.ndarray]:
        """``(lambda_tilde[0..N], mu_tilde[0..N])`` with ``mu_tilde[0] = mu0_tilde``."""
        lam = self.s * self.x
        mu = np.concatenate([[self.mu0_tilde], self.r[1:] * self.y[:-1]])
        return lam, mu

    def table(self) -> list[dict]:
        lam, mu = self.darboux_rates()
        return [{
            "n": n,
            "x": float(self.x[n]),
            "y": float(self.y[n]),
            "s": float(self.s[n]),
            "r": None if n == 0 else float(self.r[n]),
            "u": float(self.u[n]),
            "lambda_tilde": float(lam[n]),
            "mu_tilde": float(mu[n]),
        } for n in range(self.N + 1)]


def _require(report: ULAdmissibility) -> None:
    if not report.admissible:
        raise Inadmissible(report.reason)


def ul_factorize(p: BirthDeathProcess, x0: float, mu0_tilde: float, N: int,
                 tol: float = DEFAULT_TOL, max_terms: int = DEFAULT_MAX_TERMS) -> ULFactors:
    """UL coefficients from their closed forms.

    ``x_n = [c - mu0_tilde sum_{k<=n} pi_k u_k^2] / (pi_n u_n)`` with
    ``c = x0 + mu0_tilde``; the bracket is evaluated through tails of ``T``
    when ``mu0_tilde > 0`` so that it stays accurate near the bound.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    rep = ul_admissibility(p, x0, mu0_tilde, tol, max_terms)
    _require(rep)
    c = x0 + mu0_tilde
    count = N + 1
    log_u = rep.u.log_u(count)
    log_pu = log_potential(p, count) + log_u
    # log of the bracket D_n = c - mu0_tilde * sum_{k<=n} pi_k u_k^2, for n = -1..N
    if mu0_tilde == 0.0:
        log_d = np.full(count + 1, math.log(c))
    else:
        T = rep.T

        def terms(n):
            return rep.u.log_t_terms(int(n[-1]) + 1)[n]

        log_tail = log_tails(terms, count, T)
        K = 0.0 if rep.at_T_bound else c - mu0_tilde * T.value
        log_rest = math.log(mu0_tilde) + log_tail
        log_d = log_rest if K <= 0.0 else np.logaddexp(math.log(K), log_rest)
        log_d[0] = math.log(c)
    u = np.exp(log_u)
    x = np.exp(log_d[1:] - log_pu)
    y = -np.exp(log_d[:-1] - log_pu)
    lam = p.lam(np.arange(count))
    mu = p.mu(np.arange(1, count))
    s = np.empty(count)
    s[0] = 1.0
    s[1:] = np.exp(np.log(lam[:-1]) + log_pu[:-1] - log_d[1:-1])
    r = np.empty(count)
    r[0] = np.nan
    r[1:] = -np.exp(np.log(mu) + log_pu[1:] - log_d[1:-1])
    t = -mu0_tilde * u
    q = np.empty(count)
    q[0] = np.nan
    q[1:] = -np.exp(log_u[1:] - log_u[:-1])
    _check_signs(x, y, s, r)
    return ULFactors(p, float(x0), float(mu0_tilde), x, y, s, r, u, t, q, rep, "closed")


def _check_signs(x, y, s, r):
    for name, arr, sign in (("x", x, 1), ("y", y, -1), ("s", s, 1), ("r", r[1:], -1)):
        bad = np.nonzero(~(sign * arr > 0))[0]
        if len(bad):
            k = int(bad[0]) + (1 if name == "r" else 0)
            raise Inadmissible(f"{name}[{k}] has the wrong sign", index=k, which=name)


def ul_factorize_recursive(p: BirthDeathProcess, x0: float, mu0_tilde: float, N: int,
                           report: ULAdmissibility | None = None) -> ULFactors:
    """UL coefficients from ``q_{n+1} = -1 - mu_n/lambda_n - mu_n/(lambda_n q_n)``,
    ``t_n = -q_n t_{n-1}`` and ``x_n = t_n - mu_n x_{n-1}/(lambda_{n-1} q_n)``.

    Where the sought solution is the minimal one (``u`` when
    ``c = mu0 + 1/A``; ``x`` at the ``T`` bound) the recurrences are run
    backward from far indices, falling back to forward evaluation when the
    two solutions separate only algebraically.
    """
    rep = report or ul_admissibility(p, x0, mu0_tilde)
    _require(rep)
    c = x0 + mu0_tilde
    lam0 = p.lam(0)
    q1 = -(1.0 + p.mu0 / lam0) + c / lam0
    count = N + 1

    def rates(m):
        lam = p.lam(np.arange(m + 1))
        mu = np.concatenate([[p.mu0], p.mu(np.arange(1, m + 1))])
        return lam, mu

    def q_forward(m):
        lam, mu = rates(m)
        q = np.empty(m + 1)
        q[0] = np.nan
        q[1] = q1
        for n in range(1, m):
            q[n + 1] = -1.0 - mu[n] / lam[n] - mu[n] / (lam[n] * q[n])
        return q

    def q_backward(m):
        lam, mu = rates(m)
        q = np.empty(m + 1)
        q[0] = np.nan
        q[m] = 0.0
        for n in range(m - 1, 0, -1):
            q[n] = -mu[n] / (lam[n] * (q[n + 1] + 1.0 + mu[n] / lam[n]))
        return q

    def q_of(m):
        """``q`` on ``0..m``, from the minimal solution when ``u`` is minimal."""
        q = None
        if rep.u_case == 4:
            try:
                q = minimal_backward(lambda k: np.nan_to_num(q_backward(k), nan=0.0), m + 1)
            except RateTableExhausted:
                q = None
            if q is not None:
                q = q.copy()
                q[0] = np.nan
        return q_forward(m) if q is None else q

    q = q_of(count - 1)
    lam, mu = rates(count - 1)
    t = np.empty(count)
    t[0] = -mu0_tilde
    for n in range(1, count):
        t[n] = -q[n] * t[n - 1]
    u = np.concatenate([[1.0], np.cumprod(-q[1:])])
    x = None
    if rep.at_T_bound:
        try:
            x = _x_backward(p, q_of, x0, mu0_tilde, count)
        except RateTableExhausted:
            x = None
    if x is None:
        x = np.empty(count)
        x[0] = x0
        for n in range(1, count):
            x[n] = t[n] - mu[n] * x[n - 1] / (lam[n - 1] * q[n])
    y = t - x
    s = np.empty(count)
    s[0] = 1.0
    s[1:] = lam[:-1] / x[:-1]
    r = np.empty(count)
    r[0] = np.nan
    r[1:] = q[1:] * s[1:]
    return ULFactors(p, float(x0), float(mu0_tilde), x, y, s, r, u, t, q, rep, "recursive")


def _x_backward(p, q_of, x0, mu0_tilde, count):
    """Minimal solution of the ``x`` recurrence; ``q_of(m)`` supplies ``q`` on ``0..m``."""

    def run(m):
        lam = p.lam(np.arange(m + 1))
        mu = np.concatenate([[p.mu0], p.mu(np.arange(1, m + 1))])
        q = q_of(m)
        t = np.empty(m + 1)
        t[0] = -mu0_tilde
        for n in range(1, m + 1):
            t[n] = -q[n] * t[n - 1]
        x = np.empty(m + 1)
        x[m] = 0.0
        for n in range(m, 0, -1):
            x[n - 1] = (t[n] - x[n]) * lam[n - 1] * q[n] / mu[n]
        return x

    x = minimal_backward(run, count)
    if x is None:
        return None
    if not abs(x[0] - x0) <= 1e-6 * x0:
        raise Inadmissible("backward recursion does not reproduce x0", index=0, which="x")
    x = x.copy()
    x[0] = x0
    return x


def ul_darboux(p: BirthDeathProcess, x0: float, mu0_tilde: float, N: int,
               **kw) -> BirthDeathProcess:
    """Table-backed Darboux process with ``lambda_n = s_n x_n``, ``mu_n = r_n y_{n-1}``."""
    return darboux_process(ul_factorize(p, x0, mu0_tilde, N, **kw))


def darboux_process(f: ULFactors) -> BirthDeathProcess:
    lam, mu = f.darboux_rates()
    return BirthDeathProcess.from_table(
        lam, mu[1:], f.mu0_tilde,
        label=f"ul_darboux({f.process.label}, {f.x0:g}, {f.mu0_tilde:g})")


class ULTransformedFamily:
    """Polynomials of the UL Darboux process, ``Q_n = r_n Q_{n-1} + s_n Q_n``."""

    def __init__(self, factors: ULFactors):
        self.factors = factors
        self._poly = primary(factors.process)
        p = factors.process
        n1 = factors.N + 1
        self._w = np.exp(log_potential(p, n1)) * factors.u
        self._c = factors.x0 + factors.mu0_tilde

    def table(self, n_max: int, x) -> np.ndarray:
        f = self.factors
        if n_max > f.N:
            raise ValueError("degree beyond the factorization level")
        qx = self._poly.table(n_max, x)
        shape = (-1,) + (1,) * np.ndim(x)
        out = np.empty_like(qx)
        out[0] = 1.0
        out[1:] = f.r[1: n_max + 1].reshape(shape) * qx[:-1] + f.s[1: n_max + 1].reshape(shape) * qx[1:]
        return out

    def eval(self, n: int, x):
        v = self.table(n, x)[n]
        return float(v) if np.ndim(v) == 0 else v

    def eval_cd(self, n: int, x):
        """Christoffel-Darboux sum form of the same polynomial."""
        f = self.factors
        qx = self._poly.table(max(n - 1, 0), x)
        x = np.asarray(x, dtype=float)
        shape = (-1,) + (1,) * np.ndim(x)
        num = self._c - x * np.sum(self._w[:n].reshape(shape) * qx[:n], axis=0)
        if n == 0:
            return num / self._c
        # c - mu0_tilde sum_{k<n} pi_k u_k^2 = lambda_{n-1} pi_{n-1} u_{n-1} / s_n
        return num * f.s[n] / (f.process.lam(n - 1) * self._w[n - 1])


def ul_transformed_poly(p: BirthDeathProcess, x0: float, mu0_tilde: float, n: int, x, **kw):
    """``Q_tilde_n(x)`` for the UL Darboux process."""
    f = ul_factorize(p, x0, mu0_tilde, max(n, 1), **kw)
    return ULTransformedFamily(f).eval(n, x)
