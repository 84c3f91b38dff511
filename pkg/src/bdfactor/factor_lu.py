"""LU factorization of a birth-death generator and its Darboux transform.

The generator is written as ``A = L U`` with ``L`` lower bidiagonal
(diagonal ``s``, subdiagonal ``r``) and ``U`` upper bidiagonal (diagonal
``y``, superdiagonal ``x``).  Swapping the factors gives ``U L``, the
generator of a new birth-death process with absorption rate ``mu0_hat``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._recur import minimal_backward
from .errors import InadmissibleMu0Hat, UndeterminedSeries
from .polynomials import primary
from .process import (
    BirthDeathProcess,
    log_potential,
    log_q_at_zero_table,
    log_s_terms,
    series_A,
    series_S,
)
from .series import DEFAULT_MAX_TERMS, DEFAULT_TOL, SeriesVerdict, log_tails

_BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class LUBound:
    """Admissible range ``0 <= mu0_hat <= bound`` together with its provenance."""

    bound: float
    slack: float
    S: SeriesVerdict


@dataclass(frozen=True)
class LUFactors:
    """Coefficient tables of the LU factorization for ``n = 0..N``.

    ``r_tilde[0]`` is unused and set to NaN.
    """

    process: BirthDeathProcess
    mu0_hat: float
    s_tilde: np.ndarray
    r_tilde: np.ndarray
    x_tilde: np.ndarray
    y_tilde: np.ndarray
    t_tilde: np.ndarray
    q_tilde: np.ndarray
    at_bound: bool = False
    route: str = "closed"

    @property
    def N(self) -> int:
        return len(self.s_tilde) - 1

    def lower(self, size: int | None = None) -> np.ndarray:
        size = self.N + 1 if size is None else size
        return np.diag(self.s_tilde[:size]) + np.diag(self.r_tilde[1:size], -1)

    def upper(self, size: int | None = None) -> np.ndarray:
        size = self.N + 1 if size is None else size
        return np.diag(self.y_tilde[:size]) + np.diag(self.x_tilde[: size - 1], 1)

    def darboux_rates(self) -> tuple[np.ndarray, np.ndarray]:
        """``(lambda_hat[0..N-1], mu_hat[0..N])`` with ``mu_hat[0] = mu0_hat``."""
        lam_hat = self.x_tilde[:-1] * self.s_tilde[1:]
        mu_hat = np.concatenate([[self.mu0_hat], self.y_tilde[1:] * self.r_tilde[1:]])
        return lam_hat, mu_hat

    def table(self) -> list[dict]:
        lam_hat, mu_hat = self.darboux_rates()
        rows = []
        for n in range(self.N + 1):
            rows.append({
                "n": n,
                "s_tilde": float(self.s_tilde[n]),
                "r_tilde": None if n == 0 else float(self.r_tilde[n]),
                "x_tilde": float(self.x_tilde[n]),
                "y_tilde": float(self.y_tilde[n]),
                "lambda_hat": float(lam_hat[n]) if n < self.N else None,
                "mu_hat": float(mu_hat[n]),
            })
        return rows


def _s_verdict(p: BirthDeathProcess, tol: float, max_terms: int) -> SeriesVerdict:
    v = series_S(p, tol, max_terms)
    if v.undetermined:
        raise UndeterminedSeries("S", v.evidence)
    return v


def lu_bound(p: BirthDeathProcess, tol: float = DEFAULT_TOL,
             max_terms: int = DEFAULT_MAX_TERMS) -> LUBound:
    """Upper limit for ``mu0_hat`` and the slack used at the boundary."""
    scale = p.lam(0) + p.mu0
    S = _s_verdict(p, tol, max_terms)
    if S.divergent:
        return LUBound(scale, _BOUND_RTOL * scale, S)
    c = S.value / (S.value - 1.0)
    dc = S.tail_bound / (S.value - 1.0) ** 2
    return LUBound(scale * c, scale * (dc + _BOUND_RTOL * c), S)


def lu_admissible_upper_bound(p: BirthDeathProcess, tol: float = DEFAULT_TOL,
                              max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """Largest admissible ``mu0_hat``: ``(lambda_0 + mu0) S / (S - 1)``.

    When ``S`` diverges the bound is its limit ``lambda_0 + mu0``.
    """
    return lu_bound(p, tol, max_terms).bound


def _log_tail_s(p: BirthDeathProcess, n_max: int, S: SeriesVerdict) -> np.ndarray:
    def terms(n):
        return log_s_terms(p, int(n[-1]) + 1)[n]

    if S.method == "rule":
        raise ValueError("tails need a numerically summed S")
    return log_tails(terms, n_max, S)


def _first_nonpositive(p: BirthDeathProcess, c: float, N: int) -> tuple[int | None, float]:
    count = max(N + 2, 64)
    logs = log_s_terms(p, count)
    partial = np.exp(np.logaddexp.accumulate(logs))
    bracket = c + (1.0 - c) * partial
    bad = np.nonzero(bracket <= 0)[0]
    if len(bad) == 0:
        return None, math.nan
    n = int(bad[0])
    return n, float(bracket[n] / math.exp(logs[n] - log_q_at_zero_table(p, n + 1)[n]))


def lu_factorize(p: BirthDeathProcess, mu0_hat: float, N: int, tol: float = DEFAULT_TOL,
                 max_terms: int = DEFAULT_MAX_TERMS) -> LUFactors:
    """LU coefficients from their closed forms.

    The diagonal of the lower factor is
    ``s_n = [c + (1 - c) sum_{k<=n} pi_k Q_k(0)^2] / (pi_n Q_n(0))`` with
    ``c = mu0_hat / (lambda_0 + mu0)``.  For ``c > 1`` the bracket is
    rewritten through the tails of ``S`` so that no cancellation occurs.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if not (mu0_hat >= 0 and math.isfinite(mu0_hat)):
        raise InadmissibleMu0Hat(None, math.nan, "mu0_hat must be finite and nonnegative")
    scale = p.lam(0) + p.mu0
    c = mu0_hat / scale
    info = lu_bound(p, tol, max_terms) if c > 1.0 else None
    at_bound = False
    if info is not None and info.S.divergent and mu0_hat <= info.bound + info.slack:
        c, at_bound = 1.0, True
    count = N + 2
    log_pq = log_potential(p, count) + log_q_at_zero_table(p, count)
    if c <= 1.0:
        log_partial = np.logaddexp.accumulate(log_s_terms(p, count))
        if c == 1.0:
            log_bracket = np.zeros(count)
        elif c == 0.0:
            log_bracket = log_partial
        else:
            log_bracket = np.logaddexp(math.log(c), math.log1p(-c) + log_partial)
    else:
        if mu0_hat > info.bound + info.slack:
            n, val = _first_nonpositive(p, c, N)
            raise InadmissibleMu0Hat(
                n, val, f"mu0_hat={mu0_hat!r} exceeds the bound {info.bound!r}"
                f" (first non-positive s_tilde at n={n})")
        at_bound = abs(mu0_hat - info.bound) <= info.slack
        log_tail = _log_tail_s(p, count, info.S)[1:]
        log_rest = math.log(c - 1.0) + log_tail
        K = 0.0 if at_bound else c - (c - 1.0) * info.S.value
        if K < 0:
            n, val = _first_nonpositive(p, c, N)
            raise InadmissibleMu0Hat(n, val)
        log_bracket = log_rest if K == 0.0 else np.logaddexp(math.log(K), log_rest)
        log_bracket[0] = 0.0
    s = np.exp(log_bracket - log_pq)
    s[0] = 1.0
    bad = np.nonzero(~(s > 0))[0]
    if len(bad):
        raise InadmissibleMu0Hat(int(bad[0]), float(s[bad[0]]))
    lq = log_q_at_zero_table(p, count + 1)
    q = -np.exp(lq[1:] - lq[:-1])
    t = (1.0 - c) * np.exp(lq[:count])
    t[0] = 1.0
    r = np.empty(count)
    r[0] = np.nan
    # r_n = -bracket_{n-1}/(pi_n Q_n(0)) avoids the difference t_n - s_n
    r[1:] = -np.exp(log_bracket[:-1] - log_pq[1:])
    lam = p.lam(np.arange(count))
    x = lam / s
    y = q[:count] * x
    return LUFactors(p, float(mu0_hat), s[: N + 1], r[: N + 1], x[: N + 1], y[: N + 1],
                     t[: N + 1], q[: N + 1], at_bound, "closed")


def _q_backward(p: BirthDeathProcess, m: int) -> np.ndarray:
    a = p.mu(np.arange(1, m + 1)) / p.lam(np.arange(1, m + 1))
    q = np.empty(m + 1)
    q[m] = 0.0
    for n in range(m, 0, -1):
        q[n - 1] = -a[n - 1] / (q[n] + 1.0 + a[n - 1])
    return q


def lu_factorize_recursive(p: BirthDeathProcess, mu0_hat: float, N: int,
                           at_bound: bool = False, extra: int = 4000) -> LUFactors:
    """LU coefficients from the coupled first-order recurrences.

    ``q_n = -1 - mu_n/lambda_n - mu_n/(lambda_n q_{n-1})``,
    ``t_{n+1} = -q_n t_n`` and ``s_n = t_n - mu_n s_{n-1}/(lambda_{n-1} q_{n-1})``.
    At the admissibility bound with ``mu0_hat > lambda_0 + mu0`` the
    sought ``s`` is the minimal solution, so the ``s`` recurrence is run
    backward from a far index instead of forward from ``s_0 = 1``.
    """
    lam0 = p.lam(0)
    c = mu0_hat / (lam0 + p.mu0)
    backward = at_bound and c > 1.0
    count = N + 2 + (extra if backward else 0)
    lam = p.lam(np.arange(count + 1))
    mu = np.concatenate([[p.mu0], p.mu(np.arange(1, count + 1))])
    q = None
    if p.mu0 == 0.0 and series_A(p).divergent:
        # Q(0) = 1 is then the minimal solution and the forward ratio recursion is unstable
        q = minimal_backward(lambda m: _q_backward(p, m), count + 1)
    if q is None:
        q = np.empty(count + 1)
        q[0] = -1.0 - p.mu0 / lam0
        for n in range(1, count + 1):
            q[n] = -1.0 - mu[n] / lam[n] - mu[n] / (lam[n] * q[n - 1])
    else:
        q = q.copy()
    t = np.empty(count)
    t[0] = 1.0
    t[1] = 1.0 + (p.mu0 - mu0_hat) / lam0
    for n in range(1, count - 1):
        t[n + 1] = -q[n] * t[n]
    s = np.empty(count)
    g = -mu[1:count] / (lam[: count - 1] * q[: count - 1])
    if backward:
        s[-1] = 0.0
        for n in range(count - 1, 0, -1):
            s[n - 1] = (s[n] - t[n]) / g[n - 1]
        s0 = s[0]
        if not abs(s0 - 1.0) < 1e-6:
            raise InadmissibleMu0Hat(0, s0, "backward recursion does not reach s_0 = 1")
        s[0] = 1.0
    else:
        s[0] = 1.0
        for n in range(1, count):
            s[n] = t[n] + g[n - 1] * s[n - 1]
    k = N + 1
    s, t, q = s[:k], t[:k], q[:k]
    r = np.empty(k)
    r[0] = np.nan
    r[1:] = t[1:] - s[1:]
    x = lam[:k] / s
    y = q * x
    return LUFactors(p, float(mu0_hat), s, r, x, y, t, q, at_bound, "recursive")


def lu_darboux(p: BirthDeathProcess, mu0_hat: float, N: int, **kw) -> BirthDeathProcess:
    """Table-backed Darboux process with ``lambda_hat_n = x_n s_{n+1}``, ``mu_hat_n = y_n r_n``."""
    f = lu_factorize(p, mu0_hat, N, **kw)
    return darboux_process(f)


def darboux_process(f: LUFactors) -> BirthDeathProcess:
    lam_hat, mu_hat = f.darboux_rates()
    return BirthDeathProcess.from_table(lam_hat, mu_hat[1:], f.mu0_hat,
                                        label=f"lu_darboux({f.process.label}, {f.mu0_hat:g})")


class LUTransformedFamily:
    """Polynomials of the LU Darboux process.

    ``Q_hat_n(x) = sum_{k<=n} pi_k Q_k(0) Q_k(x) / D_n`` where ``D_n`` is the
    bracket of the closed-form coefficients; valid at ``x = 0`` as well.
    """

    def __init__(self, factors: LUFactors):
        self.factors = factors
        p = factors.process
        n1 = factors.N + 1
        self._w = np.exp(log_potential(p, n1) + log_q_at_zero_table(p, n1))
        self._den = factors.s_tilde * self._w  # D_n = s_n pi_n Q_n(0)
        self._poly = primary(p)

    def table(self, n_max: int, x) -> np.ndarray:
        if n_max > self.factors.N:
            raise ValueError("degree beyond the factorization level")
        qx = self._poly.table(n_max, x)
        shape = (-1,) + (1,) * np.ndim(x)
        num = np.cumsum(self._w[: n_max + 1].reshape(shape) * qx, axis=0)
        return num / self._den[: n_max + 1].reshape(shape)

    def eval(self, n: int, x):
        v = self.table(n, x)[n]
        return float(v) if np.ndim(v) == 0 else v

    def eval_ratio(self, n: int, x):
        """``-(x_n Q_{n+1}(x) + y_n Q_n(x)) / x`` (undefined at ``x = 0``)."""
        f = self.factors
        q = self._poly.table(n + 1, x)
        return -(f.x_tilde[n] * q[n + 1] + f.y_tilde[n] * q[n]) / np.asarray(x, dtype=float)


def lu_transformed_poly(p: BirthDeathProcess, mu0_hat: float, n: int, x, **kw):
    """``Q_hat_n(x)`` for the LU Darboux process with absorption ``mu0_hat``."""
    f = lu_factorize(p, mu0_hat, max(n, 1), **kw)
    return LUTransformedFamily(f).eval(n, x)
