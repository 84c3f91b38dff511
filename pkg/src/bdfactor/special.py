"""Special functions and classical orthogonal polynomials used as independent oracles.

The polynomial families are evaluated from their own standard three-term
recurrences, which differ in normalization from the birth-death recurrence.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

from .errors import DomainError

_SERIES_EPS = 1e-17
_SERIES_MAX = 200_000


def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def upper_inc_gamma(s: float, x: float) -> float:
    """``Gamma(s, x) = int_x^inf t^(s-1) e^-t dt``.

    For integer ``s >= 1`` the exact finite sum
    ``(s-1)! e^-x sum_{k<s} x^k/k!`` is used.
    """
    if x < 0 or s <= 0:
        raise DomainError(f"upper_inc_gamma needs s > 0 and x >= 0, got s={s}, x={x}")
    if float(s).is_integer():
        n = int(s)
        term, acc = 1.0, [1.0]
        for k in range(1, n):
            term *= x / k
            acc.append(term)
        return math.factorial(n - 1) * math.exp(-x) * math.fsum(acc)
    return float(sp.gammaincc(s, x) * sp.gamma(s))


def lower_inc_gamma(s: float, x: float) -> float:
    """``gamma(s, x) = int_0^x t^(s-1) e^-t dt``.

    Evaluated as ``x^s e^-x sum_k x^k / (s)_(k+1)``, which has positive
    terms and so avoids the cancellation in ``Gamma(s) - Gamma(s, x)``.
    """
    if x < 0 or s <= 0:
        raise DomainError(f"lower_inc_gamma needs s > 0 and x >= 0, got s={s}, x={x}")
    if x == 0:
        return 0.0
    term = 1.0 / s
    acc = [term]
    k = 0
    while term > _SERIES_EPS * acc[0] or k < x:
        k += 1
        term *= x / (s + k)
        acc.append(term)
        if k > _SERIES_MAX:
            raise DomainError("lower_inc_gamma series did not converge")
    return math.exp(s * math.log(x) - x) * math.fsum(acc)


def inc_beta(x: float, a: float, b: float) -> float:
    """Non-regularized incomplete Beta ``B(x; a, b) = int_0^x t^(a-1) (1-t)^(b-1) dt``."""
    if not (0.0 <= x <= 1.0) or a <= 0 or b <= 0:
        raise DomainError(f"inc_beta needs 0<=x<=1, a,b>0, got x={x}, a={a}, b={b}")
    return float(sp.betainc(a, b, x) * sp.beta(a, b))


def inc_beta_complement(x: float, a: float, b: float) -> float:
    """``C(x; a, b) = B(a, b) - B(x; a, b) = int_x^1 t^(a-1) (1-t)^(b-1) dt``."""
    if not (0.0 <= x <= 1.0) or a <= 0 or b <= 0:
        raise DomainError(f"inc_beta_complement needs 0<=x<=1, a,b>0, got x={x}, a={a}, b={b}")
    return float(sp.betaincc(a, b, x) * sp.beta(a, b))


def _f21_series(a: float, b: float, c: float, z: float, n_terms: int | None) -> float:
    term, running = 1.0, 1.0
    acc = [1.0]
    limit = _SERIES_MAX if n_terms is None else n_terms
    for k in range(limit):
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        term *= ratio
        acc.append(term)
        running += term
        if term == 0.0:
            break
        if n_terms is None and abs(ratio) < 1.0:
            # geometric bound on the remainder once terms shrink
            if abs(term) * abs(ratio) / (1.0 - abs(ratio)) <= _SERIES_EPS * abs(running):
                break
    else:
        if n_terms is None:
            raise DomainError("2F1 series did not converge")
    return math.fsum(acc)


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for real arguments.

    Terminating series (``a`` or ``b`` a nonpositive integer) are summed
    exactly for any ``z``.  Otherwise ``z`` must lie in ``(-1, 1)``:
    the direct series is used on ``[0, 1)`` and the Pfaff transformation
    maps negative ``z`` onto ``[0, 1/2)``.
    """
    for v in (a, b):
        if _is_nonpos_int(v):
            n = int(-v)
            if _is_nonpos_int(c) and c > v:
                raise DomainError("2F1 denominator parameter hits zero before termination")
            return _f21_series(a, b, c, z, n)
    if _is_nonpos_int(c):
        raise DomainError("2F1 undefined for nonpositive integer c")
    if not (-1.0 < z < 1.0):
        raise DomainError(f"2F1 series needs |z| < 1, got z={z}")
    if z < 0.0:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * gauss_2f1(a, c - b, c, w)
    return _f21_series(a, b, c, z, None)


def dilog(x: float) -> float:
    """Dilogarithm ``Li_2(x) = -int_0^x log(1-u)/u du`` for real ``x <= 1``."""
    if x > 1.0:
        raise DomainError(f"dilog is real-valued only for x <= 1, got {x}")
    return float(sp.spence(1.0 - x))


def pochhammer(a: float, n: int) -> float:
    return float(sp.poch(a, n))


# classical polynomials, each from its own three-term recurrence

def _recur_table(n: int, x, p0, p1, step):
    x = np.asarray(x, dtype=float)
    out = [np.broadcast_to(np.asarray(p0, dtype=float), x.shape).copy()]
    if n == 0:
        return out[0]
    out.append(np.asarray(p1, dtype=float) * np.ones_like(x))
    for k in range(1, n):
        out.append(step(k, out[k], out[k - 1]))
    return out[n]


def chebyshev_u(n: int, y):
    """Chebyshev polynomial of the second kind; ``U_{-1} = 0``."""
    if n < 0:
        return np.zeros_like(np.asarray(y, dtype=float))
    y = np.asarray(y, dtype=float)
    return _recur_table(n, y, 1.0, 2 * y, lambda k, p, q: 2 * y * p - q)


def chebyshev_t(n: int, y):
    """Chebyshev polynomial of the first kind."""
    y = np.asarray(y, dtype=float)
    return _recur_table(n, y, 1.0, y, lambda k, p, q: 2 * y * p - q)


def charlier(n: int, x, a: float):
    """Charlier ``C_n(x; a)``: ``-x C_n = a C_{n+1} - (n+a) C_n + n C_{n-1}``."""
    x = np.asarray(x, dtype=float)
    return _recur_table(n, x, 1.0, 1.0 - x / a,
                        lambda k, p, q: ((k + a - x) * p - k * q) / a)


def meixner(n: int, x, b: float, c: float):
    """Meixner ``M_n(x; b, c)``:
    ``(c-1) x M_n = c(n+b) M_{n+1} - [n + (n+b) c] M_n + n M_{n-1}``."""
    x = np.asarray(x, dtype=float)
    return _recur_table(n, x, 1.0, 1.0 + (c - 1.0) * x / (c * b),
                        lambda k, p, q: (((c - 1.0) * x + k + (k + b) * c) * p - k * q) / (c * (k + b)))


def laguerre(n: int, alpha: float, x):
    """Generalized Laguerre ``L_n^(alpha)(x)``:
    ``(n+1) L_{n+1} = (2n + alpha + 1 - x) L_n - (n + alpha) L_{n-1}``."""
    x = np.asarray(x, dtype=float)
    return _recur_table(n, x, 1.0, 1.0 + alpha - x,
                        lambda k, p, q: ((2 * k + alpha + 1 - x) * p - (k + alpha) * q) / (k + 1))
