"""Birth-death polynomials and their 0-th associated family."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .process import BirthDeathProcess, log_potential

MAX_DEGREE = 200


class PolyKind(str, Enum):
    PRIMARY = "Primary"
    ASSOCIATED = "Associated"


@dataclass(frozen=True)
class PolynomialEvaluator:
    """Evaluates ``Q_n(x)`` (primary) or ``Q_n^(0)(x)`` (associated) by recurrence.

    Both families satisfy ``-x Q_n = lambda_n Q_{n+1} - (lambda_n + mu_n) Q_n
    + mu_n Q_{n-1}``; primary starts from ``Q_{-1} = 0, Q_0 = 1`` and the
    associated family from ``Q_0 = 0, Q_1 = -1/lambda_0``.
    """

    process: BirthDeathProcess
    kind: PolyKind = PolyKind.PRIMARY

    def table(self, n_max: int, x) -> np.ndarray:
        """Values for degrees ``0..n_max``; shape ``(n_max + 1,) + shape(x)``."""
        if n_max < 0:
            raise ValueError("degree must be nonnegative")
        if n_max > MAX_DEGREE:
            raise ValueError(f"forward recurrence limited to n <= {MAX_DEGREE}")
        x = np.asarray(x, dtype=float)
        p = self.process
        out = np.empty((n_max + 1,) + x.shape)
        if n_max == 0:
            out[0] = 0.0 if self.kind is PolyKind.ASSOCIATED else 1.0
            return out
        lam = p.lam(np.arange(n_max))
        mu = np.concatenate([[p.mu0], p.mu(np.arange(1, n_max))])
        if self.kind is PolyKind.PRIMARY:
            out[0] = 1.0
            out[1] = (lam[0] + mu[0] - x) / lam[0]
        else:
            out[0] = 0.0
            out[1] = -1.0 / lam[0]
        for n in range(1, n_max):
            out[n + 1] = ((lam[n] + mu[n] - x) * out[n] - mu[n] * out[n - 1]) / lam[n]
        return out

    def eval(self, n: int, x):
        """``Q_n(x)``; ``x`` may be a scalar or an array."""
        v = self.table(n, x)[n]
        return float(v) if np.ndim(v) == 0 else v


def primary(p: BirthDeathProcess) -> PolynomialEvaluator:
    return PolynomialEvaluator(p, PolyKind.PRIMARY)


def associated(p: BirthDeathProcess) -> PolynomialEvaluator:
    return PolynomialEvaluator(p, PolyKind.ASSOCIATED)


def _rel(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / (max(abs(lhs), abs(rhs)) + 1.0)


def cd_residual(e: PolynomialEvaluator, n: int, x: float, y: float) -> float:
    """Relative residual of the Christoffel-Darboux identity at degree ``n``."""
    if x == y:
        raise ValueError("x and y must differ")
    p = e.process
    qx = e.table(n + 1, x)
    qy = e.table(n + 1, y)
    pi = np.exp(log_potential(p, n + 1))
    lhs = float(np.sum(pi * qx[: n + 1] * qy[: n + 1]))
    rhs = p.lam(n) * pi[n] * (qx[n + 1] * qy[n] - qx[n] * qy[n + 1]) / (y - x)
    return _rel(lhs, float(rhs))


def cd_mixed_residual(e_primary: PolynomialEvaluator, e_assoc: PolynomialEvaluator,
                      n: int, x: float, y: float) -> float:
    """Relative residual of the identity linking primary and associated families."""
    p = e_primary.process
    qx = e_primary.table(n + 1, x)
    qy = e_assoc.table(n + 1, y)
    pi = np.exp(log_potential(p, n + 1))
    lhs = 1.0 - (x - y) * float(np.sum(pi * qx[: n + 1] * qy[: n + 1]))
    rhs = p.lam(n) * pi[n] * (qx[n + 1] * qy[n] - qx[n] * qy[n + 1])
    return _rel(lhs, float(rhs))
