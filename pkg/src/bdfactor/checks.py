"""Residual checks for factorizations: reconstruction, Darboux row sums,
orthogonality of transformed families and closed vs recursive agreement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import factor_lu, factor_ul
from .errors import DomainError
from .examples import preset_measure
from .process import BirthDeathProcess, build_ladder, truncated_generator
from .spectral import christoffel_transform, geronimus_transform, m_minus_1, orthogonality_matrix

RECONSTRUCTION_TOL = 1e-9
ROW_SUM_TOL = 1e-9
ORTHOGONALITY_TOL = 1e-7
DUAL_PATH_TOL = 1e-10
ORTH_DEGREE = 10


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def to_dict(self) -> dict:
        return {"check": self.name, "residual": self.value, "tol": self.tol, "passed": self.passed}


def reconstruction_residual(p: BirthDeathProcess, first: np.ndarray, second: np.ndarray,
                            rows: int, relative: bool = False) -> float:
    """``max |A - first @ second|`` over rows ``0..rows-1``.

    Factors are square of size ``K``; the generator is truncated to ``K``.
    """
    k = first.shape[0]
    a = truncated_generator(p, k)
    res = np.max(np.abs(a[:rows] - (first @ second)[:rows]))
    return float(res / np.max(np.abs(a)) if relative else res)


def row_sum_residual(first: np.ndarray, second: np.ndarray, mu0_new: float, rows: int) -> float:
    """Row sums of the swapped product, which must be ``-mu0_new`` on row 0 and 0 elsewhere."""
    g = first @ second
    sums = g[:rows].sum(axis=1)
    sums[0] += mu0_new
    return float(np.max(np.abs(sums)))


def relative_difference(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    ok = np.isfinite(a) & np.isfinite(b)
    scale = np.maximum(np.maximum(np.abs(a[ok]), np.abs(b[ok])), np.finfo(float).tiny)
    return float(np.max(np.abs(a[ok] - b[ok]) / scale)) if ok.any() else 0.0


def _orthogonality(measure, family, darboux: BirthDeathProcess, N: int) -> float:
    n = min(ORTH_DEGREE, N - 2)
    return float(orthogonality_matrix(measure, family, build_ladder(darboux, n + 2), n).max())


def _measure_or_none(p: BirthDeathProcess):
    try:
        return preset_measure(p)
    except DomainError:
        return None


def lu_checks(p: BirthDeathProcess, mu0_hat: float, N: int, orthogonality: bool = True) -> list[Check]:
    f = factor_lu.lu_factorize(p, mu0_hat, N)
    g = factor_lu.lu_factorize_recursive(p, mu0_hat, N, at_bound=f.at_bound)
    out = [
        Check("reconstruction", reconstruction_residual(p, f.lower(), f.upper(), N, relative=True),
              RECONSTRUCTION_TOL),
        Check("row_sums", row_sum_residual(f.upper(), f.lower(), mu0_hat, N - 1), ROW_SUM_TOL),
        Check("dual_path", max(relative_difference(getattr(f, k), getattr(g, k))
                               for k in ("s_tilde", "r_tilde", "x_tilde", "y_tilde")), DUAL_PATH_TOL),
    ]
    m = _measure_or_none(p) if orthogonality else None
    if m is not None:
        mc = christoffel_transform(m, f.y_tilde[0])
        out.append(Check("orthogonality", _orthogonality(
            mc, factor_lu.LUTransformedFamily(f), factor_lu.darboux_process(f), N), ORTHOGONALITY_TOL))
    return out


def ul_checks(p: BirthDeathProcess, x0: float, mu0_tilde: float, N: int,
              orthogonality: bool = True) -> list[Check]:
    f = factor_ul.ul_factorize(p, x0, mu0_tilde, N)
    g = factor_ul.ul_factorize_recursive(p, x0, mu0_tilde, N, report=f.report)
    out = [
        Check("reconstruction", reconstruction_residual(p, f.upper(), f.lower(), N - 1),
              RECONSTRUCTION_TOL),
        Check("row_sums", row_sum_residual(f.lower(), f.upper(), mu0_tilde, N - 1), ROW_SUM_TOL),
        Check("dual_path", max(relative_difference(getattr(f, k), getattr(g, k))
                               for k in ("x", "y", "s", "r")), DUAL_PATH_TOL),
    ]
    m = _measure_or_none(p) if orthogonality else None
    if m is not None:
        mg, rep = geronimus_transform(m, f.y[0], m_minus_1(p))
        out.append(Check("geronimus_mass", max(0.0, -rep.mass_at_zero), 1e-12))
        out.append(Check("orthogonality", _orthogonality(
            mg, factor_ul.ULTransformedFamily(f), factor_ul.darboux_process(f), N), ORTHOGONALITY_TOL))
    return out


def measure_checks(p: BirthDeathProcess) -> list[Check]:
    """Orthogonality of the primary family against the closed-form measure."""
    from .polynomials import primary

    m = preset_measure(p)
    return [
        Check("total_mass", abs(m.total_mass() - 1.0), 1e-6),
        Check("orthogonality", float(orthogonality_matrix(
            m, primary(p), build_ladder(p, ORTH_DEGREE + 2), ORTH_DEGREE).max()), ORTHOGONALITY_TOL),
    ]
