"""Spectral measures of birth-death generators and the Darboux measure maps.

A measure is a finite list of atoms plus an optional density.  The LU
Darboux step maps the measure by ``x psi / (-y0_tilde)`` (Christoffel) and
the UL step by ``-y0 psi / x + M delta_0`` (Geronimus).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import roots_genlaguerre

from .errors import DivergentMoment, DomainError, Inadmissible
from .process import BirthDeathProcess, LogWeightLadder, series_A

log = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-6
GERONIMUS_MASS_TOL = 1e-12
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12
_LAGUERRE_NODES = 160


class DensityKind(str, Enum):
    """Quadrature hint.

    ``SQRT_ENDPOINTS``: ``f`` vanishes like a square root at both ends of
    a finite support, ``f = g(x) sqrt((x-a)(b-x))`` with ``g`` smooth.
    ``GAMMA``: ``f = coef * x^alpha * exp(-x/scale) * g(x)`` on ``[0, inf)``.
    """

    SQRT_ENDPOINTS = "sqrt-endpoints"
    GAMMA = "gamma"


@dataclass(frozen=True)
class Density:
    """Absolutely continuous part ``f(x)`` on ``[a, b]``.

    For ``GAMMA`` densities ``alpha``, ``scale`` and ``coef`` describe the
    weight and ``g`` the remaining smooth factor; for ``SQRT_ENDPOINTS``
    ``g`` multiplies ``sqrt((x-a)(b-x))``.
    """

    kind: DensityKind
    a: float
    b: float
    g: Callable[[np.ndarray], np.ndarray]
    alpha: float = 0.0
    scale: float = 1.0
    coef: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.a) & (x <= self.b)
        xc = np.where(inside, x, self.a if self.kind is DensityKind.SQRT_ENDPOINTS else 1.0)
        if self.kind is DensityKind.SQRT_ENDPOINTS:
            w = np.sqrt(np.maximum((xc - self.a) * (self.b - xc), 0.0))
        else:
            w = self.coef * xc**self.alpha * np.exp(-xc / self.scale)
        return np.where(inside, w * self.g(xc), 0.0)

    def scaled(self, factor: Callable[[np.ndarray], np.ndarray], power: int = 0,
               const: float = 1.0) -> "Density":
        """Density times ``const * x^power * factor(x)``; powers go into ``alpha`` for Gamma kind."""
        g = self.g
        if self.kind is DensityKind.GAMMA:
            return replace(self, g=lambda x: g(x) * factor(x), alpha=self.alpha + power,
                           coef=self.coef * const)
        return replace(self, g=lambda x: const * np.asarray(x, dtype=float) ** power * g(x) * factor(x))

    def integrate(self, h: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """``int h(x) f(x) dx`` for a vector-valued ``h`` (last axis is ``x``)."""
        if self.kind is DensityKind.GAMMA:
            t, w = _laguerre_rule(self.alpha)
            x = self.scale * t
            vals = np.asarray(h(x)) * self.g(x)
            return self.coef * self.scale ** (self.alpha + 1.0) * (vals @ w)
        a, b = self.a, self.b
        width = b - a

        def integrand(theta):
            s, c = math.sin(theta), math.cos(theta)
            x = np.array([a + width * s * s])
            jac = 2.0 * width * width * (s * c) ** 2
            return np.asarray(h(x))[..., 0] * self.g(x)[0] * jac

        val, _ = integrate.quad_vec(integrand, 0.0, math.pi / 2, epsabs=QUAD_EPSABS,
                                    epsrel=QUAD_EPSREL, limit=400)
        return np.asarray(val)


@lru_cache(maxsize=32)
def _laguerre_rule(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    t, w = roots_genlaguerre(_LAGUERRE_NODES, alpha)
    return t, w


def _ones(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SpectralMeasure:
    """Atoms ``(atom_loc[i], atom_mass[i])`` plus an optional density."""

    atom_loc: np.ndarray
    atom_mass: np.ndarray
    density: Density | None = None
    ref: dict = field(default_factory=dict)
    total_mass_hint: float = 1.0

    def __post_init__(self):
        loc = np.asarray(self.atom_loc, dtype=float)
        mass = np.asarray(self.atom_mass, dtype=float)
        object.__setattr__(self, "atom_loc", loc)
        object.__setattr__(self, "atom_mass", mass)
        if loc.shape != mass.shape:
            raise ValueError("atom locations and masses differ in length")
        if np.any(loc < 0):
            raise DomainError("atoms must lie in [0, inf)")
        if len(np.unique(loc)) != len(loc):
            raise ValueError("atom locations must be distinct")

    def integrate(self, h: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """``int h dpsi`` for vector-valued ``h`` whose last axis indexes ``x``."""
        total = 0.0
        if len(self.atom_loc):
            total = np.asarray(h(self.atom_loc)) @ self.atom_mass
        if self.density is not None:
            total = total + self.density.integrate(h)
        return np.asarray(total)

    def total_mass(self) -> float:
        return float(self.integrate(_ones))

    def check_normalized(self, tol: float = NORMALIZATION_TOL) -> "SpectralMeasure":
        m = self.total_mass()
        if abs(m - 1.0) > tol:
            raise DomainError(f"measure has total mass {m!r}, expected 1")
        return self

    def to_dict(self) -> dict:
        return {
            "atoms": [[float(a), float(m)] for a, m in zip(self.atom_loc, self.atom_mass)],
            "density": None if self.density is None else {
                "kind": self.density.kind.value,
                "support": [self.density.a, self.density.b if math.isfinite(self.density.b) else "inf"],
            },
            "ref": self.ref,
        }


def atom_series(loc_fn, log_mass_fn, floor: float = 1e-300, max_atoms: int = 100_000):
    """Materialize atoms ``n = 0, 1, ...`` until the mass drops below ``floor`` past the mode."""
    locs, masses = [], []
    peak = -np.inf
    for n in range(max_atoms):
        lm = log_mass_fn(n)
        peak = max(peak, lm)
        if lm < math.log(floor) and lm < peak:
            break
        locs.append(loc_fn(n))
        masses.append(math.exp(lm))
    return np.array(locs), np.array(masses)


class TransformKind(str, Enum):
    CHRISTOFFEL = "Christoffel"
    GERONIMUS = "Geronimus"


@dataclass(frozen=True)
class MeasureTransformReport:
    kind: TransformKind
    scale: float
    mass_at_zero: float = math.nan
    m_minus_1: float = math.nan

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "scale": self.scale,
                "mass_at_zero": self.mass_at_zero, "m_minus_1": self.m_minus_1}


def christoffel_transform(m: SpectralMeasure, y0_tilde: float) -> SpectralMeasure:
    """``x psi(x) / (-y0_tilde)``; an atom at zero disappears."""
    if not y0_tilde < 0:
        raise DomainError("y0_tilde must be negative")
    k = -1.0 / y0_tilde
    keep = m.atom_loc > 0
    loc = m.atom_loc[keep]
    mass = m.atom_mass[keep] * loc * k
    dens = None if m.density is None else m.density.scaled(_ones, power=1, const=k)
    ref = {"transform": "christoffel", "y0_tilde": y0_tilde, "of": m.ref}
    return SpectralMeasure(loc, mass, dens, ref)


def moment(m: SpectralMeasure, k: int) -> float:
    """``int x^k dpsi`` for ``k >= -1``."""
    if k < -1:
        raise DomainError("moments are defined here for k >= -1")
    if k == -1:
        if np.any(m.atom_loc == 0):
            raise DivergentMoment("atom at 0 makes m_{-1} infinite")
        d = m.density
        if d is not None and d.a == 0.0:
            if d.kind is DensityKind.GAMMA and d.alpha - 1.0 <= -1.0:
                raise DivergentMoment("density is not integrable against 1/x at 0")
            if d.kind is DensityKind.SQRT_ENDPOINTS:
                eps = 1e-10 * d.b
                lo, hi = float(d(np.array([eps / 4]))[0]), float(d(np.array([eps]))[0])
                if lo > 0 and hi > 0 and math.log(hi / lo) / math.log(4.0) - 1.0 <= -1.0 + 1e-3:
                    raise DivergentMoment("density is not integrable against 1/x at 0")
    val = float(m.integrate(lambda x: np.asarray(x, dtype=float) ** k))
    if not math.isfinite(val):
        raise DivergentMoment(f"moment of order {k} is not finite")
    return val


def m_minus_1(p: BirthDeathProcess) -> float:
    """``int dpsi / x = A / (1 + mu0 A)``, or ``1/mu0`` when ``A`` diverges."""
    a = series_A(p)
    if a.finite:
        return a.value / (1.0 + p.mu0 * a.value)
    if p.mu0 > 0:
        return 1.0 / p.mu0
    raise DivergentMoment("mu0 = 0 and A diverges, so m_{-1} is infinite")


def geronimus_transform(m: SpectralMeasure, y0: float, m_minus_1: float
                        ) -> tuple[SpectralMeasure, MeasureTransformReport]:
    """``-y0 psi(x) / x + M delta_0`` with ``M = 1 + y0 m_{-1}``."""
    if not y0 < 0:
        raise DomainError("y0 must be negative")
    if not math.isfinite(m_minus_1):
        raise DivergentMoment("m_{-1} is infinite")
    if np.any(m.atom_loc == 0):
        raise DivergentMoment("atom at 0 makes m_{-1} infinite")
    M = 1.0 + y0 * m_minus_1
    if M < -GERONIMUS_MASS_TOL:
        raise Inadmissible(f"Geronimus mass at zero is negative ({M!r})")
    k = -y0
    loc = m.atom_loc
    mass = m.atom_mass * k / loc
    if M > GERONIMUS_MASS_TOL:
        loc = np.concatenate([[0.0], loc])
        mass = np.concatenate([[M], mass])
    dens = None if m.density is None else m.density.scaled(_ones, power=-1, const=k)
    ref = {"transform": "geronimus", "y0": y0, "m_minus_1": m_minus_1, "of": m.ref}
    rep = MeasureTransformReport(TransformKind.GERONIMUS, k, M, m_minus_1)
    return SpectralMeasure(loc, mass, dens, ref), rep


def christoffel_report(y0_tilde: float) -> MeasureTransformReport:
    return MeasureTransformReport(TransformKind.CHRISTOFFEL, -1.0 / y0_tilde)


def _poly_pair_integrand(e, n_max: int, weight=None):
    def h(x):
        q = e.table(n_max, x)
        out = q[:, None, :] * q[None, :, :]
        if weight is not None:
            out = out * weight(x)
        return out.reshape((n_max + 1) ** 2, -1)

    return h


def gram_matrix(m: SpectralMeasure, e, n_max: int, weight=None) -> np.ndarray:
    """``G[i, j] = int Q_i Q_j w dpsi`` for ``i, j <= n_max``."""
    vals = m.integrate(_poly_pair_integrand(e, n_max, weight))
    return np.asarray(vals).reshape(n_max + 1, n_max + 1)


def orthogonality_matrix(m: SpectralMeasure, e, ladder: LogWeightLadder, n_max: int) -> np.ndarray:
    """``|pi_j int Q_i Q_j dpsi - delta_ij|`` for ``i, j <= n_max``."""
    g = gram_matrix(m, e, n_max)
    pi = ladder.pi()[: n_max + 1]
    return np.abs(g * pi[None, :] - np.eye(n_max + 1))


def orthogonality_residual(m: SpectralMeasure, e, ladder: LogWeightLadder, i: int, j: int) -> float:
    """``|pi_j int Q_i Q_j dpsi - delta_ij|``."""
    if max(i, j) > 30:
        raise DomainError("orthogonality is checked for degrees up to 30")
    return float(orthogonality_matrix(m, e, ladder, max(i, j))[i, j])


def km_transition(m: SpectralMeasure, e, ladder: LogWeightLadder, i: int, j: int, t: float) -> float:
    """``P_ij(t) = pi_j int exp(-x t) Q_i(x) Q_j(x) dpsi(x)``, clamped to ``[0, 1]``."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    n = max(i, j)

    def h(x):
        q = e.table(n, x)
        return (np.exp(-np.asarray(x) * t) * q[i] * q[j])[None, :]

    val = float(m.integrate(h)[0]) * float(ladder.pi()[j])
    if val < 0.0 or val > 1.0:
        log.info("km_transition clamped %r to [0, 1] (i=%d, j=%d, t=%g)", val, i, j, t)
        val = min(max(val, 0.0), 1.0)
    return val
