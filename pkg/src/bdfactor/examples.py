"""Preset processes with closed-form spectral data and coefficient formulas.

Three families are provided: the M/M/1 queue (constant rates, optional
absorption ``mu0``), the M/M/inf queue (``lambda_n = lambda``,
``mu_n = n mu``) and the linear process (``lambda_n = (n + beta) lambda``,
``mu_n = n mu``).  The closed forms here are written independently of the
generic factorization code so they can serve as regression oracles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from . import special
from .errors import ConservativeRecurrentBlocked, DomainError
from .process import BirthDeathProcess, series_A
from .spectral import Density, DensityKind, SpectralMeasure, atom_series


class Family(str, Enum):
    MM1 = "mm1"
    MM_INF = "mm_inf"
    LINEAR = "linear"


def _positive(**kw):
    for k, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise DomainError(f"{k} must be positive and finite, got {v!r}")


def mm1(lam: float, mu: float, mu0: float = 0.0) -> BirthDeathProcess:
    """M/M/1 queue with constant rates and absorption ``mu0`` at state 0."""
    _positive(lam=lam, mu=mu)
    lam, mu = float(lam), float(mu)
    return BirthDeathProcess(lambda n: np.full(np.shape(n), lam),
                             lambda n: np.full(np.shape(n), mu), float(mu0),
                             f"mm1({lam:g},{mu:g},{float(mu0):g})",
                             meta={"preset": "mm1", "params": {"lambda": lam, "mu": mu, "mu0": float(mu0)}})


def mm_inf(lam: float, mu: float) -> BirthDeathProcess:
    """M/M/inf queue."""
    _positive(lam=lam, mu=mu)
    lam, mu = float(lam), float(mu)
    return BirthDeathProcess(lambda n: np.full(np.shape(n), lam),
                             lambda n: mu * np.asarray(n, dtype=float), 0.0,
                             f"mm_inf({lam:g},{mu:g})",
                             meta={"preset": "mm_inf", "params": {"lambda": lam, "mu": mu}})


def linear(lam: float, mu: float, beta: float) -> BirthDeathProcess:
    """Linear birth-death process; always conservative."""
    _positive(lam=lam, mu=mu, beta=beta)
    lam, mu, beta = float(lam), float(mu), float(beta)
    return BirthDeathProcess(lambda n: lam * (np.asarray(n, dtype=float) + beta),
                             lambda n: mu * np.asarray(n, dtype=float), 0.0,
                             f"linear({lam:g},{mu:g},{beta:g})",
                             meta={"preset": "linear", "params": {"lambda": lam, "mu": mu, "beta": beta}})


PRESETS = {
    "mm1": (mm1, ("lambda", "mu", "mu0")),
    "mm_inf": (mm_inf, ("lambda", "mu")),
    "linear": (linear, ("lambda", "mu", "beta")),
}


def make_preset(name: str, params: dict) -> BirthDeathProcess:
    """Build a preset from a name and a parameter dict keyed as in ``PRESETS``."""
    if name not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    ctor, keys = PRESETS[name]
    unknown = set(params) - set(keys)
    if unknown:
        raise DomainError(f"unknown parameters for {name}: {sorted(unknown)}")
    missing = [k for k in keys if k not in params and not (name == "mm1" and k == "mu0")]
    if missing:
        raise DomainError(f"missing parameters for {name}: {missing}")
    return ctor(*[float(params[k]) for k in keys if k in params])


def load_process_spec(spec) -> BirthDeathProcess:
    """Process from a JSON spec (path, JSON text or dict).

    Either ``{"preset": name, "params": {...}}`` or
    ``{"table": {"lambda": [...], "mu": [...], "mu0": x}}`` where
    ``mu[k]`` is the death rate of state ``k + 1``.
    """
    if isinstance(spec, (str, Path)):
        text = str(spec)
        if not text.lstrip().startswith("{"):
            text = Path(spec).read_text()
        spec = json.loads(text)
    if "preset" in spec:
        return make_preset(spec["preset"], spec.get("params", {}))
    if "table" in spec:
        t = spec["table"]
        return BirthDeathProcess.from_table(t["lambda"], t["mu"], float(t.get("mu0", 0.0)),
                                            label=spec.get("label", "table"))
    raise DomainError("process spec needs a 'preset' or a 'table' entry")


# spectral measures

def mm1_support(lam: float, mu: float) -> tuple[float, float]:
    return (math.sqrt(lam) - math.sqrt(mu)) ** 2, (math.sqrt(lam) + math.sqrt(mu)) ** 2


def mm1_atom(lam: float, mu: float, mu0: float) -> tuple[float, float] | None:
    """``(zeta, mass)`` of the discrete part, present iff ``lambda mu < (mu - mu0)^2``."""
    if lam * mu < (mu - mu0) ** 2:
        zeta = mu0 * (1.0 - lam / (mu - mu0))
        return zeta, 1.0 - lam * mu / (mu - mu0) ** 2
    return None


def mm1_measure(lam: float, mu: float, mu0: float = 0.0) -> SpectralMeasure:
    """Square-root density on ``[sigma_-, sigma_+]`` plus at most one atom."""
    _positive(lam=lam, mu=mu)
    a, b = mm1_support(lam, mu)

    def g(x):
        return 1.0 / (2.0 * math.pi * ((mu - mu0) * np.asarray(x, dtype=float)
                                       + mu0 * (lam - mu + mu0)))

    dens = Density(DensityKind.SQRT_ENDPOINTS, a, b, g)
    atom = mm1_atom(lam, mu, mu0)
    loc, mass = ([atom[0]], [atom[1]]) if atom else ([], [])
    return SpectralMeasure(np.array(loc), np.array(mass), dens,
                           {"preset": "mm1", "params": {"lambda": lam, "mu": mu, "mu0": mu0}})


def mm1_stieltjes(lam: float, mu: float, mu0: float, z: complex) -> complex:
    """``int dpsi(x) / (x - z)`` in closed form.

    The square root of ``(z - sigma_-)(z - sigma_+)`` is taken as the
    product of principal roots, which is analytic off the support and
    behaves like ``z`` at infinity, so ``z B(z) -> -1`` as ``z -> -inf``.
    """
    z = complex(z)
    a, b = mm1_support(lam, mu)
    if z.imag == 0.0 and z.real >= 0.0 and a <= z.real <= b:
        raise DomainError("z lies on the support")
    root = np.sqrt(z - a) * np.sqrt(z - b)
    num = lam - mu - z + 2.0 * mu0 + root
    den = 2.0 * ((mu - mu0) * z + mu0 * (lam - mu + mu0))
    return complex(num / den)


def mm_inf_measure(lam: float, mu: float) -> SpectralMeasure:
    """Poisson(``lambda/mu``) atoms at ``mu n``."""
    _positive(lam=lam, mu=mu)
    r = lam / mu
    loc, mass = atom_series(lambda n: mu * n, lambda n: -r + n * math.log(r) - gammaln(n + 1))
    return SpectralMeasure(loc, mass, None, {"preset": "mm_inf", "params": {"lambda": lam, "mu": mu}})


def linear_measure(lam: float, mu: float, beta: float) -> SpectralMeasure:
    """Negative binomial atoms (``lambda != mu``) or a Gamma density (``lambda = mu``)."""
    _positive(lam=lam, mu=mu, beta=beta)
    ref = {"preset": "linear", "params": {"lambda": lam, "mu": mu, "beta": beta}}
    if lam == mu:
        dens = Density(DensityKind.GAMMA, 0.0, math.inf, lambda x: np.ones_like(np.asarray(x, dtype=float)),
                       alpha=beta - 1.0, scale=lam, coef=math.exp(-gammaln(beta) - beta * math.log(lam)))
        return SpectralMeasure(np.zeros(0), np.zeros(0), dens, ref)
    r = min(lam, mu) / max(lam, mu)
    lead = beta * math.log1p(-r)

    def log_mass(n):
        return lead + gammaln(beta + n) - gammaln(beta) - gammaln(n + 1) + n * math.log(r)

    if lam < mu:
        loc_fn = lambda n: (mu - lam) * n  # noqa: E731
    else:
        loc_fn = lambda n: (lam - mu) * (n + beta)  # noqa: E731
    loc, mass = atom_series(loc_fn, log_mass)
    return SpectralMeasure(loc, mass, None, ref)


def preset_measure(p: BirthDeathProcess) -> SpectralMeasure:
    """Spectral measure of a preset-built process."""
    name = p.meta.get("preset")
    prm = p.meta.get("params", {})
    if name == "mm1":
        return mm1_measure(prm["lambda"], prm["mu"], prm["mu0"])
    if name == "mm_inf":
        return mm_inf_measure(prm["lambda"], prm["mu"])
    if name == "linear":
        return linear_measure(prm["lambda"], prm["mu"], prm["beta"])
    raise DomainError("no closed-form measure for this process")


def measure_from_dict(d: dict) -> SpectralMeasure:
    """Rebuild a measure serialized by ``SpectralMeasure.to_dict``."""
    from .spectral import christoffel_transform, geronimus_transform

    ref = d["ref"]
    if "preset" in ref:
        return preset_measure(make_preset(ref["preset"], ref["params"]))
    inner = measure_from_dict({"ref": ref["of"]})
    if ref["transform"] == "christoffel":
        return christoffel_transform(inner, ref["y0_tilde"])
    return geronimus_transform(inner, ref["y0"], ref["m_minus_1"])[0]


# polynomial identifications

def mm1_poly_closed(lam: float, mu: float, mu0: float, n: int, x):
    """Chebyshev-U form of ``Q_n(x)`` for the M/M/1 queue."""
    y = (lam + mu - np.asarray(x, dtype=float)) / (2.0 * math.sqrt(lam * mu))
    return (mu / lam) ** (n / 2) * (special.chebyshev_u(n, y) + (mu0 - mu) / lam
                                    * math.sqrt(lam / mu) * special.chebyshev_u(n - 1, y))


def mm1_perturbed_chebyshev(lam: float, mu: float, n: int, x):
    """UL Darboux polynomials for ``mu0 = mu0_tilde = 0`` and ``x0 = lambda - mu``."""
    y = (lam + mu - np.asarray(x, dtype=float)) / (2.0 * math.sqrt(lam * mu))
    return (mu / lam) ** (n / 2) / (lam - mu) * (
        -2.0 * mu * special.chebyshev_t(n, y) + (lam + mu) * special.chebyshev_u(n, y)
        - 2.0 * math.sqrt(lam * mu) * special.chebyshev_u(n - 1, y))


def mm_inf_poly_closed(lam: float, mu: float, n: int, x):
    return special.charlier(n, np.asarray(x, dtype=float) / mu, lam / mu)


def linear_poly_closed(lam: float, mu: float, beta: float, n: int, x):
    """Meixner (``lambda != mu``) or Laguerre (``lambda = mu``) form of ``Q_n(x)``."""
    x = np.asarray(x, dtype=float)
    if lam < mu:
        return special.meixner(n, x / (mu - lam), beta, lam / mu)
    if lam > mu:
        return (mu / lam) ** n * special.meixner(n, x / (lam - mu) - beta, beta, mu / lam)
    scale = math.exp(gammaln(n + 1) - gammaln(beta + n) + gammaln(beta))
    return scale * special.laguerre(n, beta - 1.0, x / lam)


# closed-form coefficients and rates

def mm1_lu_rates_closed(lam: float, mu: float, n: int) -> tuple[float, float]:
    """``(lambda_hat_n, mu_hat_{n+1})`` for ``mu0 = mu0_hat = 0``, ``lambda != mu``."""
    if lam == mu:
        raise DomainError("closed form needs lambda != mu")
    lh = (lam ** (n + 2) - mu ** (n + 2)) / (lam ** (n + 1) - mu ** (n + 1))
    mh = lam * mu * (lam ** (n + 1) - mu ** (n + 1)) / (lam ** (n + 2) - mu ** (n + 2))
    return lh, mh


def mm1_lu_s_closed(lam: float, mu: float, mu0_hat: float, n: int) -> float:
    """``s_tilde_n`` for ``mu0 = mu - lambda > 0``."""
    return (mu ** (n + 1) - lam ** (n + 1) - mu0_hat * (mu ** n - lam ** n)) / ((mu - lam) * lam ** n)


def mm_inf_lu_rates_closed(lam: float, mu: float, n: int, variant: str = "mu0hat_zero"
                           ) -> tuple[float, float]:
    """``(lambda_hat_n, mu_hat_{n+1})`` from incomplete Gamma ratios.

    ``variant`` is ``"mu0hat_zero"`` (upper incomplete Gamma) or
    ``"mu0hat_max"`` (lower incomplete Gamma, ``mu0_hat = lambda/(1 - e^{-lambda/mu})``).
    """
    a = lam / mu
    if variant == "mu0hat_zero":
        g = special.upper_inc_gamma
    elif variant == "mu0hat_max":
        g = special.lower_inc_gamma
    else:
        raise DomainError(f"unknown variant {variant!r}")
    g1, g2 = g(n + 1, a), g(n + 2, a)
    return mu * g2 / g1, lam * (n + 1) * g1 / g2


def mm_inf_lu_bound(lam: float, mu: float) -> float:
    return lam / -math.expm1(-lam / mu)


@dataclass(frozen=True)
class LUCoefficients:
    s: float
    r: float
    x: float
    y: float


def linear_lu_bound(lam: float, mu: float, beta: float) -> float:
    if lam < mu:
        return lam * beta / -math.expm1(beta * math.log1p(-lam / mu))
    return lam * beta


def _inv_pi_linear(lam, mu, beta, n):
    return math.exp(gammaln(n + 1) - gammaln(beta + n) + gammaln(beta) + n * math.log(mu / lam))


def linear_lu_coeffs_closed(lam: float, mu: float, beta: float, mu0_hat: float, n: int
                            ) -> LUCoefficients:
    """LU coefficients of the linear process in closed form.

    ``lambda < mu`` uses incomplete Beta functions (the complementary form
    above ``mu0_hat = lambda beta`` to avoid cancellation), ``lambda > mu``
    uses terminating 2F1 sums, ``lambda = mu`` the rational form.
    """
    c = mu0_hat / (lam * beta)
    inv = _inv_pi_linear(lam, mu, beta, n)
    if lam < mu:
        z = 1.0 - lam / mu
        pre = (mu / lam) ** n * z ** (-beta)
        if c <= 1.0:
            s = c * inv + (1 - c) * (n + beta) * pre * special.inc_beta(z, beta, n + 1)
            r = -c * inv - (1 - c) * n * pre * special.inc_beta(z, beta, n) if n >= 1 else math.nan
        else:
            K = c - (c - 1.0) * z ** (-beta)
            s = K * inv + (c - 1) * (n + beta) * pre * special.inc_beta_complement(z, beta, n + 1)
            r = (-K * inv - (c - 1) * n * pre * special.inc_beta_complement(z, beta, n)
                 if n >= 1 else math.nan)
    elif lam > mu:
        z = mu / lam
        s = c * inv + (1 - c) * special.gauss_2f1(1, -n, 1 - beta - n, z)
        r = (-c * inv - (1 - c) * mu * n / (lam * (n + beta - 1))
             * special.gauss_2f1(1, -n + 1, 2 - beta - n, z) if n >= 1 else math.nan)
    else:
        s = c * inv + (1 - c) * (1 + n / beta)
        r = -c * inv - (1 - c) * n / beta if n >= 1 else math.nan
    x = lam * (n + beta) / s
    return LUCoefficients(s, r, x, -x)


def mm1_ul_closed(lam: float, mu: float, x0: float, n: int) -> dict:
    """UL coefficients and rates for ``mu0 = mu0_tilde = 0``, ``lambda > mu``."""
    geo = lambda k: (lam ** k - mu ** k) / (lam - mu)  # noqa: E731
    x = x0 * mu ** n / (lam ** n - x0 * geo(n))
    out = {"x": x, "y": -x}
    if n >= 1:
        out["s"] = lam ** n / (x0 * mu ** (n - 1)) - lam * geo(n - 1) / mu ** (n - 1)
        out["r"] = -lam ** n / (x0 * mu ** (n - 1)) + geo(n) / mu ** (n - 1)
        out["lambda_tilde"] = (lam * mu * (lam ** (n - 1) * (lam - mu) - x0 * (lam ** (n - 1) - mu ** (n - 1)))
                               / (lam ** n * (lam - mu) - x0 * (lam ** n - mu ** n)))
    else:
        out["lambda_tilde"] = x0
    out["mu_tilde_next"] = ((lam ** (n + 1) * (lam - mu) - x0 * (lam ** (n + 1) - mu ** (n + 1)))
                            / (lam ** n * (lam - mu) - x0 * (lam ** n - mu ** n)))
    return out


def linear_equal_ul_x_closed(lam: float, beta: float, mu0_tilde: float, n: int) -> float:
    """``x_n`` for ``lambda = mu``, ``beta > 2`` and ``x0 + mu0_tilde = lambda (beta - 1)``."""
    ratio = math.exp(gammaln(n + 2) - gammaln(beta + n) + gammaln(beta))
    return lam * (beta - 1) - mu0_tilde / (beta - 2) * (beta - 1 - ratio)


def linear_A_closed(lam: float, mu: float, beta: float) -> float:
    """``A = 2F1(1, 1; beta + 1; mu/lambda) / (lambda beta)`` for ``lambda > mu``."""
    if lam > mu:
        return special.gauss_2f1(1.0, 1.0, beta + 1.0, mu / lam) / (lam * beta)
    if lam == mu and beta > 1:
        return 1.0 / (lam * (beta - 1.0))
    return math.inf


def linear_B_closed(lam: float, mu: float, beta: float) -> float:
    return (1.0 - lam / mu) ** (-beta) if lam < mu else math.inf


def linear_dilog_bound(lam: float, mu: float) -> float:
    """``1/(A T)`` for ``beta = 1``, ``lambda > mu``.

    ``2 (lambda - mu) L / (L^2 + 2 Li_2(mu/(mu - lambda)))`` with
    ``L = log(1 - mu/lambda)``.
    """
    if not lam > mu:
        raise DomainError("needs lambda > mu")
    L = math.log1p(-mu / lam)
    return 2.0 * (lam - mu) * L / (L * L + 2.0 * special.dilog(mu / (mu - lam)))


def linear_ul_case_report(lam: float, mu: float, beta: float) -> dict:
    """Admissible UL parameter ranges for the linear process.

    The numeric ``T`` comes from the generic admissibility routine at
    ``x0 + mu0_tilde = 1/A``; closed forms are attached where known.
    """
    from .factor_ul import ul_admissibility

    p = linear(lam, mu, beta)
    out: dict = {"lambda": lam, "mu": mu, "beta": beta}
    a = series_A(p)
    if not a.finite:
        out.update(case="Blocked", reason=ConservativeRecurrentBlocked().reason)
        return out
    c_max = 1.0 / a.value
    rep = ul_admissibility(p, c_max, 0.0)
    out["x0_plus_mu0_tilde_max"] = c_max
    out["T"] = rep.T.value if rep.T.finite else math.inf
    if rep.T.finite:
        out.update(case="TFinite", mu0_tilde_max=c_max / rep.T.value)
    else:
        out.update(case="TInfinite", mu0_tilde_max=0.0)
    if lam == mu:
        out["closed_form"] = {"x0_plus_mu0_tilde_max": lam * (beta - 1),
                              "T": (beta - 1) / (beta - 2) if beta > 2 else math.inf,
                              "mu0_tilde_max": lam * (beta - 2) if beta > 2 else 0.0}
    elif beta == 1.0:
        out["closed_form"] = {"x0_plus_mu0_tilde_max": 1.0 / linear_A_closed(lam, mu, beta),
                              "mu0_tilde_max": linear_dilog_bound(lam, mu)}
    return out
