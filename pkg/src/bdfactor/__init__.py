"""Birth-death processes: LU/UL factorizations of the generator, Darboux
transforms, spectral measures and Monte Carlo checks."""

from .errors import (BDError, ConservativeRecurrentBlocked, DivergentMoment, DomainError,
                     Inadmissible, InadmissibleMu0Hat, InvalidRates, NonHarmonic,
                     RateTableExhausted, RuntimeCap, TooFewAccepted, UndeterminedSeries)
from .series import SeriesKind, SeriesVerdict, sum_log_series
from .process import (BirthDeathProcess, Classification, Regime, build_ladder, classify,
                      doob_transform, q_at_zero, q_at_zero_table, series_A, series_B, series_S,
                      truncated_generator)
from .polynomials import PolynomialEvaluator, PolyKind, associated, primary
from .factor_lu import (LUFactors, LUTransformedFamily, lu_admissible_upper_bound, lu_bound,
                        lu_darboux, lu_factorize, lu_factorize_recursive)
from .factor_ul import (ULAdmissibility, ULFactors, ULTransformedFamily, ul_admissibility,
                        ul_darboux, ul_factorize, ul_factorize_recursive)
from .spectral import (SpectralMeasure, christoffel_transform, geronimus_transform, km_transition,
                       m_minus_1, orthogonality_matrix, orthogonality_residual)
from .examples import linear, load_process_spec, make_preset, mm1, mm_inf, preset_measure
from .montecarlo import (SimulationEstimate, estimate_absorption_prob, estimate_conditional_hitting,
                         estimate_extinction_prob, estimate_hitting_mean, estimate_occupation_time,
                         sample_path)

__version__ = "0.1.0"
