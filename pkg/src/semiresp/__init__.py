"""Semiparametric response-model estimation for nonignorable nonresponse.

The response probability is modeled as expit{g(x1) - gamma y} with g fully
nonparametric; profiling g at each trial gamma reduces estimation to a
one-dimensional problem.  The package provides the profile/calibration
estimators of gamma, three estimators of the outcome mean, sandwich-variance
Wald intervals, generators for the built-in simulation designs, and a
replicated Monte Carlo study runner with a CLI.
"""

from .data import (Dataset, Observation, VariableKind, Violation, continuous,
                   discrete, from_arrays, load_csv, respondent_split, validate,
                   write_csv)
from .errors import (BandwidthSelectionFailed, ConfigError, DegenerateWindow,
                     EmptyCell, EstimationError, MaxIterations,
                     NearSingularJacobian, NoSignChange, SemirespError,
                     SingularDesign)
from .gamma import (ESTIMATOR_IDS, EstimationContext, GammaSolveResult,
                    MomentFunction, calibration_residual, instrument_moments,
                    m_ca1, m_ca2, moment_from_values, score_residual,
                    solve_em_p_mle, solve_gamma, solve_p_ca1, solve_p_ca2,
                    solve_p_gmm, solve_p_score)
from .inference import (EstimateReport, estimate_reports, variance_gamma,
                        variance_mu, wald_ci)
from .mu import MU_ESTIMATOR_IDS, MuEstimate, estimate_mu, mu_db, mu_ipw, mu_mp
from .outcome import (DesignSpec, FractionalSample, OutcomeWorkingModel,
                      WorkingEngine, analytic_tilted_moments, draw_fractional,
                      fi_tilted_expectation, fit_working_model)
from .profile import (ProfiledResponseModel, ProfileEngine, TiltedExpectation,
                      fit_profile_g, profile_pi, tilted_e0)
from .simulation import (DgpSpec, ImposeModel, SimulationReport, StudyConfig,
                         gen_discrete, gen_mixed, impose_missingness,
                         mixed_population_summary, run_study)
from .smoothing import (Bandwidth, CellMeanSmoother, KernelMeanSmoother,
                        fit_cell_mean, fit_kernel_mean, select_bandwidth_cv,
                        silverman_bandwidth)

__version__ = "0.1.0"
