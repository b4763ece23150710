"""Prefiltered least squares identification of linear dynamical systems."""

from .analysis import (MConstants, MonicPolynomial, NotStronglyObservable,
                       PhaseRankCertificate, PhaseRankNotFound, SingularS,
                       check_phase_rank, eval_Hf, filter_from_poly,
                       gramian_sum_opnorm, k1, k2, m_constants,
                       minimal_polynomial, opt_bracket, opt_hat, phase_rank,
                       poly_from_witnesses, strong_obs_filter)
from .bench import (EstimatorSpec, ExperimentConfig, ResultRow, cmd_lowerbound,
                    preset_system, run_sweep)
from .estimators import (IndexUnderflow, RankDeficient, RegressionData,
                         SelectLResult, build_regression_data,
                         check_conditioning, fixed_filter_estimate, ols, pfls,
                         residuals, ridge, ridge_filter, select_L)
from .filters import Filter
from .lti import (AdversarialBounded, JordanSpec, MarkovMatrix, NoiseModel,
                  NoNoise, NonRealCoefficients, SpectralRadiusNotStrictlyStable,
                  StateSpace, StochasticGaussian, Trajectory, c_phi, h2op_norm,
                  hinf_norm, jordan_matrix, markov_params, mk_opnorm,
                  phi_systems, simulate, spectral_radius, validate_jordan_spec)
from .realization import (HankelPair, InsufficientMarkovLength, RankGap,
                          hankel, ho_kalman, minimality_check,
                          realization_error)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
