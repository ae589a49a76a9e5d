"""Generalized q-Gaussians, escort distributions, generalized Fisher
informations and the q-Cramér-Rao inequalities they satisfy."""
from .cramer_rao import (InequalityReport, QBiasCurve, check_barakin_vajda, check_corollary2,
                         check_location, check_standard, check_theorem1, equality_family_residual,
                         q_bias_curve)
from .deformed_calculus import DeformationParams, q_exponential, q_logarithm, q_product
from .densities import (GridDensity, QGaussianParams, escort_params, partition_function,
                        qgaussian_cdf, qgaussian_pdf, qgaussian_sample, tabulate)
from .errors import (AccuracyError, AccuracyWarning, DomainError, InfeasibleError,
                     ParameterError, QCramerError)
from .escort import escort_transform, generalized_moment, information_generating_function
from .estimators import (EstimationResult, ExperimentConfig, mel_location, mle_location,
                         mlq_entropy_interpretation, mlq_location, monte_carlo_experiment)
from .fisher import (DeformationFunction, LocationFamily, ParametricFamily, fisher_deformed,
                     fisher_location, fisher_location_escort, fisher_parametric, furuichi_fisher,
                     lutwak_phi)

__version__ = "0.1.0"
