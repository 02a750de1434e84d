"""Penalized sparse regression via MM surrogates, latent-variable lifting
checks, and spike-and-slab posterior-median thresholding, with a Monte Carlo
benchmark harness comparing the two routes to sparsity."""

from .exceptions import NumericalError
from .penalties import (ConcavityCheck, PenaltySpec, derivative_at_zero,
                        is_concave_on_grid, penalty_derivative, penalty_value)
from .solver import (Decomposition, FitResult, RegressionModel,
                     SurrogateProblem, decompose, default_start, iterate,
                     k_step, lla_surrogate, lqa_surrogate, solve_surrogate)
from .emlift import (ConcavityReport, EquivalenceReport, GridDensity,
                     NegExponential, PointMass, check_equivalence,
                     concavity_certificate, em_surrogate, latent_mean, mgf,
                     mgf_relative_error, tilted_mean, tilted_variance)
from .postmedian import (GridCdf, MedianResult, Normal, PosteriorMixture,
                         SpikeSlabPrior, analytic_median, bisection_median,
                         double_shrinkage_median, marginal_posterior,
                         posterior_odds, threshold_vector,
                         zero_odds_threshold)
from .bench import (ExperimentConfig, MetricsTable, MethodRow, RegressionData,
                    Scenario, classify_fit, fit_penalized,
                    fit_posterior_median, generate, mix_seed, model_error,
                    read_config, read_metrics_csv, run_experiment,
                    write_metrics_csv)

__version__ = "0.1.0"
