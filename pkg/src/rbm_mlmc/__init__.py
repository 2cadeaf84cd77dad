"""Steady-state expectations of reflected Brownian motion, estimated by a
two-parameter multilevel Monte Carlo scheme with near-linear cost in the
dimension, measured in consumed Gaussian variates."""

from .errors import (AlignmentError, AssumptionError, FactorizationError,
                     InsufficientDataError, LcpConvergenceError, LcpSubmatrixError,
                     ParameterError, RbmMlmcError)
from .harness import (ComplexityFit, ExperimentPlan, ExperimentRecord, MseSummary,
                      complexity_fit, load_records, mse_study, plan_from_file, run_plan)
from .mlmc import (EstimatorOutput, Hyperparams, LevelSample, LevelStats, MLMCConfig,
                   estimate, expected_seeds_per_sample, from_hyperparams, hyperparams,
                   level_distribution, make_payoff, sample_once, xi1_lower_bound)
from .params import (AssumptionReport, NetworkParams, UniformityConstants,
                     build_symmetric, check_assumptions, cholesky_factor, load_network,
                     require_assumptions, steady_state_truth, symmetric_constants)
from .paths import (GridPath, SeedCounter, apply_drift_diffusion, dump_path,
                    inverse_gamma, load_path, restrict_to_coarse, sample_fine_path,
                    window)
from .skorokhod import (LcpSolution, ReflectedPath, lipschitz_gap, reflect_path,
                        reflect_terminal, solve_lcp)

__version__ = "0.1.0"
