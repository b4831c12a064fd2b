"""Surrogate-accelerated MCMC for Gaussian process regression hyperparameters.

Exact hyperparameter posteriors cost a Cholesky factorization of the n x n
covariance matrix per evaluation.  This package accelerates exact sampling
by routing most of the work through cheap surrogate posteriors (subset of
data, Nystrom, eigen truncation) while keeping the exact posterior as the
invariant distribution, via two schemes: mapping the state to a marked chain
whose dynamics target the surrogate, and tempered transitions through a
ladder of surrogates.  A benchmark harness measures efficiency as
autocorrelation time times CPU time per iteration.
"""

from .approximations import (SurrogateSpec, build_eigen_exact, build_nystrom,
                             build_sod, build_surrogate, choose_subset,
                             nystrom_spectral)
from .diagnostics import (ChainTrace, EfficiencyReport, acf, act_estimate,
                          efficiency_report, report_to_csv, report_to_text)
from .exact import (CholFactor, LogDensity, build_exact_posterior,
                    cholesky_spd, exact_log_posterior, gaussian_loglik,
                    mc_predictive, predictive_fixed_theta)
from .harness import (DatasetSpec, LadderLevelSpec, MethodSpec, RunConfig,
                      compare_methods, gen_synthetic, read_dataset,
                      read_trace, run_experiment, write_dataset, write_trace)
from .lowrank import LowRankPlusDiag, log_density, log_det, quad_form
from .mapchain import (MapChainConfig, MarkedChain, map_to_chain,
                       mapchain_transition, mark_log_ratio, move_mark)
from .model import (Dataset, Hyperparams, PriorSpec, build_cov_matrix,
                    kernel_eval, kernel_matrix, log_prior, sq_dists)
from .slice_sampler import SliceConfig, slice_update_coord, sweep
from .tempered import (Ladder, LadderLevel, flip_log_acceptance,
                       ladder_validate, tempered_transition)

__version__ = "0.1.0"
