"""Thompson sampling for bandits with skewed alpha-stable rewards.

Submodules: ``stable`` (characteristic function, sampler, stability
algebra), ``estimation`` (ECF fits), ``posterior`` (auxiliary-variable
Gibbs sampler for the location), ``policies``, ``env`` (synthetic and
replay environments, regret), ``experiment``/``harness`` (seeded runs)
and ``cli``.
"""

from .errors import (AlphaTSError, ConfigError, DataError, DegenerateInputError, EndOfData,
                     IllConditionedGridError, PoleError, ResampleY, UnwrapError)
from .stable import (StableParams, SymmetrizedTriple, Symmetrizer, char_fn, combine,
                     location_from_symmetrized, sample, symmetrize, symmetrize_weights,
                     symmetrized_values)
from .estimation import (DEFAULT_GRID, EcfGrid, FitReport, ecf, ecf_phase, estimate_all,
                         estimate_alpha_sigma, estimate_beta_mu, theta_from_params)
from .posterior import (AuxDensityParams, GibbsState, PriorSpec, conditional_y_logdensity,
                        gibbs_sweep, joint_density, posterior_draw, run_chain, sample_mu,
                        sample_y, stable_logpdf, t_fn)
from .policies import (ArmState, Policy, PolicyConfig, select_arm_greedy, select_arm_robust_ucb,
                       select_arm_ts_asym, select_arm_ts_sym, select_arm_ucb,
                       truncated_ucb_index, update)
from .env import (RegretCurve, RegretTrace, ReplayEnv, SyntheticEnv, bayes_regret,
                  record_regret, step, synth_env_from_prior)
from .experiment import env_rng, policy_rng, simulate

__version__ = "0.1.0"
