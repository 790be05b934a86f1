"""Trust-region variance-reduced policy optimization toolkit.

Thin python surface over the C++ core: policies, toy environments, rollout
collection, gradient estimators (full / minibatch / SVRG), the trust-region
Newton-CG training loop, and the experiment harness.
"""

from ._core import (
    Algorithm,
    AnchorGradientCache,
    ArgumentError,
    CgConfig,
    ConfigError,
    DivergenceError,
    Env,
    EnvState,
    EstimatorKind,
    ExperimentConfig,
    ExperimentSummary,
    FormatError,
    GaussianMlpPolicy,
    GradientEstimate,
    IoError,
    IterationRecord,
    LinearBaseline,
    LineSearchConfig,
    NumericalError,
    PolicyArchitecture,
    Rng,
    SeedSummary,
    StepOutcome,
    StepResult,
    SurrogateBatch,
    SvrpoConfig,
    TrainResult,
    Trajectory,
    Transition,
    UsageError,
    ablation_nofisher_train,
    ablation_sgd_train,
    algorithm_from_name,
    algorithm_name,
    build_batch,
    checkpoint_policy,
    collect,
    conjugate_gradient,
    csv_header,
    discounted_returns,
    fisher_vector_product,
    fit_baseline,
    full_gradient,
    gaussian_sample,
    importance_ratio,
    kl,
    make_env,
    minibatch_gradient,
    natural_step,
    per_sample_grad,
    restore_policy,
    run_experiment,
    surrogate_value,
    svrg_gradient,
    svrpo_train,
    train,
    trpo_train,
)

__version__ = "0.1.0"
