"""Sparse-plus-low-rank precision decomposition, CPDAG search, and causal
effect enumeration under hidden confounding, with a synthetic benchmark."""

__version__ = "0.1.0"

from ._kernels import USING_NUMBA
from .errors import (
    CausalLrpsError,
    DegenerateK,
    DomainError,
    EmptyTruth,
    IllegalPenalty,
    InconsistentPdag,
    InsufficientSamples,
    MismatchedDims,
    NonPositiveDefiniteInput,
    NonPositiveResidualVariance,
    SingularSubmatrix,
    TooLarge,
)
from .ges import GesConfig, ScoredCpdag, bic_lambda, ges_backward, ges_forward, ges_run, local_score
from .graphs import (
    Dag,
    Pdag,
    d_separated,
    dag_to_cpdag,
    enumerate_class,
    from_edge_list_text,
    graph_degree,
    is_acyclic,
    meek_closure,
    pdag_to_dag,
    skeleton,
    to_edge_list_text,
)
from .ida import EffectSets, effect_matrix, possible_parent_sets, rank_pairs, total_effects
from .lrps import (
    AdmmConfig,
    LrpsProblem,
    LrpsSolution,
    kkt_residual,
    neg_log_likelihood,
    prox_logdet,
    prox_nuclear_semidef,
    prox_soft_threshold,
    solve_lrps,
)
from .matcore import (
    CovarianceEstimate,
    degree,
    entrywise_l1,
    fisher_h,
    incoherence,
    max_abs_norm,
    max_col_sum,
    max_row_sum,
    nnz_matrix,
    partial_correlation,
    sign_matrix,
    spectral_norm,
)
from .simsem import (
    LinearSem,
    SimDesign,
    implied_covariance,
    observed_covariance,
    precision_decomposition,
    random_sem,
    sample,
    true_total_effects,
)
from .tune_eval import (
    PrCurve,
    SelectionResult,
    covariance_from_data,
    cv_select_lrps,
    directed_pr,
    ebic_select_lrps,
    effect_ranking_pr,
    pca_regress_out,
    pipeline_lrps_ges,
    pr_at_fixed_recalls,
    random_baseline_band,
    skeleton_pr,
)
