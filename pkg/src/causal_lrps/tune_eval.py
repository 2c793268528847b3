"""Tuning-parameter selection, evaluation metrics and baselines.

Selection: five-fold cross-validation on held-out Gaussian likelihood, or
(extended) BIC, over an (eta, gamma) grid for the decomposition stage;
plain BIC for the search stage. Metrics: skeleton and directed-edge
precision/recall (with half credit for undirected-vs-directed agreement),
precision interpolated at fixed recalls, and causal-effect ranking curves
with the no-adjustment and random-graph baselines.
"""

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .errors import DegenerateK, EmptyTruth, MismatchedDims
from .ges import GesConfig, bic_lambda, ges_run
from .graphs import Pdag, dag_to_cpdag, skeleton
from .ida import EffectSets, effect_matrix, rank_pairs
from .lrps import AdmmConfig, LrpsProblem, neg_log_likelihood, solve_lrps
from .matcore import CovarianceEstimate
from .simsem import SimDesign, random_sem

GAMMA_GRID = (0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.7)
RECALL_GRID = tuple(np.round(np.arange(1, 101) / 100.0, 2))

CV5 = "cv5"
BIC = "bic"
EBIC = "ebic"


def center_columns(data) -> np.ndarray:
    """Subtract column means; never rescales."""
    data = np.asarray(data, dtype=np.float64)
    return data - data.mean(axis=0, keepdims=True)


def covariance_from_data(data, center: bool = True) -> CovarianceEstimate:
    """MLE covariance (denominator n) of the rows, centered by default."""
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    if center:
        data = center_columns(data)
    return CovarianceEstimate(data.T @ data / n, n)


def default_eta_grid(p: int, n: int, num: int = 20) -> np.ndarray:
    """Logarithmic grid of trade-off penalties, scaled to the problem size.

    Spans [0.05, 5] times sqrt(log(p) / n): wide enough that cross-validated
    choices land in the interior for the simulated designs.
    """
    anchor = np.sqrt(np.log(max(p, 2)) / n)
    return anchor * np.logspace(np.log10(0.05), np.log10(5.0), num)


@dataclass(frozen=True)
class SelectionResult:
    chosen_eta: float
    chosen_gamma: float
    criterion_table: tuple  # rows (eta, gamma, score); failed points score inf
    method: str

    def __post_init__(self):
        finite = [row for row in self.criterion_table if np.isfinite(row[2])]
        if not finite:
            raise ValueError("no grid point was successfully scored")
        best = min(r[2] for r in finite)
        chosen = [r for r in finite if r[0] == self.chosen_eta and r[1] == self.chosen_gamma]
        if not chosen or chosen[0][2] > best + 1e-12:
            raise ValueError("chosen pair does not attain the criterion optimum")


_CV_SCAN_CONFIG = AdmmConfig(tol_primal=1e-6, tol_dual=1e-6, max_iter=2000)


def cv_folds(n: int, k: int, seed: int):
    """Deterministic fold assignment: a pure function of (n, k, seed)."""
    perm = rngmod.stream(seed, rngmod.STREAM_FOLDS).permutation(n)
    return [np.sort(chunk) for chunk in np.array_split(perm, k)]


def _grid_rows(eta_grid, gamma_grid):
    # gamma outer, eta descending inner: consecutive points are nearby
    # problems, which makes warm starts effective
    rows = []
    for g in gamma_grid:
        for e in sorted(eta_grid, reverse=True):
            rows.append((float(e), float(g)))
    return rows


def cv_select_lrps(data, eta_grid=None, gamma_grid=GAMMA_GRID, k: int = 5,
                   seed: int = 0, latent_sign: str = "psd",
                   scan_config: AdmmConfig = _CV_SCAN_CONFIG,
                   center: bool = True) -> SelectionResult:
    """Pick (eta, gamma) minimizing mean held-out negative log-likelihood."""
    data = np.asarray(data, dtype=np.float64)
    n, p = data.shape
    if n < 2 * k:
        raise ValueError(f"need at least {2*k} rows for {k}-fold selection")
    if center:
        data = center_columns(data)
    if eta_grid is None:
        eta_grid = default_eta_grid(p, n)
    folds = cv_folds(n, k, seed)
    rows = _grid_rows(eta_grid, gamma_grid)
    losses = np.zeros(len(rows))
    counts = np.zeros(len(rows))
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        train, test = data[mask], data[fold]
        cov_train = CovarianceEstimate(train.T @ train / train.shape[0], train.shape[0])
        sigma_test = test.T @ test / test.shape[0]
        warm = None
        for idx, (eta, gamma) in enumerate(rows):
            try:
                sol = solve_lrps(LrpsProblem(cov_train, eta, gamma, latent_sign),
                                 scan_config, warm=warm)
                warm = sol
            except Exception:
                losses[idx] += np.inf
                counts[idx] += 1
                warm = None
                continue
            losses[idx] += neg_log_likelihood(sol.k_o - sol.l, sigma_test)
            counts[idx] += 1
    mean_loss = losses / np.maximum(counts, 1)
    table = tuple((e, g, float(s)) for (e, g), s in zip(rows, mean_loss))
    best = int(np.argmin(mean_loss))
    return SelectionResult(chosen_eta=rows[best][0], chosen_gamma=rows[best][1],
                           criterion_table=table, method=CV5)


def lrps_degrees_of_freedom(k_o, effective_rank: int):
    """(df_sparse, df_lowrank): free parameters of the two components.

    Sparse part: half the off-diagonal support plus the diagonal. Low-rank
    part: dimension of the rank-r positive semidefinite manifold.
    """
    p = k_o.shape[0]
    nnz_off = int((k_o != 0).sum() - (np.diag(k_o) != 0).sum())
    df_sparse = nnz_off / 2.0 + p
    r = effective_rank
    df_lowrank = r * p - r * (r - 1) / 2.0
    return df_sparse, df_lowrank


def ebic_select_lrps(data, eta_grid=None, gamma_grid=GAMMA_GRID,
                     ebic_gamma: float = 0.5, latent_sign: str = "psd",
                     scan_config: AdmmConfig = _CV_SCAN_CONFIG,
                     center: bool = True) -> SelectionResult:
    """Pick (eta, gamma) minimizing the extended BIC on the full data."""
    if not (0 <= ebic_gamma <= 1):
        raise ValueError("ebic_gamma must lie in [0, 1]")
    data = np.asarray(data, dtype=np.float64)
    n, p = data.shape
    cov = covariance_from_data(data, center=center)
    if eta_grid is None:
        eta_grid = default_eta_grid(p, n)
    rows = _grid_rows(eta_grid, gamma_grid)
    scores = []
    warm = None
    for eta, gamma in rows:
        try:
            sol = solve_lrps(LrpsProblem(cov, eta, gamma, latent_sign),
                             scan_config, warm=warm)
            warm = sol
        except Exception:
            scores.append(np.inf)
            warm = None
            continue
        df_s, df_l = lrps_degrees_of_freedom(sol.k_o, sol.effective_rank)
        crit = (n * neg_log_likelihood(sol.k_o - sol.l, cov.matrix)
                + np.log(n) * (df_s + df_l)
                + 4.0 * ebic_gamma * np.log(p) * df_s)
        scores.append(float(crit))
    table = tuple((e, g, s) for (e, g), s in zip(rows, scores))
    best = int(np.argmin(scores))
    return SelectionResult(chosen_eta=rows[best][0], chosen_gamma=rows[best][1],
                           criterion_table=table,
                           method=BIC if ebic_gamma == 0 else EBIC)


def resolve_lambda(lam, n: int) -> float:
    """Map the literal "bic" to ln(n)/2; pass numbers through."""
    if lam == "bic":
        return bic_lambda(n)
    lam = float(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return lam


def fit_lrps_stage(data, selection: str = CV5, seed: int = 0,
                   eta_grid=None, gamma_grid=GAMMA_GRID,
                   latent_sign: str = "psd", config: AdmmConfig = AdmmConfig(),
                   center: bool = True):
    """Select (eta, gamma), refit on the full covariance; returns
    (solution, selection_result, covariance)."""
    data = np.asarray(data, dtype=np.float64)
    if selection == CV5:
        sel = cv_select_lrps(data, eta_grid, gamma_grid, seed=seed,
                             latent_sign=latent_sign, center=center)
    elif selection == BIC:
        sel = ebic_select_lrps(data, eta_grid, gamma_grid, ebic_gamma=0.0,
                               latent_sign=latent_sign, center=center)
    elif selection == EBIC:
        sel = ebic_select_lrps(data, eta_grid, gamma_grid, ebic_gamma=0.5,
                               latent_sign=latent_sign, center=center)
    else:
        raise ValueError(f"unknown selection method {selection!r}")
    cov = covariance_from_data(data, center=center)
    sol = solve_lrps(LrpsProblem(cov, sel.chosen_eta, sel.chosen_gamma, latent_sign),
                     config)
    return sol, sel, cov


def deconfounded_covariance(solution, n: int) -> CovarianceEstimate:
    """Inverse of the fitted sparse precision, carrying the original n."""
    inv = np.linalg.inv(solution.k_o)
    return CovarianceEstimate((inv + inv.T) / 2.0, n)


def pipeline_lrps_ges(data, selection: str = CV5, lam="bic", seed: int = 0,
                      eta_grid=None, gamma_grid=GAMMA_GRID,
                      max_degree=None, center: bool = True) -> Pdag:
    """Two-stage estimate: decompose, invert the sparse part, search."""
    data = np.asarray(data, dtype=np.float64)
    n = data.shape[0]
    sol, _, _ = fit_lrps_stage(data, selection, seed=seed, eta_grid=eta_grid,
                               gamma_grid=gamma_grid, center=center)
    cov2 = deconfounded_covariance(sol, n)
    out = ges_run(cov2, GesConfig(lam=resolve_lambda(lam, n), max_degree=max_degree))
    return out.cpdag


def pca_regress_out(data, k: int) -> np.ndarray:
    """Residuals after removing the span of the top-k principal directions."""
    data = np.asarray(data, dtype=np.float64)
    n, p = data.shape
    if k >= min(n, p):
        raise DegenerateK(f"k={k} must be < min(n, p)={min(n, p)}")
    xc = center_columns(data)
    if k == 0:
        return xc
    _, _, vt = np.linalg.svd(xc, full_matrices=False)
    vk = vt[:k]
    return xc - xc @ vk.T @ vk


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class PrCurve:
    recall_grid: tuple
    precision_at: tuple

    def __post_init__(self):
        if len(self.recall_grid) != len(self.precision_at):
            raise ValueError("grids must have equal length")
        if np.any(np.diff(self.recall_grid) <= 0):
            raise ValueError("recall grid must be strictly increasing")

    def average_precision(self) -> float:
        return float(np.mean(self.precision_at))


def _check_same_dims(est: Pdag, truth: Pdag):
    if est.num_nodes != truth.num_nodes:
        raise MismatchedDims(
            f"graphs have {est.num_nodes} and {truth.num_nodes} nodes"
        )


def skeleton_pr(est: Pdag, truth: Pdag):
    """Undirected-adjacency precision and recall; empty retrieval scores
    precision 1 by convention."""
    _check_same_dims(est, truth)
    e = skeleton(est).undirected_edges
    t = skeleton(truth).undirected_edges
    tp = len(e & t)
    precision = 1.0 if not e else tp / len(e)
    recall = 1.0 if not t else tp / len(t)
    return precision, recall


def _edge_mark(g: Pdag, i: int, j: int):
    """0 = absent, 1 = i->j, -1 = j->i, 2 = undirected."""
    a = g.amat
    if a[i, j] and a[j, i]:
        return 2
    if a[i, j]:
        return 1
    if a[j, i]:
        return -1
    return 0


def directed_pr(est: Pdag, truth: Pdag):
    """Orientation-aware precision and recall with half credit.

    A skeleton-matched edge counts 1 when the marks agree exactly, 0.5
    when exactly one side is undirected, 0 when directed both ways in
    opposite directions.
    """
    _check_same_dims(est, truth)
    e_edges = skeleton(est).undirected_edges
    t_edges = skeleton(truth).undirected_edges
    tp = 0.0
    for i, j in e_edges & t_edges:
        me, mt = _edge_mark(est, i, j), _edge_mark(truth, i, j)
        if me == mt:
            tp += 1.0
        elif me == 2 or mt == 2:
            tp += 0.5
    precision = 1.0 if not e_edges else tp / len(e_edges)
    recall = 1.0 if not t_edges else tp / len(t_edges)
    return precision, recall


def pr_curve_from_points(points, grid=RECALL_GRID) -> PrCurve:
    """Interpolated curve from (recall, precision) points: at each grid
    recall r report the best precision achieved at any recall >= r."""
    points = sorted(points)
    out = []
    for r in grid:
        cands = [prec for rec, prec in points if rec >= r - 1e-12]
        out.append(max(cands) if cands else 0.0)
    return PrCurve(recall_grid=tuple(grid), precision_at=tuple(out))


def pr_at_fixed_recalls(ranked_decisions, truth_count: int, grid=RECALL_GRID) -> PrCurve:
    """Sweep a ranked decision list into an interpolated precision curve.

    Each decision is (is_true_positive, weight); a true positive adds its
    weight to the hit mass, every decision counts fully toward retrieval.
    """
    if truth_count <= 0:
        raise EmptyTruth("no positive pairs in the truth")
    pts = []
    tp = 0.0
    for rank, (is_tp, weight) in enumerate(ranked_decisions, start=1):
        if is_tp:
            tp += weight
        pts.append((tp / truth_count, tp / rank))
    return pr_curve_from_points(pts, grid)


def effect_ranking_pr(effects: EffectSets, truth, zero_tol: float = 1e-9,
                      grid=RECALL_GRID) -> PrCurve:
    """Rank pairs by smallest possible |effect|; a pair is a hit iff its
    true total effect is nonzero."""
    truth = np.asarray(truth, dtype=np.float64)
    p = truth.shape[0]
    truth_count = int((np.abs(truth) > zero_tol).sum() - 0)
    ranked = rank_pairs(effects)
    decisions = [(bool(abs(truth[i, j]) > zero_tol), 1.0) for i, j in ranked]
    return pr_at_fixed_recalls(decisions, truth_count, grid)


def random_baseline_band(design: SimDesign, cov: CovarianceEstimate, truth,
                         n_graphs: int = 100, seed: int = 0,
                         zero_tol: float = 1e-9, grid=RECALL_GRID):
    """2.5/97.5 percentile envelope of effect-ranking precision over
    random DAGs drawn from the same design (hidden nodes ignored)."""
    curves = []
    base = rngmod.stream(seed, rngmod.STREAM_BASELINE)
    sub_seeds = base.integers(1, 2**62, size=n_graphs)
    for s in sub_seeds:
        sem = random_sem(SimDesign(p=design.p, h=0, n=design.n,
                                   f_pct=design.f_pct, sparsity=design.sparsity,
                                   weight_range=design.weight_range,
                                   noise_range=design.noise_range, seed=int(s)))
        cpdag = dag_to_cpdag(sem.observed_dag())
        eff = effect_matrix(cpdag, cov)
        curves.append(effect_ranking_pr(eff, truth, zero_tol, grid).precision_at)
    arr = np.array(curves)
    lo = np.percentile(arr, 2.5, axis=0)
    hi = np.percentile(arr, 97.5, axis=0)
    return PrCurve(tuple(grid), tuple(lo)), PrCurve(tuple(grid), tuple(hi))
