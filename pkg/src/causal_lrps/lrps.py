"""Sparse-plus-low-rank penalized precision estimation.

Solves, over {K - L positive definite, L in the requested semidefinite
cone}, the program

    minimize  trace((K - L) Sigma) - logdet(K - L)
              + eta * (gamma * ||K||_1 + ||L||_*)

by a three-block ADMM (log-det prox, entrywise soft threshold, eigenvalue
shrink onto the cone) with scaled duals and optional residual balancing.
The latent cone is positive semidefinite for hidden-confounder problems
and negative semidefinite for the selection-bias variant.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import IllegalPenalty, NonPositiveDefiniteInput
from .matcore import CovarianceEstimate, as_sym_matrix

PSD = "psd"
NSD = "nsd"


@dataclass(frozen=True)
class LrpsProblem:
    cov: CovarianceEstimate
    eta: float
    gamma: float
    latent_sign: str = PSD

    def __post_init__(self):
        if self.eta <= 0 or self.gamma <= 0:
            raise IllegalPenalty(
                f"eta and gamma must be > 0, got eta={self.eta}, gamma={self.gamma}"
            )
        if self.latent_sign not in (PSD, NSD):
            raise ValueError(f"latent_sign must be '{PSD}' or '{NSD}'")


@dataclass(frozen=True)
class AdmmConfig:
    penalty_rho: float = 1.0
    max_iter: int = 5000
    tol_primal: float = 1e-7
    tol_dual: float = 1e-7
    rank_ratio_cut: float = 100.0
    penalize_diagonal: bool = False
    adapt_rho: bool = True
    freeze_latent: bool = False

    def __post_init__(self):
        if self.penalty_rho <= 0 or self.tol_primal <= 0 or self.tol_dual <= 0:
            raise ValueError("penalty and tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.rank_ratio_cut < 1:
            raise ValueError("rank_ratio_cut must be >= 1")


@dataclass(frozen=True)
class LrpsSolution:
    k_o: np.ndarray
    l: np.ndarray
    objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    effective_rank: int
    converged: bool
    latent_sign: str
    penalized_diagonal: bool
    cov_regularized: bool
    sigma_solved: np.ndarray
    dual: np.ndarray = field(repr=False, default=None)
    l_raw: np.ndarray = field(repr=False, default=None)


def prox_soft_threshold(x, t):
    """sign(x) * max(|x| - t, 0), elementwise on arrays."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    out = np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    return out if out.ndim else float(out)


def prox_logdet(a, sigma, rho: float) -> np.ndarray:
    """Unique PD minimizer of <sigma, R> - logdet R + (rho/2) ||R - a||_F^2."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    a = as_sym_matrix(a)
    sigma = as_sym_matrix(sigma)
    d, u = np.linalg.eigh(rho * a - sigma)
    r = (d + np.sqrt(d * d + 4.0 * rho)) / (2.0 * rho)
    out = (u * r) @ u.T
    return (out + out.T) / 2.0


def prox_nuclear_semidef(a, t: float, sign: str = PSD) -> np.ndarray:
    """Minimizer of t ||L||_* + 0.5 ||L - a||_F^2 over the semidefinite cone.

    PSD mode shrinks eigenvalues down by t and clamps at zero from below;
    NSD mode shifts them up by t and clamps at zero from above.
    """
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    a = as_sym_matrix(a)
    d, u = np.linalg.eigh(a)
    if sign == PSD:
        d = np.maximum(d - t, 0.0)
    elif sign == NSD:
        d = np.minimum(d + t, 0.0)
    else:
        raise ValueError(f"sign must be '{PSD}' or '{NSD}'")
    out = (u * d) @ u.T
    return (out + out.T) / 2.0


def neg_log_likelihood(k, sigma) -> float:
    """trace(K Sigma) - logdet K, the Gaussian negative log-likelihood core."""
    k = np.asarray(k)
    sigma = np.asarray(sigma)
    sgn, logdet = np.linalg.slogdet(k)
    if sgn <= 0:
        return np.inf
    return float(np.sum(k * sigma) - logdet)


def _penalty_value(k_o, l, problem: LrpsProblem, penalize_diagonal: bool) -> float:
    l1 = np.abs(k_o).sum()
    if not penalize_diagonal:
        l1 -= np.abs(np.diag(k_o)).sum()
    nuclear = np.abs(np.linalg.eigvalsh(l)).sum()
    return float(problem.eta * (problem.gamma * l1 + nuclear))


def objective_value(k_o, l, problem: LrpsProblem, penalize_diagonal: bool = False) -> float:
    """Value of the penalized program at (k_o, l)."""
    return neg_log_likelihood(k_o - l, problem.cov.matrix) + _penalty_value(
        k_o, l, problem, penalize_diagonal
    )


def _truncate_rank(l: np.ndarray, sign: str, ratio_cut: float):
    """Zero eigenvalues dominated by the leading one beyond the ratio cut."""
    d, u = np.linalg.eigh(l)
    mag = d if sign == PSD else -d
    mag = np.where(mag > 0.0, mag, 0.0)
    top = mag.max()
    if top <= 0.0:
        return np.zeros_like(l), 0
    keep = mag > top / ratio_cut
    d = np.where(keep, d, 0.0)
    out = (u * d) @ u.T
    return (out + out.T) / 2.0, int(keep.sum())


def solve_lrps(problem: LrpsProblem, config: AdmmConfig = AdmmConfig(),
               warm: LrpsSolution = None) -> LrpsSolution:
    """Run the ADMM solver to the requested tolerances.

    A non-PD sample covariance (e.g. n < p) is ridged by
    1e-8 * trace / p before solving; the flag is recorded on the solution.
    Passing the solution of a nearby problem as `warm` restarts from its
    iterates, which is what the cross-validation grids do.
    """
    sigma = problem.cov.matrix.copy()
    p = sigma.shape[0]
    w = np.linalg.eigvalsh(sigma)
    eps = 1e-8 * np.trace(sigma) / p
    if w[0] < -1e-8 * max(abs(w[-1]), 1.0):
        raise NonPositiveDefiniteInput(
            f"covariance eigenvalue {w[0]:.3e} is negative beyond tolerance"
        )
    regularized = False
    if w[0] < eps:
        sigma = sigma + eps * np.eye(p)
        regularized = True

    if warm is not None and warm.k_o.shape == sigma.shape:
        s0 = warm.k_o.copy()
        l0 = warm.l.copy()
        z0 = warm.dual.copy() if warm.dual is not None else np.zeros_like(sigma)
    else:
        s0 = np.diag(1.0 / np.diag(sigma)).copy()
        l0 = np.zeros_like(sigma)
        z0 = np.zeros_like(sigma)

    r, s, l, z, iters, r_rel, s_rel, _, conv = _kernels.admm_lrps(
        sigma,
        problem.eta * problem.gamma,
        problem.eta,
        config.penalty_rho,
        config.max_iter,
        config.tol_primal,
        config.tol_dual,
        1 if config.penalize_diagonal else 0,
        1 if problem.latent_sign == NSD else 0,
        1 if config.freeze_latent else 0,
        1 if config.adapt_rho else 0,
        s0, l0, z0,
    )

    k_o = (s + s.T) / 2.0
    l_raw = (l + l.T) / 2.0
    l_fin, eff_rank = _truncate_rank(l_raw, problem.latent_sign,
                                     config.rank_ratio_cut)
    prob_solved = replace(problem, cov=CovarianceEstimate(sigma, problem.cov.sample_size))
    obj = objective_value(k_o, l_fin, prob_solved, config.penalize_diagonal)
    return LrpsSolution(
        k_o=k_o,
        l=l_fin,
        objective=obj,
        iterations=int(iters),
        primal_residual=float(r_rel),
        dual_residual=float(s_rel),
        effective_rank=eff_rank,
        converged=bool(conv),
        latent_sign=problem.latent_sign,
        penalized_diagonal=config.penalize_diagonal,
        cov_regularized=regularized,
        sigma_solved=sigma,
        dual=z,
        l_raw=l_raw,
    )


def kkt_residual(solution: LrpsSolution, problem: LrpsProblem) -> float:
    """Worst first-order optimality violation of the solver's fixed point.

    Checks, on G = Sigma - (k_o - l)^{-1}: the entrywise gradient
    conditions of the l1 block (bound eta*gamma off the support, exact
    match with sign on it, zero on an unpenalized diagonal) and the
    eigenvalue conditions of the nuclear block (G bounded by eta on the
    cone side, G u = +-eta u on the retained eigenvectors of l).

    Evaluated against the converged latent iterate (l_raw) when the
    solution carries one: the rank-ratio truncation applied to `l` is
    rank-estimation post-processing, not part of the optimization.
    """
    sigma = solution.sigma_solved
    eta, gamma = problem.eta, problem.gamma
    l_eval = solution.l_raw if solution.l_raw is not None else solution.l
    marg = solution.k_o - l_eval
    g = sigma - np.linalg.inv(marg)
    g = (g + g.T) / 2.0
    t = eta * gamma

    active = solution.k_o != 0.0
    off = ~np.eye(len(g), dtype=bool)
    worst = 0.0
    act_off = active & off
    if act_off.any():
        worst = max(worst, np.abs(g[act_off] + t * np.sign(solution.k_o[act_off])).max())
    inact_off = (~active) & off
    if inact_off.any():
        worst = max(worst, max(0.0, np.abs(g[inact_off]).max() - t))
    diag = np.diag(g)
    diag_k = np.diag(solution.k_o)
    if solution.penalized_diagonal:
        worst = max(worst, np.abs(diag + t * np.sign(diag_k)).max())
    else:
        worst = max(worst, np.abs(diag).max())

    d, u = np.linalg.eigh(l_eval)
    evals_g = np.linalg.eigvalsh(g)
    if solution.latent_sign == PSD:
        worst = max(worst, max(0.0, evals_g[-1] - eta))
        act = d > 1e-12 * max(1.0, abs(d).max())
        if act.any():
            resid = (g - eta * np.eye(len(g))) @ u[:, act]
            worst = max(worst, float(np.sqrt((resid * resid).sum(axis=0)).max()))
    else:
        worst = max(worst, max(0.0, -eta - evals_g[0]))
        act = d < -1e-12 * max(1.0, abs(d).max())
        if act.any():
            resid = (g + eta * np.eye(len(g))) @ u[:, act]
            worst = max(worst, float(np.sqrt((resid * resid).sum(axis=0)).max()))
    return float(worst)
