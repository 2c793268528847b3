"""Linear-Gaussian structural equation models with hidden confounders.

Ground truth for the benchmark: random sparse DAGs over observed nodes,
independent hidden nodes fanning out to a fixed fraction of the observed
ones, exact population covariance, its sparse-plus-low-rank precision
split, forward sampling, and path-sum total effects.
"""

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .graphs import Dag
from .matcore import CovarianceEstimate


@dataclass(frozen=True)
class SimDesign:
    p: int
    h: int
    n: int
    f_pct: float = 70.0
    sparsity: float = 0.05
    weight_range: tuple = (0.3, 1.0)
    noise_range: tuple = (0.5, 1.5)
    seed: int = 1

    def __post_init__(self):
        if self.p < 1 or self.h < 0 or self.n < 0:
            raise ValueError("p must be >= 1, h and n >= 0")
        if not (0 <= self.f_pct <= 100):
            raise ValueError("f_pct must lie in [0, 100]")
        if not (0 < self.sparsity < 1):
            raise ValueError("sparsity must lie in (0, 1)")
        lo, hi = self.weight_range
        if not (0 < lo < hi):
            raise ValueError("weight_range must satisfy 0 < lo < hi")
        nlo, nhi = self.noise_range
        if not (0 < nlo <= nhi):
            raise ValueError("noise_range must satisfy 0 < lo <= hi")


@dataclass(frozen=True)
class LinearSem:
    """Coefficient blocks of X <- B X + eps with hidden source nodes.

    b_o[i, j] is the weight of observed j -> observed i; b_oh[i, k] the
    weight of hidden k -> observed i; b_h the hidden-hidden block (zero in
    every generated model). noise_var stacks observed then hidden noise.
    """

    b_o: np.ndarray
    b_oh: np.ndarray
    b_h: np.ndarray
    noise_var: np.ndarray

    def __post_init__(self):
        b_o = np.asarray(self.b_o, dtype=np.float64)
        p = b_o.shape[0]
        b_oh = np.asarray(self.b_oh, dtype=np.float64).reshape(p, -1)
        h = b_oh.shape[1]
        b_h = np.asarray(self.b_h, dtype=np.float64).reshape(h, h)
        nv = np.asarray(self.noise_var, dtype=np.float64).ravel()
        if b_o.shape != (p, p):
            raise ValueError("b_o must be square")
        if nv.shape != (p + h,):
            raise ValueError(f"noise_var must have length p+h={p+h}")
        if np.any(nv <= 0):
            raise ValueError("noise variances must be positive")
        object.__setattr__(self, "b_o", b_o)
        object.__setattr__(self, "b_oh", b_oh)
        object.__setattr__(self, "b_h", b_h)
        object.__setattr__(self, "noise_var", nv)
        # strict triangularity under a topological order == acyclicity of
        # the combined graph; hidden-hidden edges included in the check
        full = self.full_coefficients()
        if np.any(np.diag(full) != 0):
            raise ValueError("no self-loops allowed")
        Dag.from_amat((full.T != 0).astype(np.int8))

    @property
    def p(self) -> int:
        return self.b_o.shape[0]

    @property
    def h(self) -> int:
        return self.b_oh.shape[1]

    def full_coefficients(self) -> np.ndarray:
        """The (p+h) x (p+h) block matrix [[b_o, b_oh], [0, b_h]]."""
        p, h = self.p, self.h
        full = np.zeros((p + h, p + h))
        full[:p, :p] = self.b_o
        full[:p, p:] = self.b_oh
        full[p:, p:] = self.b_h
        return full

    def observed_dag(self) -> Dag:
        """DAG among the observed nodes (edge j -> i iff b_o[i, j] != 0)."""
        return Dag.from_amat((self.b_o.T != 0).astype(np.int8))


def random_sem(design: SimDesign) -> LinearSem:
    """Draw a model from the benchmark distribution, reproducibly by seed.

    Observed edges are iid Bernoulli(sparsity) over a uniformly random
    node order; each hidden node gets directed edges to an exact
    ceil(f_pct * p / 100) uniform subset of the observed nodes; hidden
    nodes are mutually independent sources. Nonzero weights are uniform on
    +-[weight_range], noise variances uniform on noise_range.
    """
    p, h = design.p, design.h
    g_graph = rngmod.stream(design.seed, rngmod.STREAM_GRAPH)
    g_w = rngmod.stream(design.seed, rngmod.STREAM_WEIGHTS)
    g_n = rngmod.stream(design.seed, rngmod.STREAM_NOISE)

    order = g_graph.permutation(p)
    b_o = np.zeros((p, p))
    lo, hi = design.weight_range
    for a in range(p):
        for b in range(a + 1, p):
            if g_graph.random() < design.sparsity:
                w = g_w.uniform(lo, hi) * (1 if g_w.random() < 0.5 else -1)
                b_o[order[b], order[a]] = w

    fan = int(np.ceil(design.f_pct * p / 100.0)) if h > 0 else 0
    b_oh = np.zeros((p, h))
    for k in range(h):
        children = g_graph.choice(p, size=fan, replace=False)
        for c in children:
            w = g_w.uniform(lo, hi) * (1 if g_w.random() < 0.5 else -1)
            b_oh[c, k] = w

    noise = g_n.uniform(design.noise_range[0], design.noise_range[1], size=p + h)
    return LinearSem(b_o=b_o, b_oh=b_oh, b_h=np.zeros((h, h)), noise_var=noise)


def implied_covariance(sem: LinearSem, sample_size: int = 1) -> CovarianceEstimate:
    """Exact joint covariance (I-B)^{-1} Lambda (I-B)^{-T}, observed block first."""
    b = sem.full_coefficients()
    ib = np.eye(b.shape[0]) - b
    m = np.linalg.solve(ib, np.diag(sem.noise_var))
    cov = np.linalg.solve(ib, m.T).T
    return CovarianceEstimate((cov + cov.T) / 2.0, sample_size)


def observed_covariance(sem: LinearSem, sample_size: int = 1) -> CovarianceEstimate:
    """Population covariance of the observed marginal."""
    full = implied_covariance(sem, sample_size).matrix
    return CovarianceEstimate(full[: sem.p, : sem.p], sample_size)


def precision_decomposition(sem: LinearSem):
    """Split the observed-marginal precision into its two summands.

    Returns (k_o_star, l_star): the observed block of the joint precision
    and the cross-block correction, so that the inverse of
    k_o_star - l_star is the observed covariance block.
    """
    b = sem.full_coefficients()
    p = sem.p
    ib = np.eye(b.shape[0]) - b
    k = ib.T @ np.diag(1.0 / sem.noise_var) @ ib
    k = (k + k.T) / 2.0
    k_o = k[:p, :p]
    k_ho = k[p:, :p]
    k_h = k[p:, p:]
    if sem.h == 0:
        return k_o, np.zeros((p, p))
    l_star = k_ho.T @ np.linalg.solve(k_h, k_ho)
    return k_o, (l_star + l_star.T) / 2.0


def sample(sem: LinearSem, n: int, seed: int) -> np.ndarray:
    """Draw n joint Gaussians in topological order, keep observed columns."""
    g = rngmod.stream(seed, rngmod.STREAM_SAMPLES)
    d = sem.p + sem.h
    eps = g.standard_normal((n, d)) * np.sqrt(sem.noise_var)
    if n == 0:
        return np.empty((0, sem.p))
    ib = np.eye(d) - sem.full_coefficients()
    x = np.linalg.solve(ib, eps.T).T
    return x[:, : sem.p]


def true_total_effects(sem: LinearSem) -> np.ndarray:
    """Matrix of total effects: entry (i, j) sums weight products over all
    directed paths i -> ... -> j in the observed DAG; zero diagonal."""
    p = sem.p
    t = np.linalg.inv(np.eye(p) - sem.b_o)
    eff = t.T - np.eye(p)
    return eff
