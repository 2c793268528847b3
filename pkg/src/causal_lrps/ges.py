"""Greedy equivalence search over CPDAGs with an l0-penalized Gaussian score.

Forward phase: repeatedly apply the best valid single-edge insertion
operator until no insertion improves the penalized score. Backward phase:
same with deletions. Operator validity follows the standard clique and
semi-directed-path conditions; after each application the graph is
re-completed via a consistent DAG extension.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples, NonPositiveResidualVariance, SingularSubmatrix
from .graphs import Pdag, dag_to_cpdag, pdag_to_dag
from .matcore import COND_LIMIT, CovarianceEstimate

SCORE_EPS = 1e-9


def bic_lambda(n: int) -> float:
    """Per-parameter penalty reproducing BIC in log-likelihood units."""
    return float(np.log(n) / 2.0)


@dataclass(frozen=True)
class GesConfig:
    lam: float
    max_degree: int = None
    phase_limit: int = None

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.max_degree is not None and self.max_degree < 0:
            raise ValueError("max_degree must be nonnegative")
        if self.phase_limit is not None and self.phase_limit < 0:
            raise ValueError("phase_limit must be nonnegative")


@dataclass(frozen=True)
class ScoredCpdag:
    cpdag: Pdag
    total_score: float
    per_node_scores: np.ndarray
    phase_limited: bool = False


def local_score(cov: CovarianceEstimate, node: int, parents, lam: float) -> float:
    """-(n/2) ln(residual variance of node given parents) - lam*(|parents|+1)."""
    parents = tuple(sorted(set(parents)))
    if node in parents:
        raise ValueError("node may not be its own parent")
    s = cov.matrix
    if parents:
        spp = s[np.ix_(parents, parents)]
        w = np.linalg.eigvalsh(spp)
        if w[0] <= 0 or w[-1] / w[0] > COND_LIMIT:
            raise SingularSubmatrix(
                f"parent submatrix of node {node} is singular at working precision"
            )
        spi = s[np.array(parents), node]
        sigma2 = s[node, node] - spi @ np.linalg.solve(spp, spi)
    else:
        sigma2 = s[node, node]
    if sigma2 <= 1e-12:
        raise NonPositiveResidualVariance(
            f"residual variance of node {node} given {parents} is {sigma2:.3e}"
        )
    n = cov.sample_size
    return float(-(n / 2.0) * np.log(sigma2) - lam * (len(parents) + 1))


class _Scorer:
    """Memoizes local scores for one (covariance, lambda) pair."""

    def __init__(self, cov: CovarianceEstimate, lam: float):
        self.cov = cov
        self.lam = lam
        self._cache = {}

    def __call__(self, node: int, parents) -> float:
        key = (node, frozenset(parents))
        hit = self._cache.get(key)
        if hit is None:
            hit = local_score(self.cov, node, parents, self.lam)
            self._cache[key] = hit
        return hit


class _Scan:
    """Per-step views of the graph used by the operator search."""

    def __init__(self, g: Pdag):
        amat = g.amat
        p = amat.shape[0]
        self.p = p
        self.succ = amat == 1  # children and undirected neighbors, row-wise
        self.adj = (amat == 1) | (amat.T == 1)
        und = (amat == 1) & (amat.T == 1)
        dird = (amat == 1) & (amat.T == 0)
        self.und_sets = [frozenset(np.nonzero(und[v])[0].tolist()) for v in range(p)]
        self.pa_sets = [frozenset(np.nonzero(dird[:, v])[0].tolist()) for v in range(p)]
        self.deg = self.adj.sum(axis=1)

    def is_clique(self, nodes) -> bool:
        return all(self.adj[a, b] for a, b in itertools.combinations(nodes, 2))

    def blocked(self, src: int, dst: int, blockers) -> bool:
        """True iff every semi-directed path src -> dst meets blockers."""
        free = np.ones(self.p, dtype=bool)
        for b in blockers:
            free[b] = False
        if not free[src] or not free[dst]:
            return True
        seen = np.zeros(self.p, dtype=bool)
        seen[src] = True
        frontier = seen.copy()
        while frontier.any():
            nxt = self.succ[frontier].any(axis=0) & free & ~seen
            if nxt[dst]:
                return False
            seen |= nxt
            frontier = nxt
        return True


def _clique_extensions(scan: _Scan, base, candidates):
    """Subsets t of candidates (in size-then-lex order) with base | t a clique.

    Relies on cliques being downward closed: a subset failing the clique
    condition prunes all of its supersets.
    """
    candidates = sorted(candidates)
    out = [()]
    frontier = [((), i) for i in range(len(candidates))]
    # breadth-first growth keeps the size-then-lexicographic order
    while frontier:
        next_frontier = []
        for t, i in frontier:
            v = candidates[i]
            if not all(scan.adj[v, b] for b in base):
                continue
            if not all(scan.adj[v, u] for u in t):
                continue
            grown = t + (v,)
            out.append(grown)
            next_frontier.extend((grown, j) for j in range(i + 1, len(candidates)))
        frontier = next_frontier
    return out


def _best_insert(g: Pdag, scorer: _Scorer, max_degree):
    """Highest-scoring valid insertion, ties to the smallest (x, y, T)."""
    p = g.num_nodes
    scan = _Scan(g)
    best = None
    for x in range(p):
        if max_degree is not None and scan.deg[x] + 1 > max_degree:
            continue
        for y in range(p):
            if x == y or scan.adj[x, y]:
                continue
            if max_degree is not None and scan.deg[y] + 1 > max_degree:
                continue
            na = {w for w in scan.und_sets[y] if scan.adj[w, x]}
            if not scan.is_clique(sorted(na)):
                # na is contained in every conditioning set, so no T works
                continue
            t0 = [w for w in scan.und_sets[y] if not scan.adj[w, x]]
            pa_y = scan.pa_sets[y]
            # the path condition is monotone in T: blocked with T = {} means
            # blocked for every T
            all_blocked = scan.blocked(y, x, na)
            for t in _clique_extensions(scan, sorted(na), t0):
                cond = na | set(t)
                if not all_blocked and not scan.blocked(y, x, cond):
                    continue
                base = cond | pa_y
                try:
                    delta = scorer(y, base | {x}) - scorer(y, base)
                except (SingularSubmatrix, NonPositiveResidualVariance):
                    continue
                if best is None or delta > best[0] + SCORE_EPS:
                    best = (delta, x, y, t)
    if best is None or best[0] <= SCORE_EPS:
        return None
    return best


def _apply_insert(g: Pdag, x: int, y: int, t) -> Pdag:
    amat = g.amat.copy()
    amat[x, y] = 1
    for w in t:
        amat[y, w] = 0
    return dag_to_cpdag(pdag_to_dag(Pdag.from_amat(amat)))


def _best_delete(g: Pdag, scorer: _Scorer):
    """Highest-scoring valid deletion; deterministic scan order breaks ties."""
    p = g.num_nodes
    scan = _Scan(g)
    best = None
    for x in range(p):
        for y in range(p):
            if x == y:
                continue
            # x -> y and x -- y are deletable; an undirected edge yields two
            # distinct operators, one per role assignment
            directed_xy = g.amat[x, y] == 1 and g.amat[y, x] == 0
            if not (directed_xy or y in scan.und_sets[x]):
                continue
            na = {w for w in scan.und_sets[y] if scan.adj[w, x]}
            pa_y = scan.pa_sets[y]
            # NA \ H must be a clique, so enumerate clique subsets directly
            for kept in _clique_extensions(scan, (), sorted(na)):
                hset = tuple(sorted(na - set(kept)))
                base = set(kept) | (pa_y - {x})
                try:
                    delta = scorer(y, base) - scorer(y, base | {x})
                except (SingularSubmatrix, NonPositiveResidualVariance):
                    continue
                if best is None or delta > best[0] + SCORE_EPS:
                    best = (delta, x, y, hset)
    if best is None or best[0] <= SCORE_EPS:
        return None
    return best


def _apply_delete(g: Pdag, x: int, y: int, hset) -> Pdag:
    amat = g.amat.copy()
    amat[x, y] = 0
    amat[y, x] = 0
    for w in hset:
        amat[w, y] = 0
        if amat[x, w] == 1 and amat[w, x] == 1:
            amat[w, x] = 0
    return dag_to_cpdag(pdag_to_dag(Pdag.from_amat(amat)))


def _per_node_scores(g: Pdag, scorer: _Scorer) -> np.ndarray:
    dag = pdag_to_dag(g)
    return np.array([scorer(v, dag.parents(v)) for v in range(g.num_nodes)])


def _check_sample_size(cov: CovarianceEstimate):
    if cov.sample_size <= 2:
        raise InsufficientSamples("need sample_size > 2 to score graphs")


def ges_forward(cov: CovarianceEstimate, config: GesConfig) -> ScoredCpdag:
    """Greedy insertions from the empty graph until no improvement."""
    _check_sample_size(cov)
    scorer = _Scorer(cov, config.lam)
    g = Pdag(cov.dim)
    limit = config.phase_limit if config.phase_limit is not None else np.inf
    steps = 0
    limited = False
    while True:
        if steps >= limit:
            limited = True
            break
        move = _best_insert(g, scorer, config.max_degree)
        if move is None:
            break
        _, x, y, t = move
        g = _apply_insert(g, x, y, t)
        steps += 1
    per = _per_node_scores(g, scorer)
    return ScoredCpdag(cpdag=g, total_score=float(per.sum()), per_node_scores=per,
                       phase_limited=limited)


def ges_backward(start: ScoredCpdag, cov: CovarianceEstimate,
                 config: GesConfig) -> ScoredCpdag:
    """Greedy deletions from `start` until no improvement."""
    _check_sample_size(cov)
    scorer = _Scorer(cov, config.lam)
    g = start.cpdag
    limit = config.phase_limit if config.phase_limit is not None else np.inf
    steps = 0
    limited = start.phase_limited
    while True:
        if steps >= limit:
            limited = True
            break
        move = _best_delete(g, scorer)
        if move is None:
            break
        _, x, y, hset = move
        g = _apply_delete(g, x, y, hset)
        steps += 1
    per = _per_node_scores(g, scorer)
    return ScoredCpdag(cpdag=g, total_score=float(per.sum()), per_node_scores=per,
                       phase_limited=limited)


def ges_run(cov: CovarianceEstimate, config: GesConfig) -> ScoredCpdag:
    """Forward phase followed by backward phase."""
    return ges_backward(ges_forward(cov, config), cov, config)
