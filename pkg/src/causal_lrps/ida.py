"""Enumeration of possible total causal effects from a CPDAG.

For every ordered pair (x, y) the multiset of effects consistent with the
equivalence class is computed the local way: enumerate the locally valid
parent sets of x (orientations of its undirected neighborhood creating no
new collider at x), and for each one read the effect off a least-squares
regression of y on x and the parents, using the supplied covariance.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularSubmatrix
from .graphs import Pdag
from .matcore import COND_LIMIT, CovarianceEstimate


@dataclass(frozen=True)
class EffectSets:
    num_nodes: int
    sets: dict
    failures: dict = field(default_factory=dict)

    def __post_init__(self):
        for (i, j), vals in self.sets.items():
            if i == j:
                raise ValueError("self-pairs are not allowed")
            if not vals:
                raise ValueError(f"effect set for ({i},{j}) is empty")


def possible_parent_sets(c: Pdag, x: int):
    """Locally valid parent sets of x in the CPDAG c.

    Each candidate is certain_parents(x) | s for s a subset of x's
    undirected neighbors such that directing s into x creates no new
    v-structure at x: every node of s must be adjacent to every other
    candidate parent.
    """
    pa = frozenset(c.parents(x))
    sib = sorted(c.undirected_neighbors(x))
    out = []
    for size in range(len(sib) + 1):
        for s in itertools.combinations(sib, size):
            ok = all(c.adjacent(a, b) for a, b in itertools.combinations(s, 2))
            if ok:
                ok = all(c.adjacent(a, b) for a in s for b in pa)
            if ok:
                out.append(pa | frozenset(s))
    return out


def _regression_effect(cov: CovarianceEstimate, x: int, y: int, parents) -> float:
    idx = (x,) + tuple(sorted(parents))
    a = cov.matrix[np.ix_(idx, idx)]
    w = np.linalg.eigvalsh(a)
    if w[0] <= 0 or w[-1] / w[0] > COND_LIMIT:
        raise SingularSubmatrix(
            f"regressor covariance for x={x}, parents={sorted(parents)} is singular"
        )
    b = cov.matrix[np.array(idx), y]
    beta = np.linalg.solve(a, b)
    return float(beta[0])


def total_effects(c: Pdag, cov: CovarianceEstimate, x: int, y: int):
    """Multiset of possible total effects of x on y; (multiset, n_failed)."""
    if x == y:
        raise ValueError("x and y must differ")
    effects = []
    failed = 0
    for pset in possible_parent_sets(c, x):
        if y in pset:
            effects.append(0.0)
            continue
        try:
            effects.append(_regression_effect(cov, x, y, pset))
        except SingularSubmatrix:
            failed += 1
    return effects, failed


def effect_matrix(c: Pdag, cov: CovarianceEstimate) -> EffectSets:
    """Possible-effect multisets for every ordered pair."""
    if c.num_nodes != cov.dim:
        raise ValueError("graph and covariance dimensions differ")
    sets = {}
    failures = {}
    for x in range(c.num_nodes):
        for y in range(c.num_nodes):
            if x == y:
                continue
            eff, failed = total_effects(c, cov, x, y)
            if eff:
                sets[(x, y)] = eff
            if failed:
                failures[(x, y)] = failed
    return EffectSets(num_nodes=c.num_nodes, sets=sets, failures=failures)


def min_abs_effect(e: EffectSets, pair) -> float:
    return min(abs(v) for v in e.sets[pair])


def rank_pairs(e: EffectSets):
    """Pairs ordered by min |possible effect|, largest first; index ties."""
    pairs = sorted(e.sets.keys())
    return sorted(pairs, key=lambda pr: (-min_abs_effect(e, pr), pr))
