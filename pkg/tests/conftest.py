"""Shared oracles for the test suite: exhaustive DAG enumeration,
d-separation signatures, brute-force score search."""

import itertools

import numpy as np
import pytest

from causal_lrps._kernels import directed_has_cycle
from causal_lrps.ges import local_score
from causal_lrps.graphs import Dag, d_separated


def all_dags(p):
    """Every labeled DAG on p nodes (3 states per pair, cycles filtered)."""
    pairs = list(itertools.combinations(range(p), 2))
    out = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        amat = np.zeros((p, p), dtype=np.int8)
        for (i, j), st in zip(pairs, states):
            if st == 1:
                amat[i, j] = 1
            elif st == 2:
                amat[j, i] = 1
        if directed_has_cycle(amat):
            continue
        out.append(Dag.from_amat(amat))
    return out


def dsep_signature(dag):
    """Tuple of d-separation answers over every (i, j, S) triple."""
    sig = []
    nodes = range(dag.num_nodes)
    for i, j in itertools.combinations(nodes, 2):
        rest = [v for v in nodes if v not in (i, j)]
        for r in range(len(rest) + 1):
            for s in itertools.combinations(rest, r):
                sig.append(d_separated(dag, i, j, s))
    return tuple(sig)


def exhaustive_score_optimum(cov, lam, dags):
    """(best_total, best_dag) over an explicit DAG list, cached local scores."""
    cache = {}

    def s(v, parents):
        key = (v, frozenset(parents))
        if key not in cache:
            cache[key] = local_score(cov, v, parents, lam)
        return cache[key]

    best = None
    for dag in dags:
        tot = sum(s(v, dag.parents(v)) for v in range(cov.dim))
        if best is None or tot > best[0] + 1e-9:
            best = (tot, dag)
    return best


@pytest.fixture(scope="session")
def dags3():
    return all_dags(3)


@pytest.fixture(scope="session")
def dags4():
    return all_dags(4)
