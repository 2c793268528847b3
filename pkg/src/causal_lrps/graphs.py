"""Partially directed graphs: DAGs, CPDAGs and the algorithms between them.

The internal representation is a dense int8 adjacency matrix:
amat[i, j] = 1 and amat[j, i] = 0 encodes the directed edge i -> j, while
amat[i, j] = amat[j, i] = 1 encodes the undirected edge i -- j. Graphs are
immutable after construction; every operation returns a new graph.
"""

import itertools

import numpy as np

from . import _kernels
from .errors import InconsistentPdag, TooLarge


class Pdag:
    """A partially directed graph on nodes 0..num_nodes-1."""

    def __init__(self, num_nodes, directed_edges=(), undirected_edges=()):
        if num_nodes < 1:
            raise ValueError("num_nodes must be positive")
        amat = np.zeros((num_nodes, num_nodes), dtype=np.int8)
        seen = set()
        for i, j in directed_edges:
            self._check_pair(num_nodes, i, j)
            if (min(i, j), max(i, j)) in seen:
                raise ValueError(f"pair ({i},{j}) appears more than once")
            seen.add((min(i, j), max(i, j)))
            amat[i, j] = 1
        for i, j in undirected_edges:
            self._check_pair(num_nodes, i, j)
            if (min(i, j), max(i, j)) in seen:
                raise ValueError(f"pair ({i},{j}) appears in more than one edge set")
            seen.add((min(i, j), max(i, j)))
            amat[i, j] = 1
            amat[j, i] = 1
        self._amat = amat
        self._amat.flags.writeable = False

    @staticmethod
    def _check_pair(p, i, j):
        if not (0 <= i < p and 0 <= j < p):
            raise ValueError(f"node index out of range: ({i},{j})")
        if i == j:
            raise ValueError("self-loops are not allowed")

    @classmethod
    def from_amat(cls, amat):
        amat = np.asarray(amat, dtype=np.int8)
        if amat.ndim != 2 or amat.shape[0] != amat.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if np.any(np.diag(amat)):
            raise ValueError("self-loops are not allowed")
        g = cls.__new__(cls)
        g._amat = amat.copy()
        g._amat.flags.writeable = False
        g._validate()
        return g

    def _validate(self):
        pass

    @property
    def num_nodes(self) -> int:
        return self._amat.shape[0]

    @property
    def amat(self) -> np.ndarray:
        return self._amat

    @property
    def directed_edges(self):
        a = self._amat
        return {(int(i), int(j)) for i, j in zip(*np.nonzero((a == 1) & (a.T == 0)))}

    @property
    def undirected_edges(self):
        a = self._amat
        return {(int(i), int(j)) for i, j in zip(*np.nonzero((a == 1) & (a.T == 1))) if i < j}

    def num_edges(self) -> int:
        return len(self.directed_edges) + len(self.undirected_edges)

    def parents(self, y) -> set:
        a = self._amat
        return {int(i) for i in np.nonzero((a[:, y] == 1) & (a[y, :] == 0))[0]}

    def children(self, y) -> set:
        a = self._amat
        return {int(i) for i in np.nonzero((a[y, :] == 1) & (a[:, y] == 0))[0]}

    def undirected_neighbors(self, y) -> set:
        a = self._amat
        return {int(i) for i in np.nonzero((a[y, :] == 1) & (a[:, y] == 1))[0]}

    def adjacent(self, i, j) -> bool:
        return bool(self._amat[i, j] or self._amat[j, i])

    def adjacency_set(self, y) -> set:
        a = self._amat
        return {int(i) for i in np.nonzero((a[y, :] == 1) | (a[:, y] == 1))[0]}

    def __eq__(self, other):
        return isinstance(other, Pdag) and np.array_equal(self._amat, other._amat)

    def __hash__(self):
        return hash(self._amat.tobytes())

    def __repr__(self):
        return (f"{type(self).__name__}(p={self.num_nodes}, "
                f"directed={sorted(self.directed_edges)}, "
                f"undirected={sorted(self.undirected_edges)})")


class Dag(Pdag):
    """A Pdag with no undirected edges and an acyclic directed part."""

    def __init__(self, num_nodes, directed_edges=()):
        super().__init__(num_nodes, directed_edges=directed_edges)
        self._validate()

    def _validate(self):
        if self.undirected_edges:
            raise ValueError("a DAG may not contain undirected edges")
        if _kernels.directed_has_cycle(self._amat):
            raise ValueError("directed edges contain a cycle")


def skeleton(g: Pdag) -> Pdag:
    """Drop all orientations, preserving adjacency."""
    a = g.amat
    return Pdag.from_amat(((a == 1) | (a.T == 1)).astype(np.int8))


def is_acyclic(g: Pdag) -> bool:
    """True iff the directed part admits a topological order."""
    return not bool(_kernels.directed_has_cycle(g.amat))


def topological_order(g: Pdag):
    """A topological order of the directed part; raises if cyclic."""
    p = g.num_nodes
    a = g.amat
    directed = (a == 1) & (a.T == 0)
    indeg = directed.sum(axis=0)
    order = []
    ready = sorted(np.nonzero(indeg == 0)[0].tolist())
    indeg = indeg.copy()
    while ready:
        v = ready.pop(0)
        order.append(int(v))
        for w in np.nonzero(directed[v])[0]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(int(w))
        ready.sort()
    if len(order) < p:
        raise InconsistentPdag("directed part has a cycle")
    return order


def d_separated(g: Dag, i: int, j: int, s=()) -> bool:
    """Classic d-separation of i and j given s, via active-trail reachability."""
    s = set(s)
    if i == j:
        raise ValueError("i and j must differ")
    if i in s or j in s:
        raise ValueError("conditioning set may not contain i or j")
    blocked = np.zeros(g.num_nodes, dtype=np.bool_)
    for v in s:
        blocked[v] = True
    reach = _kernels.reachable_from(g.amat, i, blocked)
    return not bool(reach[j])


def d_separated_moral(g: Dag, i: int, j: int, s=()) -> bool:
    """Independent check of d-separation via the moralized ancestral graph."""
    s = set(s)
    if i == j:
        raise ValueError("i and j must differ")
    if i in s or j in s:
        raise ValueError("conditioning set may not contain i or j")
    p = g.num_nodes
    base = np.zeros(p, dtype=np.bool_)
    for v in s | {i, j}:
        base[v] = True
    anc = _kernels.ancestors_mask(g.amat, base)
    keep = np.nonzero(anc)[0]
    a = g.amat
    # undirect every edge of the ancestral subgraph, then marry parents
    moral = np.zeros((p, p), dtype=bool)
    for u in keep:
        for v in keep:
            if a[u, v]:
                moral[u, v] = True
                moral[v, u] = True
    for child in keep:
        pa = [u for u in keep if a[u, child] == 1]
        for u, v in itertools.combinations(pa, 2):
            moral[u, v] = True
            moral[v, u] = True
    # search from i avoiding s
    seen = {i}
    queue = [i]
    while queue:
        v = queue.pop()
        for w in np.nonzero(moral[v])[0]:
            w = int(w)
            if w == j:
                return False
            if w not in seen and w not in s:
                seen.add(w)
                queue.append(w)
    return True


def meek_closure(g: Pdag) -> Pdag:
    """Apply the four orientation rules to a fixed point."""
    amat = g.amat.copy()
    while _kernels.meek_sweep(amat):
        pass
    if _kernels.directed_has_cycle(amat):
        raise InconsistentPdag("orientation rules forced a directed cycle")
    return Pdag.from_amat(amat)


def v_structures(g: Pdag):
    """Colliders a -> z <- b with a, b non-adjacent (directed edges only)."""
    out = set()
    for z in range(g.num_nodes):
        pa = sorted(g.parents(z))
        for a, b in itertools.combinations(pa, 2):
            if not g.adjacent(a, b):
                out.add((a, b, z))
    return out


def dag_to_cpdag(g: Dag) -> Pdag:
    """Completed PDAG of g's Markov equivalence class.

    Uses the ordered-edge compelled/reversible labeling: compelled edges
    stay directed, reversible edges become undirected.
    """
    order = topological_order(g)
    pos = {v: k for k, v in enumerate(order)}
    edges = sorted(
        ((x, y) for x, y in g.directed_edges),
        key=lambda e: (pos[e[1]], -pos[e[0]]),
    )
    UNKNOWN, COMPELLED, REVERSIBLE = 0, 1, 2
    label = {e: UNKNOWN for e in edges}
    parents = {v: g.parents(v) for v in range(g.num_nodes)}

    for x, y in edges:
        if label[(x, y)] != UNKNOWN:
            continue
        resolved = False
        for w in sorted(parents[x]):
            if label[(w, x)] != COMPELLED:
                continue
            if w not in parents[y]:
                for z in parents[y]:
                    label[(z, y)] = COMPELLED
                resolved = True
                break
            label[(w, y)] = COMPELLED
        if resolved:
            continue
        if any(z != x and z not in parents[x] for z in parents[y]):
            for z in parents[y]:
                if label[(z, y)] == UNKNOWN:
                    label[(z, y)] = COMPELLED
        else:
            for z in parents[y]:
                if label[(z, y)] == UNKNOWN:
                    label[(z, y)] = REVERSIBLE

    amat = np.zeros((g.num_nodes, g.num_nodes), dtype=np.int8)
    for (x, y), lab in label.items():
        amat[x, y] = 1
        if lab == REVERSIBLE:
            amat[y, x] = 1
    return Pdag.from_amat(amat)


def pdag_to_dag(g: Pdag) -> Dag:
    """A consistent DAG extension (same skeleton and v-structures).

    Repeatedly finds a node whose directed edges all point in and whose
    undirected neighbors form a clique with its full adjacency, orients
    everything into it and retires it. Raises InconsistentPdag when no
    such node exists.
    """
    p = g.num_nodes
    work = g.amat.copy()
    result = g.amat.copy()
    active = set(range(p))
    while active:
        found = None
        for x in sorted(active):
            out_deg = sum(
                1 for w in active
                if work[x, w] == 1 and work[w, x] == 0
            )
            if out_deg:
                continue
            und = [w for w in active if work[x, w] == 1 and work[w, x] == 1]
            adj = [w for w in active if work[x, w] == 1 or work[w, x] == 1]
            ok = all(
                y == z or work[y, z] or work[z, y]
                for y in und for z in adj
            )
            if ok:
                found = x
                break
        if found is None:
            raise InconsistentPdag("graph admits no consistent DAG extension")
        x = found
        for w in active:
            if work[x, w] == 1 and work[w, x] == 1:
                result[x, w] = 0
                result[w, x] = 1
                work[x, w] = 0
        for w in active:
            work[x, w] = 0
            work[w, x] = 0
        active.remove(x)
    dag = Dag.__new__(Dag)
    dag._amat = result
    dag._amat.flags.writeable = False
    dag._validate()
    return dag


def enumerate_class(c: Pdag, max_undirected: int = 12):
    """All DAGs in the Markov equivalence class represented by CPDAG c.

    Brute-forces orientations of the undirected edges and keeps those that
    are acyclic and introduce no new v-structure. Guarded by TooLarge for
    more than `max_undirected` undirected edges.
    """
    und = sorted(c.undirected_edges)
    if len(und) > max_undirected:
        raise TooLarge(f"{len(und)} undirected edges exceeds the guard of {max_undirected}")
    target_vs = v_structures(c)
    base = c.amat
    out = []
    for bits in itertools.product((0, 1), repeat=len(und)):
        amat = base.copy()
        for (i, j), b in zip(und, bits):
            if b:
                amat[j, i] = 0
            else:
                amat[i, j] = 0
        if _kernels.directed_has_cycle(amat):
            continue
        cand = Pdag.from_amat(amat)
        if v_structures(cand) == target_vs:
            dag = Dag.__new__(Dag)
            dag._amat = cand.amat
            dag._validate()
            out.append(dag)
    return out


def graph_degree(g: Pdag) -> int:
    """Maximum adjacency count over nodes (orientation ignored)."""
    a = (g.amat == 1) | (g.amat.T == 1)
    return int(a.sum(axis=1).max()) if g.num_nodes else 0


def to_edge_list_text(g: Pdag) -> str:
    """Serialize in the one-edge-per-line text format."""
    lines = [f"pdag {g.num_nodes}"]
    for i, j in sorted(g.directed_edges):
        lines.append(f"{i} --> {j}")
    for i, j in sorted(g.undirected_edges):
        lines.append(f"{i} --- {j}")
    return "\n".join(lines) + "\n"


def from_edge_list_text(text: str) -> Pdag:
    """Parse the edge-list text format produced by `to_edge_list_text`."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("pdag"):
        raise ValueError("missing 'pdag <num_nodes>' header")
    parts = lines[0].split()
    if len(parts) != 2:
        raise ValueError(f"malformed header: {lines[0]!r}")
    p = int(parts[1])
    directed, undirected = [], []
    for ln in lines[1:]:
        fields = ln.split()
        if len(fields) != 3 or fields[1] not in ("-->", "---"):
            raise ValueError(f"malformed edge line: {ln!r}")
        i, j = int(fields[0]), int(fields[2])
        if fields[1] == "-->":
            directed.append((i, j))
        else:
            undirected.append((i, j))
    return Pdag(p, directed_edges=directed, undirected_edges=undirected)
