"""Hot numeric kernels with an optional numba fast path.

Each kernel is written once, in the numpy subset numba can compile. On
import the module jit-wraps them unless the environment variable
CAUSAL_LRPS_NUMBA is set to 0/false/off (or numba is missing), in which
case the plain numpy versions run. `USING_NUMBA` records which path is
active; `benchmarks/bench_kernels.py` times the two against each other.
"""

import os

import numpy as np


def _numba_enabled() -> bool:
    flag = os.environ.get("CAUSAL_LRPS_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


def _admm_lrps(sigma, lam_sparse, lam_nuc, rho, max_iter, tol_primal, tol_dual,
               penalize_diag, nsd_mode, freeze_latent, adapt_rho,
               S, L, Z):
    """ADMM sweep for the penalized-likelihood sparse-plus-low-rank program.

    Splitting: R is the marginal precision, S the sparse part, L the
    latent part, consensus constraint R - S + L = 0, scaled dual Z.
    Returns the final iterates plus iteration count, relative residuals,
    the final step size and a 0/1 convergence flag.
    """
    p = sigma.shape[0]
    R = np.eye(p)
    converged = 0
    it = 0
    r_rel = np.inf
    s_rel = np.inf
    for it in range(1, max_iter + 1):
        sl_prev = S - L

        # R block: trace(R sigma) - logdet R + (rho/2)||R - (S - L - Z)||^2
        m = rho * (S - L - Z) - sigma
        m = (m + m.T) / 2.0
        d, u = np.linalg.eigh(m)
        r_eig = (d + np.sqrt(d * d + 4.0 * rho)) / (2.0 * rho)
        R = (u * r_eig) @ u.T
        R = (R + R.T) / 2.0

        # S block: soft threshold of R + L + Z at lam_sparse/rho
        b = R + L + Z
        t = lam_sparse / rho
        S = np.sign(b) * np.maximum(np.abs(b) - t, 0.0)
        if penalize_diag == 0:
            for i in range(p):
                S[i, i] = b[i, i]
        S = (S + S.T) / 2.0

        # L block: eigenvalue shrink of S - R - Z at lam_nuc/rho, clamped
        # to the requested semidefinite cone
        if freeze_latent == 0:
            c = S - R - Z
            c = (c + c.T) / 2.0
            d2, u2 = np.linalg.eigh(c)
            tn = lam_nuc / rho
            if nsd_mode == 1:
                l_eig = np.minimum(d2 + tn, 0.0)
            else:
                l_eig = np.maximum(d2 - tn, 0.0)
            L = (u2 * l_eig) @ u2.T
            L = (L + L.T) / 2.0

        resid = R - S + L
        Z = Z + resid

        r_norm = np.sqrt(np.sum(resid * resid))
        ds = (S - L) - sl_prev
        s_norm = rho * np.sqrt(np.sum(ds * ds))
        r_scale = max(1.0, max(np.sqrt(np.sum(R * R)),
                               np.sqrt(np.sum((S - L) * (S - L)))))
        s_scale = max(1.0, rho * np.sqrt(np.sum(Z * Z)))
        r_rel = r_norm / r_scale
        s_rel = s_norm / s_scale
        if r_rel < tol_primal and s_rel < tol_dual:
            converged = 1
            break

        if adapt_rho == 1 and it % 10 == 0:
            if r_rel > 10.0 * s_rel and rho < 1e6:
                rho = rho * 2.0
                Z = Z / 2.0
            elif s_rel > 10.0 * r_rel and rho > 1e-6:
                rho = rho / 2.0
                Z = Z * 2.0

    return R, S, L, Z, it, r_rel, s_rel, rho, converged


def _ancestors_mask(adj, base):
    """Boolean mask of base plus every ancestor of a node in base."""
    p = adj.shape[0]
    out = base.copy()
    stack = np.empty(p * p, dtype=np.int64)
    top = 0
    for v in range(p):
        if base[v]:
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for w in range(p):
            if adj[w, v] == 1 and not out[w]:
                out[w] = True
                stack[top] = w
                top += 1
    return out


# rebound to the jitted version below when numba is active; _reachable_from
# resolves this name at compile time
ancestors_mask = _ancestors_mask


def _reachable_from(adj, x, blocked):
    """Nodes d-connected to x given the blocked set, via active trails.

    adj is the dense directed adjacency (adj[a,b]=1 iff a->b); blocked is
    the boolean conditioning mask. Trail states are (node, direction) with
    direction 0 = arrived from a parent (moving with the arrows) and
    1 = arrived from a child (moving against them).
    """
    p = adj.shape[0]
    anc = ancestors_mask(adj, blocked)
    visited = np.zeros((p, 2), dtype=np.bool_)
    reach = np.zeros(p, dtype=np.bool_)
    stack = np.empty((2 * p * p + 2, 2), dtype=np.int64)
    stack[0, 0] = x
    stack[0, 1] = 1
    top = 1
    while top > 0:
        top -= 1
        y = stack[top, 0]
        d = stack[top, 1]
        if visited[y, d]:
            continue
        visited[y, d] = True
        if not blocked[y]:
            reach[y] = True
        if d == 1 and not blocked[y]:
            # moving against the arrows: continue to parents and children
            for w in range(p):
                if adj[w, y] == 1 and not visited[w, 1]:
                    stack[top, 0] = w
                    stack[top, 1] = 1
                    top += 1
                if adj[y, w] == 1 and not visited[w, 0]:
                    stack[top, 0] = w
                    stack[top, 1] = 0
                    top += 1
        elif d == 0:
            if not blocked[y]:
                for w in range(p):
                    if adj[y, w] == 1 and not visited[w, 0]:
                        stack[top, 0] = w
                        stack[top, 1] = 0
                        top += 1
            if anc[y]:
                # collider whose descendants meet the conditioning set:
                # the trail may turn around
                for w in range(p):
                    if adj[w, y] == 1 and not visited[w, 1]:
                        stack[top, 0] = w
                        stack[top, 1] = 1
                        top += 1
    reach[x] = False
    return reach


def _meek_sweep(amat):
    """One pass of the four orientation rules; returns 1 if anything fired.

    amat[i,j]=1, amat[j,i]=0 encodes i->j; 1,1 encodes i--j.
    """
    p = amat.shape[0]
    changed = 0
    for a in range(p):
        for b in range(p):
            if not (amat[a, b] == 1 and amat[b, a] == 1):
                continue
            oriented = 0
            # R1: c -> a, a -- b, c and b non-adjacent  =>  a -> b
            for c in range(p):
                if amat[c, a] == 1 and amat[a, c] == 0:
                    if amat[c, b] == 0 and amat[b, c] == 0:
                        oriented = 1
                        break
            # R2: a -> c -> b with a -- b  =>  a -> b
            if oriented == 0:
                for c in range(p):
                    if (amat[a, c] == 1 and amat[c, a] == 0
                            and amat[c, b] == 1 and amat[b, c] == 0):
                        oriented = 1
                        break
            # R3: a -- c, a -- d, c -> b, d -> b, c and d non-adjacent
            if oriented == 0:
                for c in range(p):
                    if not (amat[a, c] == 1 and amat[c, a] == 1
                            and amat[c, b] == 1 and amat[b, c] == 0):
                        continue
                    for dd in range(c + 1, p):
                        if (amat[a, dd] == 1 and amat[dd, a] == 1
                                and amat[dd, b] == 1 and amat[b, dd] == 0
                                and amat[c, dd] == 0 and amat[dd, c] == 0):
                            oriented = 1
                            break
                    if oriented == 1:
                        break
            # R4: a -- c, c -> d, d -> b, c and b non-adjacent, a and d adjacent
            if oriented == 0:
                for c in range(p):
                    if not (amat[a, c] == 1 and amat[c, a] == 1
                            and amat[c, b] == 0 and amat[b, c] == 0):
                        continue
                    for dd in range(p):
                        if (amat[c, dd] == 1 and amat[dd, c] == 0
                                and amat[dd, b] == 1 and amat[b, dd] == 0
                                and (amat[a, dd] == 1 or amat[dd, a] == 1)):
                            oriented = 1
                            break
                    if oriented == 1:
                        break
            if oriented == 1:
                amat[b, a] = 0
                changed = 1
    return changed


def _directed_has_cycle(amat):
    """Cycle check on the directed part only (undirected edges ignored)."""
    p = amat.shape[0]
    indeg = np.zeros(p, dtype=np.int64)
    for i in range(p):
        for j in range(p):
            if amat[i, j] == 1 and amat[j, i] == 0:
                indeg[j] += 1
    queue = np.empty(p, dtype=np.int64)
    head = 0
    tail = 0
    for v in range(p):
        if indeg[v] == 0:
            queue[tail] = v
            tail += 1
    seen = 0
    while head < tail:
        v = queue[head]
        head += 1
        seen += 1
        for w in range(p):
            if amat[v, w] == 1 and amat[w, v] == 0:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue[tail] = w
                    tail += 1
    return seen < p


USING_NUMBA = False

if _numba_enabled():
    try:
        from numba import njit
    except ImportError:
        njit = None
    if njit is not None:
        admm_lrps = njit(cache=True)(_admm_lrps)
        ancestors_mask = njit(cache=True)(_ancestors_mask)
        reachable_from = njit(cache=True)(_reachable_from)
        meek_sweep = njit(cache=True)(_meek_sweep)
        directed_has_cycle = njit(cache=True)(_directed_has_cycle)
        USING_NUMBA = True
    else:
        admm_lrps = _admm_lrps
        reachable_from = _reachable_from
        meek_sweep = _meek_sweep
        directed_has_cycle = _directed_has_cycle
else:
    admm_lrps = _admm_lrps
    reachable_from = _reachable_from
    meek_sweep = _meek_sweep
    directed_has_cycle = _directed_has_cycle
