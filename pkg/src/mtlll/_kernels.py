"""numba kernels for the two branching processes.

Trees are grown breadth first and each node's children are produced in
increasing label order. Both processes give siblings distinct labels, so the
resulting (label, parent) sequence is already canonical: two runs produce the
same unordered tree iff they produce the same sequence.
"""

import numba
import numpy as np

from .rng import nb_derive_key, nb_uniform

COMPLETE = 0
DEPTH_TRUNCATED = 1
SIZE_TRUNCATED = 2
REJECTION_ABORT = 3


@numba.njit(cache=True)
def draw_children(incl_ptr, incl_idx, adj, x, label, improved, key, ctr, buf, rej_budget):
    """Child labels of one node into ``buf``; returns (count, counter, rejections)."""
    lo = incl_ptr[label]
    hi = incl_ptr[label + 1]
    rejections = 0
    while True:
        k = 0
        for j in range(lo, hi):
            u = incl_idx[j]
            if nb_uniform(key, ctr) < x[u]:
                buf[k] = u
                k += 1
            ctr += 1
        if not improved:
            return k, ctr, rejections
        ok = True
        for i in range(k):
            for j in range(i + 1, k):
                if adj[buf[i], buf[j]]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return k, ctr, rejections
        rejections += 1
        if rejections > rej_budget:
            return -1, ctr, rejections


@numba.njit(cache=True)
def simulate_one(incl_ptr, incl_idx, adj, x, root, depth_cap, node_cap, improved,
                 key, ctr, rej_limit, labels, parents):
    """Grow one tree into ``labels``/``parents`` (capacity ``node_cap``).

    Returns (status, n_nodes, generations_used, rejections, counter).
    """
    buf = np.empty(incl_ptr.shape[0], dtype=np.int64)
    labels[0] = root
    parents[0] = -1
    n = 1
    gen_start = 0
    gen_end = 1
    generations = 0
    rejections = 0
    while gen_start < gen_end:
        if generations == depth_cap:
            return DEPTH_TRUNCATED, n, generations, rejections, ctr
        for v in range(gen_start, gen_end):
            k, ctr, r = draw_children(incl_ptr, incl_idx, adj, x, labels[v], improved,
                                      key, ctr, buf, rej_limit - rejections)
            rejections += r
            if k < 0:
                return REJECTION_ABORT, n, generations, rejections, ctr
            if n + k > node_cap:
                return SIZE_TRUNCATED, n, generations, rejections, ctr
            for i in range(k):
                labels[n] = buf[i]
                parents[n] = v
                n += 1
        generations += 1
        gen_start = gen_end
        gen_end = n
    return COMPLETE, n, generations, rejections, ctr


@numba.njit(cache=True)
def tally_kernel(incl_ptr, incl_idx, adj, x, root, depth_cap, node_cap, improved,
                 seed, rej_limit, trials, codes, status, sizes):
    """Run ``trials`` independent trees; trial ``t`` uses stream ``(seed, t)``.

    Row ``t`` of ``codes`` holds interleaved (label, parent) pairs, padded
    with -1; ``sizes[t]`` is its node count (0 unless complete). Returns
    the total number of rejected subprocess draws.
    """
    labels = np.empty(node_cap, dtype=np.int64)
    parents = np.empty(node_cap, dtype=np.int64)
    total_rej = 0
    for t in range(trials):
        key = nb_derive_key(seed, np.uint64(t))
        st, n, g, r, c = simulate_one(incl_ptr, incl_idx, adj, x, root, depth_cap, node_cap,
                                      improved, key, 0, rej_limit, labels, parents)
        total_rej += r
        status[t] = st
        sizes[t] = n if st == COMPLETE else 0
        for i in range(codes.shape[1]):
            codes[t, i] = -1
        if st == COMPLETE:
            for i in range(n):
                codes[t, 2 * i] = labels[i]
                codes[t, 2 * i + 1] = parents[i]
    return total_rej


@numba.njit(cache=True)
def child_set_kernel(incl_ptr, incl_idx, adj, x, label, improved, seed, draws, out):
    """``draws`` child sets of one node as bitmasks over its closed neighborhood."""
    buf = np.empty(incl_ptr.shape[0], dtype=np.int64)
    lo = incl_ptr[label]
    hi = incl_ptr[label + 1]
    for t in range(draws):
        key = nb_derive_key(seed, np.uint64(t))
        k, c, r = draw_children(incl_ptr, incl_idx, adj, x, label, improved, key, 0, buf, 10**9)
        m = 0
        for i in range(k):
            for j in range(lo, hi):
                if incl_idx[j] == buf[i]:
                    m |= 1 << (j - lo)
        out[t] = m
