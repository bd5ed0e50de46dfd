"""Array kernels for the almost-linear constructions.

Every function here takes and returns plain numpy arrays so it can be
compiled by numba or run as ordinary Python (see ``_jit``). Graphs arrive
in CSR form: ``offsets[v]:offsets[v+1]`` indexes the sorted successors of
``v`` in ``targets``.
"""

import numpy as np

from ._jit import njit

TREE = 0
BACK = 1
FORWARD = 2
CROSS = 3


@njit
def dfs_forest(n, offsets, targets, roots):
    """Iterative DFS over the vertices listed in ``roots`` (in that order).

    Returns ``(dfn, post, parent, order, kind)``. Vertices never reached
    keep ``dfn == -1``. ``kind`` classifies each CSR edge.
    """
    m = targets.shape[0]
    dfn = np.full(n, -1, np.int64)
    post = np.full(n, -1, np.int64)
    parent = np.full(n, -1, np.int64)
    order = np.full(n, -1, np.int64)
    kind = np.zeros(m, np.int8)
    on_path = np.zeros(n, np.bool_)
    stack_v = np.empty(n, np.int64)
    stack_e = np.empty(n, np.int64)
    counter = 0
    finished = 0
    for i in range(roots.shape[0]):
        r = roots[i]
        if dfn[r] != -1:
            continue
        sp = 0
        stack_v[0] = r
        stack_e[0] = offsets[r]
        dfn[r] = counter
        order[counter] = r
        counter += 1
        on_path[r] = True
        while sp >= 0:
            v = stack_v[sp]
            e = stack_e[sp]
            if e < offsets[v + 1]:
                stack_e[sp] = e + 1
                w = targets[e]
                if dfn[w] == -1:
                    kind[e] = TREE
                    parent[w] = v
                    dfn[w] = counter
                    order[counter] = w
                    counter += 1
                    on_path[w] = True
                    sp += 1
                    stack_v[sp] = w
                    stack_e[sp] = offsets[w]
                elif on_path[w]:
                    kind[e] = BACK
                elif dfn[w] > dfn[v]:
                    kind[e] = FORWARD
                else:
                    kind[e] = CROSS
            else:
                post[v] = finished
                finished += 1
                on_path[v] = False
                sp -= 1
    return dfn, post, parent, order[:counter], kind


@njit
def tarjan_scc(n, offsets, targets, vertices):
    """Tarjan's SCC algorithm without recursion.

    Returns ``(comp, count)``; component ids are assigned in the order the
    components are completed, which is reverse topological.
    """
    index = np.full(n, -1, np.int64)
    low = np.zeros(n, np.int64)
    comp = np.full(n, -1, np.int64)
    on_stack = np.zeros(n, np.bool_)
    scc_stack = np.empty(n, np.int64)
    call_v = np.empty(n, np.int64)
    call_e = np.empty(n, np.int64)
    top = 0
    counter = 0
    count = 0
    for i in range(vertices.shape[0]):
        s = vertices[i]
        if index[s] != -1:
            continue
        sp = 0
        call_v[0] = s
        call_e[0] = offsets[s]
        index[s] = counter
        low[s] = counter
        counter += 1
        scc_stack[top] = s
        top += 1
        on_stack[s] = True
        while sp >= 0:
            v = call_v[sp]
            e = call_e[sp]
            if e < offsets[v + 1]:
                call_e[sp] = e + 1
                w = targets[e]
                if index[w] == -1:
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    scc_stack[top] = w
                    top += 1
                    on_stack[w] = True
                    sp += 1
                    call_v[sp] = w
                    call_e[sp] = offsets[w]
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            else:
                if low[v] == index[v]:
                    while True:
                        top -= 1
                        w = scc_stack[top]
                        on_stack[w] = False
                        comp[w] = count
                        if w == v:
                            break
                    count += 1
                sp -= 1
                if sp >= 0:
                    u = call_v[sp]
                    if low[v] < low[u]:
                        low[u] = low[v]
    return comp, count


@njit
def uf_find(uf, v):
    root = v
    while uf[root] != root:
        root = uf[root]
    while uf[v] != root:
        nxt = uf[v]
        uf[v] = root
        v = nxt
    return root


@njit
def uf_union(uf, size, label, a, b, keep):
    """Merge the sets of ``a`` and ``b``; the merged set is labelled ``keep``."""
    ra = uf_find(uf, a)
    rb = uf_find(uf, b)
    if ra == rb:
        label[ra] = keep
        return
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    uf[rb] = ra
    size[ra] += size[rb]
    label[ra] = keep


@njit
def offline_lca(n, order, post, parent, qu, qv):
    """Tarjan's offline LCA over a DFS forest.

    ``order`` lists the forest vertices by discovery index. Queries whose
    endpoints lie in different trees get ``-1``.
    """
    q = qu.shape[0]
    answer = np.full(q, -1, np.int64)
    k = order.shape[0]
    root = np.full(n, -1, np.int64)
    for i in range(k):
        v = order[i]
        if parent[v] == -1:
            root[v] = v
        else:
            root[v] = root[parent[v]]
    # queries bucketed by endpoint
    deg = np.zeros(n + 1, np.int64)
    for i in range(q):
        deg[qu[i] + 1] += 1
        deg[qv[i] + 1] += 1
    for v in range(n):
        deg[v + 1] += deg[v]
    fill = deg[:n].copy()
    qid = np.empty(2 * q, np.int64)
    other = np.empty(2 * q, np.int64)
    for i in range(q):
        a = qu[i]
        b = qv[i]
        qid[fill[a]] = i
        other[fill[a]] = b
        fill[a] += 1
        qid[fill[b]] = i
        other[fill[b]] = a
        fill[b] += 1
    by_post = np.empty(k, np.int64)
    for i in range(k):
        v = order[i]
        by_post[post[v]] = v
    uf = np.arange(n)
    size = np.ones(n, np.int64)
    anc = np.arange(n)
    black = np.zeros(n, np.bool_)
    for i in range(k):
        u = by_post[i]
        black[u] = True
        for j in range(deg[u], deg[u + 1]):
            w = other[j]
            if black[w] and root[w] == root[u]:
                answer[qid[j]] = anc[uf_find(uf, w)]
        p = parent[u]
        if p != -1:
            uf_union(uf, size, anc, u, p, p)
    return answer


@njit
def build_wpo(n, order, parent, bp_offsets, bp_sources, cf_u, cf_v, cf_lca,
              lift):
    """Bottom-up WPO construction over a DFS forest.

    ``bp_offsets``/``bp_sources`` list, per head, the sources of back edges
    entering it (ascending). ``cf_*`` are the cross and forward edges with
    the LCA of their endpoints. Exit of head ``h`` is node ``n + h``.

    Returns ``(sched_src, sched_dst, stab_exit, stab_head, cparent)`` where
    the scheduling pairs are in insertion order (duplicates possible) and
    ``cparent[v]`` is the head whose component absorbed representative
    ``v`` (or -1).
    """
    k = order.shape[0]
    ncf = cf_u.shape[0]
    nback = bp_sources.shape[0]

    uf = np.arange(n)
    size = np.ones(n, np.int64)
    label = np.arange(n)
    exit_of = np.arange(n)
    cparent = np.full(n, -1, np.int64)

    # deferred cross/forward edges, bucketed by LCA (R[])
    # (edges between different DFS trees go to the extra bucket ``n``)
    r_off = np.zeros(n + 2, np.int64)
    for i in range(ncf):
        l = cf_lca[i]
        if l < 0:
            l = n
        r_off[l + 1] += 1
    for v in range(n + 1):
        r_off[v + 1] += r_off[v]
    r_fill = r_off[:n + 1].copy()
    r_idx = np.empty(ncf, np.int64)
    for i in range(ncf):
        l = cf_lca[i]
        if l < 0:
            l = n
        r_idx[r_fill[l]] = i
        r_fill[l] += 1

    # current non-back predecessors and original edges O[], as linked lists
    cap = k + ncf
    pr_head = np.full(n, -1, np.int64)
    pr_tail = np.full(n, -1, np.int64)
    pr_src = np.empty(cap, np.int64)
    pr_next = np.full(cap, -1, np.int64)
    o_head = np.full(n, -1, np.int64)
    o_tail = np.full(n, -1, np.int64)
    o_src = np.empty(cap, np.int64)
    o_dst = np.empty(cap, np.int64)
    o_next = np.full(cap, -1, np.int64)
    npr = 0
    no = 0
    for i in range(k):
        w = order[i]
        p = parent[w]
        if p == -1:
            continue
        pr_src[npr] = p
        if pr_tail[w] == -1:
            pr_head[w] = npr
        else:
            pr_next[pr_tail[w]] = npr
        pr_tail[w] = npr
        npr += 1
        o_src[no] = p
        o_dst[no] = w
        if o_tail[w] == -1:
            o_head[w] = no
        else:
            o_next[o_tail[w]] = no
        o_tail[w] = no
        no += 1

    scap = 2 * cap + nback + 1
    s_src = np.empty(scap, np.int64)
    s_dst = np.empty(scap, np.int64)
    ns = 0
    st_x = np.empty(n, np.int64)
    st_h = np.empty(n, np.int64)
    nst = 0

    mark = np.full(n, -1, np.int64)
    pbuf = np.empty(n, np.int64)
    work = np.empty(n, np.int64)
    nested = np.empty(n, np.int64)
    tmp = np.empty(cap + 1, np.int64)

    for oi in range(k - 1, -2, -1):
        # the last round (h == n) only restores edges between DFS trees
        h = n if oi < 0 else order[oi]
        # restore the edges whose LCA is h, retargeted to the current rep
        for j in range(r_off[h], r_off[h + 1]):
            e = r_idx[j]
            u = cf_u[e]
            v = cf_v[e]
            r = label[uf_find(uf, v)]
            pr_src[npr] = u
            if pr_tail[r] == -1:
                pr_head[r] = npr
            else:
                pr_next[pr_tail[r]] = npr
            pr_tail[r] = npr
            npr += 1
            o_src[no] = u
            o_dst[no] = v
            if o_tail[r] == -1:
                o_head[r] = no
            else:
                o_next[o_tail[r]] = no
            o_tail[r] = no
            no += 1
        if h == n:
            continue

        # P_h: representatives of back-edge sources
        np_ = 0
        for j in range(bp_offsets[h], bp_offsets[h + 1]):
            pbuf[np_] = label[uf_find(uf, bp_sources[j])]
            np_ += 1
        if np_ == 0:
            continue
        ps = np.sort(pbuf[:np_])
        np_ = 0
        for j in range(ps.shape[0]):
            if np_ == 0 or ps[j] != pbuf[np_ - 1]:
                pbuf[np_] = ps[j]
                np_ += 1

        # N_h: backward search from the sinks
        mark[h] = h
        ws = 0
        for j in range(np_):
            r = pbuf[j]
            if mark[r] != h:
                mark[r] = h
                work[ws] = r
                ws += 1
        nn = 0
        while ws > 0:
            ws -= 1
            v = work[ws]
            nested[nn] = v
            nn += 1
            t = 0
            q = pr_head[v]
            while q != -1:
                tmp[t] = pr_src[q]
                t += 1
                q = pr_next[q]
            srcs = np.sort(tmp[:t])
            for j in range(t):
                r = label[uf_find(uf, srcs[j])]
                if mark[r] != h:
                    mark[r] = h
                    work[ws] = r
                    ws += 1

        for i in range(nn):
            v = nested[i]
            q = o_head[v]
            while q != -1:
                s_src[ns] = exit_of[label[uf_find(uf, o_src[q])]]
                s_dst[ns] = o_dst[q]
                ns += 1
                q = o_next[q]
            if lift:
                q = pr_head[v]
                while q != -1:
                    s_src[ns] = exit_of[label[uf_find(uf, pr_src[q])]]
                    s_dst[ns] = v
                    ns += 1
                    q = pr_next[q]

        x = n + h
        for j in range(np_):
            s_src[ns] = exit_of[pbuf[j]]
            s_dst[ns] = x
            ns += 1
        st_x[nst] = x
        st_h[nst] = h
        nst += 1
        exit_of[h] = x
        for i in range(nn):
            v = nested[i]
            cparent[v] = h
            uf_union(uf, size, label, v, h, h)

    # connect the maximal components, ascending representative id
    present = np.zeros(n, np.bool_)
    for i in range(k):
        present[order[i]] = True
    for v in range(n):
        if not present[v] or label[uf_find(uf, v)] != v:
            continue
        q = o_head[v]
        while q != -1:
            s_src[ns] = exit_of[label[uf_find(uf, o_src[q])]]
            s_dst[ns] = o_dst[q]
            ns += 1
            q = o_next[q]
        if lift:
            q = pr_head[v]
            while q != -1:
                s_src[ns] = exit_of[label[uf_find(uf, pr_src[q])]]
                s_dst[ns] = v
                ns += 1
                q = pr_next[q]

    return s_src[:ns], s_dst[:ns], st_x[:nst], st_h[:nst], cparent


@njit
def linearize(node_count, present, offsets, targets, indeg):
    """Stack-driven topological visit (ready nodes pushed in list order).

    Initial ready nodes are pushed in ascending id. Returns the visit order.
    """
    count = np.zeros(node_count, np.int64)
    stack = np.empty(node_count, np.int64)
    out = np.empty(node_count, np.int64)
    sp = 0
    for v in range(node_count):
        if present[v] and indeg[v] == 0:
            stack[sp] = v
            sp += 1
    k = 0
    while sp > 0:
        sp -= 1
        v = stack[sp]
        out[k] = v
        k += 1
        for e in range(offsets[v], offsets[v + 1]):
            w = targets[e]
            count[w] += 1
            if count[w] == indeg[w]:
                stack[sp] = w
                sp += 1
    return out[:k]
