"""Interval DP kernel shared by the 2WCST and split-tree solvers.

Values are integers encoding ``real * M + eps``; the same source runs under
numba (int64 arrays) or as plain Python on lists of arbitrary-size ints.
"""

from __future__ import annotations

try:
    import numba

    _jit = numba.njit(cache=True, nogil=True)
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

    def _jit(fn):
        fn.py_func = fn
        return fn


LEAF = -1
EQUAL = -2
NONE = -3


@_jit
def fill_2wcst(m, wpre, order, cut_ok, eq_ok, offset, table, choice, lorder, topw, cbest, carg, inf):
    for length in range(m):
        for a in range(m - length):
            b = a + length
            # keys of [a, b] heaviest first, with prefix sums of their weights
            k = 0
            topw[0] = 0
            for t in range(len(order)):
                c = order[t]
                if a <= c and c <= b:
                    lorder[k] = c
                    topw[k + 1] = topw[k] + (wpre[c + 1] - wpre[c])
                    k += 1
            for h in range(k + 1):
                cbest[h] = inf
                carg[h] = NONE
            # cut-major sweep: both child rows are read contiguously in h
            for c in range(a, b):
                if not cut_ok[c]:
                    continue
                lbase = offset[a * m + c]
                rbase = offset[(c + 1) * m + b]
                nleft = c - a + 1
                nright = b - c
                hc = 0
                for h in range(k + 1):
                    if h > 0 and lorder[h - 1] <= c:
                        hc += 1
                    if nleft - hc >= 1 and nright - (h - hc) >= 1:
                        v1 = table[lbase + hc]
                        if v1 < inf:
                            v2 = table[rbase + h - hc]
                            if v2 < inf and v1 + v2 < cbest[h]:
                                cbest[h] = v1 + v2
                                carg[h] = c
            base = offset[a * m + b]
            total = wpre[b + 1] - wpre[a]
            for h in range(k, -1, -1):
                idx = base + h
                if length + 1 - h <= 1:
                    table[idx] = 0
                    choice[idx] = LEAF
                    continue
                best = inf
                bc = NONE
                if eq_ok and h < k and table[idx + 1] < inf:
                    best = table[idx + 1]
                    bc = EQUAL
                if cbest[h] < best:
                    best = cbest[h]
                    bc = carg[h]
                table[idx] = inf if bc == NONE else total - topw[h] + best
                choice[idx] = bc


@_jit
def fill_split(m, wpre, order, cut_ok, offset, table, choice, lorder, topw, cbest, carg, inf):
    """Split trees: each node holds the heaviest remaining key and may split the rest once.

    A subproblem without keys costs nothing if it holds at most one class and is
    infeasible otherwise; the no-split option is encoded as choice ``EQUAL``.
    """
    for length in range(m):
        for a in range(m - length):
            b = a + length
            # keys of [a, b] heaviest first, with prefix sums of their weights
            k = 0
            topw[0] = 0
            for t in range(len(order)):
                c = order[t]
                if a <= c and c <= b:
                    lorder[k] = c
                    topw[k + 1] = topw[k] + (wpre[c + 1] - wpre[c])
                    k += 1
            # children of S(I, h) see Top(I, h + 1) removed; index the sweep by h + 1
            for h1 in range(k + 1):
                cbest[h1] = inf
                carg[h1] = NONE
            for c in range(a, b):
                if not cut_ok[c]:
                    continue
                lbase = offset[a * m + c]
                rbase = offset[(c + 1) * m + b]
                hc = 0
                for h1 in range(1, k + 1):
                    if lorder[h1 - 1] <= c:
                        hc += 1
                    v1 = table[lbase + hc]
                    if v1 < inf:
                        v2 = table[rbase + h1 - hc]
                        if v2 < inf and v1 + v2 < cbest[h1]:
                            cbest[h1] = v1 + v2
                            carg[h1] = c
            base = offset[a * m + b]
            total = wpre[b + 1] - wpre[a]
            for h in range(k, -1, -1):
                idx = base + h
                if h == k:
                    if length + 1 - h <= 1:
                        table[idx] = 0
                        choice[idx] = LEAF
                    else:
                        table[idx] = inf
                        choice[idx] = NONE
                    continue
                best = table[idx + 1]
                bc = EQUAL if best < inf else NONE
                if cbest[h + 1] < best:
                    best = cbest[h + 1]
                    bc = carg[h + 1]
                table[idx] = inf if bc == NONE else total - topw[h] + best
                choice[idx] = bc


def garsia_wachs_list(w, sw, sid, left, right, pending, depth):
    """Combination phase of Garsia-Wachs on plain lists (any int size); fills ``depth``.

    Merge ``t`` creates node ``m + t`` from ``left[t]`` and ``right[t]``. The
    working sequence lives in ``sw``/``sid`` and is shifted in place, which is
    quadratic in the worst case; the treap version below is used for int64 weights.
    """
    m = len(w)
    t = 0
    made = 0
    i = 0
    while True:
        if t >= 3 and sw[t - 3] <= sw[t - 1]:
            k = t - 2
        elif i < m:
            sw[t] = w[i]
            sid[t] = i
            t += 1
            i += 1
            continue
        elif t > 1:
            k = t - 1
        else:
            break
        npend = 0
        while k >= 0:
            y = sw[k - 1] + sw[k]
            left[made] = sid[k - 1]
            right[made] = sid[k]
            node = m + made
            made += 1
            j = k - 1
            while j > 0 and sw[j - 1] < y:
                j -= 1
            for p in range(k - 2, j - 1, -1):
                sw[p + 1] = sw[p]
                sid[p + 1] = sid[p]
            for p in range(k + 1, t):
                sw[p - 1] = sw[p]
                sid[p - 1] = sid[p]
            t -= 1
            sw[j] = y
            sid[j] = node
            k = -1
            while True:
                if j >= 2 and sw[j] >= sw[j - 2]:
                    pending[npend] = t - j
                    npend += 1
                    k = j - 1
                    break
                if npend == 0:
                    break
                npend -= 1
                j = t - pending[npend]
    # children are created before parents, so walk merges newest first
    depth[sid[0]] = 0
    for r in range(made - 1, -1, -1):
        d = depth[m + r] + 1
        depth[left[r]] = d
        depth[right[r]] = d


# -- implicit treap over the working sequence (node 0 is the empty tree) --------


@_jit
def _pull(x, tl, tr, size, val, mx):
    size[x] = 1 + size[tl[x]] + size[tr[x]]
    best = val[x]
    if mx[tl[x]] > best:
        best = mx[tl[x]]
    if mx[tr[x]] > best:
        best = mx[tr[x]]
    mx[x] = best


@_jit
def _split(t, k, tl, tr, size, val, mx, path):
    """First ``k`` elements of ``t`` and the rest."""
    first = 0
    rest = 0
    last_first = 0
    last_rest = 0
    depth = 0
    while t != 0:
        path[depth] = t
        depth += 1
        if size[tl[t]] >= k:
            if last_rest == 0:
                rest = t
            else:
                tl[last_rest] = t
            last_rest = t
            t = tl[t]
        else:
            k -= size[tl[t]] + 1
            if last_first == 0:
                first = t
            else:
                tr[last_first] = t
            last_first = t
            t = tr[t]
    if last_first != 0:
        tr[last_first] = 0
    if last_rest != 0:
        tl[last_rest] = 0
    for d in range(depth - 1, -1, -1):
        _pull(path[d], tl, tr, size, val, mx)
    return first, rest


@_jit
def _join(a, b, tl, tr, size, val, mx, pri, path):
    root = 0
    parent = 0
    on_right = False
    depth = 0
    while a != 0 and b != 0:
        x = a if pri[a] > pri[b] else b
        if parent == 0:
            root = x
        elif on_right:
            tr[parent] = x
        else:
            tl[parent] = x
        path[depth] = x
        depth += 1
        parent = x
        if x == a:
            on_right = True
            a = tr[a]
        else:
            on_right = False
            b = tl[b]
    x = a if a != 0 else b
    if parent == 0:
        root = x
    elif on_right:
        tr[parent] = x
    else:
        tl[parent] = x
    for d in range(depth - 1, -1, -1):
        _pull(path[d], tl, tr, size, val, mx)
    return root


@_jit
def _kth(t, k, tl, tr, size):
    while True:
        s = size[tl[t]]
        if k < s:
            t = tl[t]
        elif k == s:
            return t
        else:
            k -= s + 1
            t = tr[t]


@_jit
def _last_at_least(t, y, tl, tr, size, val, mx):
    """Position of the rightmost element ``>= y`` in ``t``, or -1."""
    base = 0
    while t != 0:
        if mx[tr[t]] >= y:
            base += size[tl[t]] + 1
            t = tr[t]
        elif val[t] >= y:
            return base + size[tl[t]]
        else:
            t = tl[t]
    return -1


@_jit
def garsia_wachs(w, tl, tr, size, val, mx, pri, ident, path, left, right, pending, depth):
    """Combination phase of Garsia-Wachs in O(m log m); fills ``depth`` with the leaf depths.

    Same merge order as ``garsia_wachs_list``; the working sequence is an
    implicit treap whose node ``x`` holds weight ``val[x]`` and tree node ``ident[x]``.
    Treap arrays need ``m + 1`` slots; ``mx[0]`` must be below every weight.
    """
    m = len(w)
    seed = 88172645463325252
    root = 0
    fresh = 1
    t = 0
    made = 0
    i = 0
    while True:
        if t >= 3 and val[_kth(root, t - 3, tl, tr, size)] <= val[_kth(root, t - 1, tl, tr, size)]:
            k = t - 2
        elif i < m:
            seed ^= (seed << 13) & 0x7FFFFFFFFFFFFFFF
            seed ^= seed >> 7
            seed ^= (seed << 17) & 0x7FFFFFFFFFFFFFFF
            x = fresh
            fresh += 1
            tl[x] = 0
            tr[x] = 0
            val[x] = w[i]
            ident[x] = i
            pri[x] = seed & 0x7FFFFFFFFFFFFFFF
            _pull(x, tl, tr, size, val, mx)
            root = _join(root, x, tl, tr, size, val, mx, pri, path)
            t += 1
            i += 1
            continue
        elif t > 1:
            k = t - 1
        else:
            break
        npend = 0
        while k >= 0:
            head, rest = _split(root, k - 1, tl, tr, size, val, mx, path)
            pair, tail = _split(rest, 2, tl, tr, size, val, mx, path)
            a = _kth(pair, 0, tl, tr, size)
            b = _kth(pair, 1, tl, tr, size)
            y = val[a] + val[b]
            left[made] = ident[a]
            right[made] = ident[b]
            # reuse slot a for the merged node
            x = a
            tl[x] = 0
            tr[x] = 0
            val[x] = y
            ident[x] = m + made
            made += 1
            _pull(x, tl, tr, size, val, mx)
            j = _last_at_least(head, y, tl, tr, size, val, mx) + 1
            front, back = _split(head, j, tl, tr, size, val, mx, path)
            root = _join(_join(front, x, tl, tr, size, val, mx, pri, path), back, tl, tr, size, val, mx, pri, path)
            root = _join(root, tail, tl, tr, size, val, mx, pri, path)
            t -= 1
            k = -1
            while True:
                if j >= 2 and val[_kth(root, j, tl, tr, size)] >= val[_kth(root, j - 2, tl, tr, size)]:
                    pending[npend] = t - j
                    npend += 1
                    k = j - 1
                    break
                if npend == 0:
                    break
                npend -= 1
                j = t - pending[npend]
    depth[ident[root]] = 0
    for r in range(made - 1, -1, -1):
        d = depth[m + r] + 1
        depth[left[r]] = d
        depth[right[r]] = d


@_jit
def alphabetic_shape(depths, sdepth, sfirst, sid, left, right, boundary):
    """Merge adjacent equal-depth subtrees left to right; returns 1 if the depths form a full tree.

    Internal node ``r`` joins ``left[r]`` and ``right[r]`` (ids ``< m`` are leaves,
    ``m + r`` internal); ``boundary[r]`` is the first leaf of its right subtree.
    """
    m = len(depths)
    top = 0
    made = 0
    for i in range(m):
        sdepth[top] = depths[i]
        sfirst[top] = i
        sid[top] = i
        top += 1
        while top >= 2 and sdepth[top - 1] == sdepth[top - 2]:
            left[made] = sid[top - 2]
            right[made] = sid[top - 1]
            boundary[made] = sfirst[top - 1]
            sdepth[top - 2] = sdepth[top - 1] - 1
            sid[top - 2] = m + made
            made += 1
            top -= 1
    if top == 1 and sdepth[0] == 0:
        return 1
    return 0
