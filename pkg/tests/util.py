"""Shared builders for the test suites (seeded, deterministic)."""

import itertools
import random

from matchback.instance import make_instance


def random_matching_block(rng, m, n, simple=False):
    M = [[0] * n for _ in range(m)]
    if simple:
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        rng.shuffle(pairs)
        chosen = sorted(pairs[:n])
        for j, (i1, i2) in enumerate(chosen):
            M[i1][j] = 1
            M[i2][j] = 1
        return M, len(chosen)
    for j in range(n):
        kind = rng.choice(["pair", "pair", "mixed", "single", "loop", "empty"])
        if m == 0:
            kind = "empty"
        if kind in ("pair", "mixed") and m >= 2:
            i1, i2 = rng.sample(range(m), 2)
            M[i1][j] = 1 if kind == "pair" else rng.choice([1, -1])
            M[i2][j] = rng.choice([1, -1])
        elif kind == "single" and m >= 1:
            M[rng.randrange(m)][j] = rng.choice([1, -1])
        elif kind == "loop" and m >= 1:
            M[rng.randrange(m)][j] = rng.choice([2, -2])
    return M, n


def random_block_instance(rng, p, h, m, n, delta=2, width=3, base=1,
                          rhs=3, obj=2, c_nonneg=False, simple=False):
    M, n = random_matching_block(rng, m, n, simple=simple)
    e = [rng.randint(-base, base) for _ in range(p)]
    g = [ev + rng.randint(0, width) for ev in e]
    l = [rng.randint(-base, base) for _ in range(n)]
    u = [lv + rng.randint(0, width) for lv in l]
    c_lo = 0 if c_nonneg else -obj
    return make_instance(
        p=p, h=h, m=m, n=n,
        a=[rng.randint(-obj, obj) for _ in range(p)],
        c=[rng.randint(c_lo, obj) for _ in range(n)],
        C=[[rng.randint(-delta, delta) for _ in range(p)] for _ in range(h)],
        W=[[rng.randint(-delta, delta) for _ in range(n)] for _ in range(h)],
        T=[[rng.randint(-delta, delta) for _ in range(p)] for _ in range(m)],
        M=M,
        d=[rng.randint(-rhs, rhs) for _ in range(h)],
        b=[rng.randint(-rhs, rhs) for _ in range(m)],
        e=e, g=g, l=l, u=u)


def random_feasible_instance(rng, p, h, m, n, delta=2, width=3, base=1,
                             obj=2, c_nonneg=False, simple=False):
    """Block instance whose right-hand sides come from a planted integer
    point inside the bounds, so the ILP is always feasible."""
    inst = random_block_instance(rng, p, h, m, n, delta=delta, width=width,
                                 base=base, obj=obj, c_nonneg=c_nonneg,
                                 simple=simple)
    y0 = [rng.randint(int(inst.e[k]), int(inst.g[k])) for k in range(inst.p)]
    x0 = [rng.randint(int(inst.l[j]), int(inst.u[j])) for j in range(inst.n)]
    d = tuple(sum(inst.C[i][k] * y0[k] for k in range(inst.p)) +
              sum(inst.W[i][j] * x0[j] for j in range(inst.n))
              for i in range(inst.h))
    b = tuple(sum(inst.T[i][k] * y0[k] for k in range(inst.p)) +
              sum(inst.M[i][j] * x0[j] for j in range(inst.n))
              for i in range(inst.m))
    return make_instance(p=inst.p, h=inst.h, m=inst.m, n=inst.n,
                         a=inst.a, c=inst.c, C=inst.C, W=inst.W, T=inst.T,
                         M=inst.M, d=d, b=b, e=inst.e, g=inst.g,
                         l=inst.l, u=inst.u)


def random_simple_graph(rng, m, max_edges=None):
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    rng.shuffle(pairs)
    count = rng.randint(1, len(pairs)) if pairs else 0
    if max_edges is not None:
        count = min(count, max_edges)
    edges = sorted(pairs[:count])
    M = [[0] * len(edges) for _ in range(m)]
    for j, (i1, i2) in enumerate(edges):
        M[i1][j] = 1
        M[i2][j] = 1
    return edges, M


def enumerate_bmatchings(edges, z):
    """All nonnegative integer edge vectors with the exact vertex sums z.

    Forced-value propagation (zero-residual vertices zero their free edges,
    a last free edge is pinned to the residual) keeps the search tree near
    the solution count.
    """
    m = len(z)
    n = len(edges)
    incident = [[] for _ in range(m)]
    for idx, (i, j) in enumerate(edges):
        incident[i].append(idx)
        incident[j].append(idx)
    out = []
    if sum(z) % 2:
        return out

    def rec(fixed, resid):
        fixed = fixed[:]
        resid = resid[:]
        changed = True
        while changed:
            changed = False
            for v in range(m):
                if resid[v] < 0:
                    return
                free = [j for j in incident[v] if fixed[j] is None]
                if not free:
                    if resid[v] != 0:
                        return
                    continue
                if resid[v] == 0:
                    for j in free:
                        fixed[j] = 0
                    changed = True
                elif len(free) == 1:
                    j = free[0]
                    i1, i2 = edges[j]
                    val = resid[v]
                    other = i2 if i1 == v else i1
                    if other != v and resid[other] < val:
                        return
                    fixed[j] = val
                    resid[i1] -= val
                    if i2 != i1:
                        resid[i2] -= val
                    changed = True
        if all(r == 0 for r in resid):
            sol = [v if v is not None else 0 for v in fixed]
            if all(f is None or f == s for f, s in zip(fixed, sol)):
                out.append(tuple(sol))
            return
        v = next(i for i in range(m) if resid[i] > 0)
        free = [j for j in incident[v] if fixed[j] is None]
        if not free:
            return
        j = free[0]
        i1, i2 = edges[j]
        other = i2 if i1 == v else i1
        hi = min(resid[v], resid[other]) if other != v else 0
        for val in range(hi + 1):
            nf = fixed[:]
            nf[j] = val
            nr = resid[:]
            nr[i1] -= val
            nr[i2] -= val
            rec(nf, nr)

    rec([None] * n, list(z))
    return out
