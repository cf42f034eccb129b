"""Brute-force ground truth for every solver in the package.

Enumeration is lexicographic over the integer box; partial assignments are
discarded only by infeasibility short-circuits (an equality row whose
remaining variables cannot reach the right-hand side), never by objective
reasoning, so the first optimum found is the lexicographically smallest.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import INF, NEG_INF, FormError


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_points: int = 10 ** 7


@dataclass(frozen=True)
class OracleResult:
    status: str          # "optimal" | "infeasible" | "budget-exceeded"
    value: object = None
    y: tuple = ()
    x: tuple = ()
    all_optima: tuple = ()


def _finite_box(inst, box=None):
    lows = list(inst.e + inst.l)
    highs = list(inst.g + inst.u)
    if box is not None:
        blo, bhi = box
        lows = [max(a, bb) for a, bb in zip(lows, blo)]
        highs = [min(a, bb) for a, bb in zip(highs, bhi)]
    for lo, hi in zip(lows, highs):
        if lo == NEG_INF or hi == INF:
            raise FormError("brute force needs finite bounds or a caller box")
    return [int(v) for v in lows], [int(v) for v in highs]


def brute_force_solve(inst, budget=None, box=None, collect_all=False):
    """Exhaustive scan of the integer box of inst (intersected with box).

    Row-interval pruning: after fixing a prefix of the variables, any row
    whose unfixed part cannot close the residual interval kills the subtree.
    """
    budget = budget or OracleBudget()
    lows, highs = _finite_box(inst, box)
    nvars = inst.p + inst.n
    obj = list(inst.a + inst.c)
    rows = []
    rhs = []
    for i in range(inst.h):
        rows.append(list(inst.C[i]) + list(inst.W[i]))
        rhs.append(inst.d[i])
    for i in range(inst.m):
        rows.append(list(inst.T[i]) + list(inst.M[i]))
        rhs.append(inst.b[i])
    nrows = len(rows)

    # residual-interval tables: min/max of sum over the still-free suffix
    suff_min = [[0] * (nvars + 1) for _ in range(nrows)]
    suff_max = [[0] * (nvars + 1) for _ in range(nrows)]
    for i in range(nrows):
        for j in range(nvars - 1, -1, -1):
            coef = rows[i][j]
            lo_term = min(coef * lows[j], coef * highs[j])
            hi_term = max(coef * lows[j], coef * highs[j])
            suff_min[i][j] = suff_min[i][j + 1] + lo_term
            suff_max[i][j] = suff_max[i][j + 1] + hi_term

    best = None
    best_vec = None
    optima = []
    points = 0
    vec = [0] * nvars
    partial = [0] * nrows

    def rec(j):
        nonlocal best, best_vec, points
        for i in range(nrows):
            need = rhs[i] - partial[i]
            if need < suff_min[i][j] or need > suff_max[i][j]:
                return
        if j == nvars:
            points += 1
            if points > budget.max_points:
                raise BudgetExceeded()
            val = sum(o * v for o, v in zip(obj, vec))
            if best is None or val < best:
                best = val
                best_vec = tuple(vec)
                if collect_all:
                    optima.clear()
                    optima.append(tuple(vec))
            elif collect_all and val == best:
                optima.append(tuple(vec))
            return
        for v in range(lows[j], highs[j] + 1):
            vec[j] = v
            for i in range(nrows):
                partial[i] += rows[i][j] * v
            rec(j + 1)
            for i in range(nrows):
                partial[i] -= rows[i][j] * v
        vec[j] = 0

    try:
        rec(0)
    except BudgetExceeded:
        return OracleResult("budget-exceeded")
    if best is None:
        return OracleResult("infeasible")
    return OracleResult("optimal", best, best_vec[:inst.p], best_vec[inst.p:],
                        tuple(optima))


def enumerate_perfect_matchings(m, edges):
    """All perfect matchings (as tuples of edge indices) of a graph on m
    vertices; recursive pairing of the lowest-index uncovered vertex."""
    if m > 16:
        raise FormError("perfect matching enumeration capped at m <= 16")
    if m % 2:
        return []
    by_vertex = [[] for _ in range(m)]
    for idx, (i, j) in enumerate(edges):
        by_vertex[i].append((idx, j))
        by_vertex[j].append((idx, i))
    out = []
    covered = [False] * m

    def rec(chosen):
        v = next((i for i in range(m) if not covered[i]), None)
        if v is None:
            out.append(tuple(chosen))
            return
        covered[v] = True
        for idx, w in by_vertex[v]:
            if not covered[w] and w != v:
                covered[w] = True
                chosen.append(idx)
                rec(chosen)
                chosen.pop()
                covered[w] = False
        covered[v] = False

    rec([])
    return out


def brute_force_f(c, M, z, cap=10 ** 7):
    """Direct evaluation of the minimum z-matching cost: min c'x subject to
    Mx = z over 0 <= x_j <= ||z||_1, by pruned enumeration.  Returns the
    integer minimum or None when no perfect z-matching exists."""
    m = len(M)
    n = len(M[0]) if m else 0
    if any(v < 0 for v in z):
        return None
    norm1 = sum(z)
    highs = []
    for j in range(n):
        entries = [M[i][j] for i in range(m)]
        if all(v >= 0 for v in entries) and any(v > 0 for v in entries):
            cap_j = min(z[i] // M[i][j] for i in range(m) if M[i][j] > 0)
            highs.append(min(norm1, cap_j))
        else:
            highs.append(norm1)
    suff_min = [[0] * (n + 1) for _ in range(m)]
    suff_max = [[0] * (n + 1) for _ in range(m)]
    for i in range(m):
        for j in range(n - 1, -1, -1):
            coef = M[i][j]
            suff_min[i][j] = suff_min[i][j + 1] + min(0, coef * highs[j])
            suff_max[i][j] = suff_max[i][j + 1] + max(0, coef * highs[j])
    best = None
    partial = [0] * m
    count = 0

    def rec(j, cost):
        nonlocal best, count
        count += 1
        if count > cap:
            raise BudgetExceeded()
        for i in range(m):
            need = z[i] - partial[i]
            if need < suff_min[i][j] or need > suff_max[i][j]:
                return
        if j == n:
            if best is None or cost < best:
                best = cost
            return
        for v in range(highs[j] + 1):
            for i in range(m):
                partial[i] += M[i][j] * v
            rec(j + 1, cost + c[j] * v)
            for i in range(m):
                partial[i] -= M[i][j] * v

    try:
        rec(0, 0)
    except BudgetExceeded:
        raise FormError("brute_force_f enumeration cap exceeded") from None
    return best
