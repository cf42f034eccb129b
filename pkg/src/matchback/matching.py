"""Exact matching engines, b-matching costs f, and the generalized solver.

Three interchangeable engines compute minimum-cost perfect b-matchings of a
simple graph (the quantity f(z) = min c'x with Mx = z, x >= 0 integer):

  * "expand-dp":      vertex-copy expansion + bitmask DP perfect matching,
                      the mandatory reference engine (expansion <= 22 nodes);
  * "expand-blossom": same expansion, blossom matcher (exact for integer
                      weights), optional polynomial engine;
  * "bnb":            branch and bound directly on the edge values with
                      residual propagation; handles large right-hand sides.

Engines agree exactly wherever more than one applies (differentially
tested); "auto" picks by expansion size.  f(z) = +infinity is represented
by the Infinite singleton, which only supports comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import FormError, INF, incidence_graph


class Infinite:
    """Value above every rational; arithmetic deliberately unsupported."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("matchback-infinite")


INFINITE = Infinite()


def is_infinite(v):
    return v is INFINITE


@dataclass(frozen=True)
class Matching:
    edges: tuple       # edge indices
    cost: int


class CapExceeded(FormError):
    pass


# -- perfect matching engines ----------------------------------------------

def _dp_perfect_matching(m, edges, costs):
    if m % 2:
        return None
    if m == 0:
        return Matching((), 0)
    if m > 22:
        raise CapExceeded("bitmask DP capped at 22 vertices")
    best_edge = {}
    for idx, (i, j) in enumerate(edges):
        key = (min(i, j), max(i, j))
        if i == j:
            continue
        old = best_edge.get(key)
        if old is None or costs[idx] < costs[old]:
            best_edge[key] = idx
    adj = [[] for _ in range(m)]
    for (i, j), idx in sorted(best_edge.items()):
        adj[i].append((j, idx))
        adj[j].append((i, idx))
    full = (1 << m) - 1
    dp = [None] * (full + 1)
    choice = [None] * (full + 1)
    dp[0] = 0
    for mask in range(full + 1):
        if dp[mask] is None:
            continue
        i = 0
        while mask >> i & 1:
            i += 1
        if i >= m:
            continue
        base = dp[mask]
        for j, idx in adj[i]:
            if mask >> j & 1:
                continue
            nmask = mask | (1 << i) | (1 << j)
            cand = base + costs[idx]
            if dp[nmask] is None or cand < dp[nmask]:
                dp[nmask] = cand
                choice[nmask] = (mask, idx)
    if dp[full] is None:
        return None
    picked = []
    mask = full
    while mask:
        prev, idx = choice[mask]
        picked.append(idx)
        mask = prev
    picked.sort()
    return Matching(tuple(picked), dp[full])


def _blossom_perfect_matching(m, edges, costs):
    import networkx as nx

    if m % 2:
        return None
    if m == 0:
        return Matching((), 0)
    graph = nx.Graph()
    graph.add_nodes_from(range(m))
    best = {}
    for idx, (i, j) in enumerate(edges):
        if i == j:
            continue
        key = (min(i, j), max(i, j))
        if key not in best or costs[idx] < costs[best[key]]:
            best[key] = idx
    for (i, j), idx in best.items():
        graph.add_edge(i, j, weight=-costs[idx], index=idx)
    mate = nx.max_weight_matching(graph, maxcardinality=True)
    if 2 * len(mate) != m:
        return None
    picked = sorted(graph[i][j]["index"] for i, j in mate)
    cost = sum(costs[idx] for idx in picked)
    return Matching(tuple(picked), cost)


def min_cost_perfect_matching(m, edges, costs, engine="auto"):
    """Exact minimum-cost perfect matching; None when infeasible.

    The bitmask DP is the mandatory engine (m <= 22); the blossom engine is
    an optional polynomial-time path that must agree with the DP wherever
    both run.
    """
    if engine == "auto":
        engine = "dp" if m <= 14 else "blossom"
    if engine == "dp":
        return _dp_perfect_matching(m, edges, costs)
    if engine == "blossom":
        return _blossom_perfect_matching(m, edges, costs)
    raise ValueError("unknown matching engine %r" % engine)


# -- b-matching value/solution ----------------------------------------------

def _bnb_bmatching(c, edges, z):
    """Branch and bound for min c'x with vertex sums exactly z, x >= 0.

    Propagation: a vertex with zero residual zeroes its free edges; a vertex
    whose last free edge remains is forced.  Cost bound uses the static caps
    of negative-cost edges.
    """
    m = len(z)
    n = len(edges)
    if sum(z) % 2:
        return None
    caps = [min(z[i], z[j]) for (i, j) in edges]
    incident = [[] for _ in range(m)]
    for idx, (i, j) in enumerate(edges):
        incident[i].append(idx)
        incident[j].append(idx)

    best = [None]
    best_x = [None]

    def lower_bound(fixed, cost):
        # c >= 0 edges cannot improve on 0; negative edges at their caps
        return cost + sum(c[j] * caps[j] for j in range(n)
                          if fixed[j] is None and c[j] < 0)

    def rec(fixed, resid, cost):
        if best[0] is not None and lower_bound(fixed, cost) >= best[0]:
            return
        # propagate forced values
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
                    if resid[other] < val:
                        return
                    fixed[j] = val
                    resid[i1] -= val
                    resid[i2] -= val
                    cost += c[j] * val
                    changed = True
            if best[0] is not None and lower_bound(fixed, cost) >= best[0]:
                return
        if all(r == 0 for r in resid):
            x = [v if v is not None else 0 for v in fixed]
            if best[0] is None or cost < best[0]:
                best[0] = cost
                best_x[0] = x
            return
        v = next(i for i in range(m) if resid[i] > 0)
        free = [j for j in incident[v] if fixed[j] is None]
        if not free:
            return
        j = free[0]
        i1, i2 = edges[j]
        other = i2 if i1 == v else i1
        hi = min(resid[v], resid[other])
        values = list(range(hi + 1))
        if c[j] < 0:
            values.reverse()
        for val in values:
            nf = fixed[:]
            nf[j] = val
            nr = resid[:]
            nr[i1] -= val
            nr[i2] -= val
            rec(nf, nr, cost + c[j] * val)

    rec([None] * n, list(z), 0)
    if best[0] is None:
        return None
    return best[0], tuple(best_x[0])


def _expansion_bmatching(c, edges, z, engine):
    from .reduction import expand_graph

    exp = expand_graph(len(z), edges, z)
    ecosts = [c[exp.origin[idx]] for idx in range(len(exp.edges))]
    match = min_cost_perfect_matching(exp.m, exp.edges, ecosts, engine=engine)
    if match is None:
        return None
    x = [0] * len(edges)
    for idx in match.edges:
        x[exp.origin[idx]] += 1
    return match.cost, tuple(x)


def bmatching_min_cost(c, edges, z, engine="auto"):
    """(value, x) of a minimum-cost perfect z-matching, or None.

    edges are (i, j) pairs of a simple graph on len(z) vertices.
    """
    if any(v < 0 for v in z):
        return None
    if engine == "auto":
        norm = sum(z)
        if norm <= 10:
            engine = "expand-dp"
        else:
            engine = "bnb"
    if engine == "bnb":
        return _bnb_bmatching(c, edges, z)
    if engine == "expand-dp":
        return _expansion_bmatching(c, edges, z, "dp")
    if engine == "expand-blossom":
        return _expansion_bmatching(c, edges, z, "blossom")
    raise ValueError("unknown b-matching engine %r" % engine)


def f_cm(c, M, z, cap=64, engine="auto"):
    """Minimum cost of a perfect z-matching of G(M); INFINITE if none.

    G(M) must be simple (run the reduction pipeline first otherwise) and z
    nonnegative, else the value is INFINITE outright.  The evaluation cap
    guards the expansion size ||z||_1.
    """
    graph = incidence_graph(M)
    edges = graph.simple_edges()
    if any(v < 0 for v in z):
        return INFINITE
    if sum(z) > cap:
        raise CapExceeded(
            "f evaluation needs ||z||_1 <= %d (got %d)" % (cap, sum(z)))
    res = bmatching_min_cost(list(c), edges, list(z), engine=engine)
    return INFINITE if res is None else res[0]


class FcmEvaluator:
    """Memoized f for a fixed (c, M); also caches an optimal matching x."""

    def __init__(self, c, M, cap=64, engine="auto"):
        self.c = tuple(c)
        self.M = tuple(tuple(r) for r in M)
        graph = incidence_graph(self.M)
        self.edges = graph.simple_edges()
        self.m = len(M)
        self.cap = cap
        self.engine = engine
        self._cache = {}

    def value(self, z):
        return self._eval(tuple(z))[0]

    def argmin(self, z):
        return self._eval(tuple(z))[1]

    def __call__(self, z):
        return self.value(z)

    def _eval(self, z):
        hit = self._cache.get(z)
        if hit is not None:
            return hit
        if any(v < 0 for v in z):
            out = (INFINITE, None)
        else:
            if sum(z) > self.cap:
                raise CapExceeded(
                    "f evaluation needs ||z||_1 <= %d (got %d)"
                    % (self.cap, sum(z)))
            res = bmatching_min_cost(list(self.c), self.edges, list(z),
                                     engine=self.engine)
            out = (INFINITE, None) if res is None else res
        self._cache[z] = out
        return out

    def domain_box(self, box_hi):
        """All z in prod([0, box_hi_i]) with f(z) finite."""
        import itertools

        out = []
        for z in itertools.product(*(range(hi + 1) for hi in box_hi)):
            if not is_infinite(self.value(z)):
                out.append(z)
        return out


# -- generalized matching (form G) ------------------------------------------

@dataclass(frozen=True)
class SolveResult:
    status: str            # "optimal" | "infeasible" | "unbounded"
    value: object = None
    y: tuple = ()
    x: tuple = ()
    detail: dict = None


def solve_generalized_matching(inst, f_cap=4096):
    """Exact optimum of a form-(G) instance (p = h = 0, ||M||_1 <= 2).

    Route: exact LP relaxation; unboundedness resolved by a c = 0 re-solve;
    proximity box from the circuit bound; reduction to perfect b-matching
    form; solve; pull the solution back.
    """
    from .proximity import lp_relaxation_vertex, proximity_box
    from .reduction import normalize_to_b_matching, pull_back, Infeasible

    if inst.form() != "G":
        raise FormError("solve_generalized_matching needs p = h = 0")
    lp = lp_relaxation_vertex(inst)
    if lp.status == "infeasible":
        return SolveResult("infeasible")
    if lp.status == "unbounded":
        zero = inst.__class__(
            inst.p, inst.h, inst.m, inst.n, inst.a, (0,) * inst.n,
            inst.C, inst.W, inst.T, inst.M, inst.d, inst.b,
            inst.e, inst.g, inst.l, inst.u)
        feas = solve_generalized_matching(zero, f_cap=f_cap)
        if feas.status == "infeasible":
            return SolveResult("infeasible")
        return SolveResult("unbounded", y=feas.y, x=feas.x,
                           detail={"ray": lp.ray})
    lo, hi = proximity_box(inst, lp)
    boxed = inst.__class__(
        inst.p, inst.h, inst.m, inst.n, inst.a, inst.c,
        inst.C, inst.W, inst.T, inst.M, inst.d, inst.b,
        lo[:inst.p], hi[:inst.p], lo[inst.p:], hi[inst.p:])
    reduced, smap = normalize_to_b_matching(boxed)
    if isinstance(reduced, Infeasible):
        return SolveResult("infeasible")
    sol = _solve_normalized(reduced, f_cap)
    if sol is None:
        return SolveResult("infeasible")
    red_value, xred = sol
    y, x = pull_back(smap, (), xred)
    assert inst.is_feasible(y, x)
    assert inst.objective(y, x) == red_value + smap.offset
    return SolveResult("optimal", inst.objective(y, x), y, x)


def _solve_normalized(reduced, f_cap=4096):
    """Value and solution of a normalized b-matching instance (p = h = 0,
    G(M) simple, l = 0, u = inf)."""
    if any(v < 0 for v in reduced.b):
        return None
    if reduced.m == 0:
        # only nonnegativity; c >= 0 after reduction, so x = 0
        x = tuple(0 for _ in range(reduced.n))
        return 0, x
    graph = incidence_graph(reduced.M)
    edges = graph.simple_edges()
    if sum(reduced.b) > f_cap:
        raise CapExceeded("normalized right-hand side exceeds cap")
    res = bmatching_min_cost(list(reduced.c), edges, list(reduced.b))
    return res


# -- parity-constrained optimization (separation-oracle reduction) ----------

def parity_constrained_opt(c_tilde, c, M, r, U, f_cap=4096):
    """min c_tilde'(c'x, Mx) over Mx = r (mod 2), Mx <= U*1, x >= 0 integer.

    Implements the slack substitution M x + 2 I s = U*1 - r_tilde with
    r_tilde = (U*1 + r) mod 2 and delegates to the generalized matching
    solver.  A negative leading coefficient of c_tilde makes the problem
    unbounded whenever it is feasible, so that case is re-solved with
    c_tilde = 0 to decide between "unbounded" and "empty".
    """
    from .instance import make_instance

    m = len(M)
    n = len(M[0]) if m else 0
    if any(v not in (0, 1) for v in r):
        raise FormError("parity vector must be 0/1")
    if U < 0:
        raise FormError("box bound U must be nonnegative")
    omega_coef = c_tilde[0]
    if omega_coef < 0:
        probe = parity_constrained_opt((0,) * (m + 1), c, M, r, U, f_cap)
        if probe.status == "infeasible":
            return SolveResult("infeasible")
        return SolveResult("unbounded", y=(), x=probe.x)
    r_tilde = [(U + r[i]) % 2 for i in range(m)]
    rhs = [U - r_tilde[i] for i in range(m)]
    if any(v < 0 for v in rhs):
        return SolveResult("infeasible")
    obj = []
    for j in range(n):
        coef = omega_coef * c[j]
        for i in range(m):
            coef += c_tilde[1 + i] * M[i][j]
        obj.append(coef)
    big_m = [list(M[i]) + [2 if k == i else 0 for k in range(m)]
             for i in range(m)]
    inst = make_instance(
        m=m, n=n + m, c=tuple(obj) + (0,) * m, M=big_m, b=rhs,
        l=(0,) * (n + m), u=(INF,) * (n + m))
    res = solve_generalized_matching(inst, f_cap=f_cap)
    if res.status != "optimal":
        return res
    x = res.x[:n]
    z = tuple(sum(M[i][j] * x[j] for j in range(n)) for i in range(m))
    omega = sum(c[j] * x[j] for j in range(n))
    value = omega_coef * omega + sum(
        c_tilde[1 + i] * z[i] for i in range(m))
    return SolveResult("optimal", value, x=x,
                       detail={"omega": omega, "z": z})
