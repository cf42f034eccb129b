"""Mixed-backdoor solver, Graver augmentation, and the hardness generator.

solve_mixed handles the general block form: exact LP relaxation, proximity
box, recursive guessing of the backdoor variables with per-level LP
re-solves and shrinking circuit-bound ranges, and a leaf pipeline for the
remaining wide instances (normalize -> vertex-copy expansion -> base-B
condensation -> randomized constrained-matching value).  Leaves outside
the Pfaffian desk caps fall back to exact bounded enumeration, so answers
are always exact; the randomized route carries an explicit failure budget.
Solutions are recovered per variable by binary search on restricted
re-solves and verified exactly before returning.

The Graver alternative optimizes wide instances by augmenting steps that
are at least as good as any Graver element inside the current bounds
(computed by bounded exact search over the kernel box); feasibility comes
from the usual auxiliary instance with slack identity blocks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .instance import IlpInstance, INF, NEG_INF, FormError, make_instance
from .matching import SolveResult, solve_generalized_matching
from .oracle import brute_force_solve
from .pfaffian import exact_matching_objective, derive_seed
from .proximity import (instance_c_inf_bound, lp_relaxation_vertex,
                        proximity_box)
from .reduction import (Infeasible, condense_constraints, expand_gb,
                        normalize_to_b_matching)


# -- leaf solving -------------------------------------------------------------

PFAFFIAN_VERTEX_CAP = 12      # expansion size admitted to the Pfaffian route
PFAFFIAN_DEGREE_CAP = 64     # condensed target degree admitted


@dataclass
class LeafStats:
    pfaffian_leaves: int = 0
    enumerated_leaves: int = 0
    failure_bound: object = 0   # accumulated probability bound


def _leaf_value(inst, seed, trials, stats, engine="auto"):
    """Exact optimal value of a form-(W) leaf with finite bounds, or None.

    engine: "auto" runs the reduction chain into the randomized
    constrained-matching solver when the expansion and condensed degree fit
    the desk caps, else exact bounded enumeration; "enum" forces
    enumeration; "pfaffian" forces the randomized route (errors past caps).
    """
    if inst.p:
        raise FormError("leaf must be form (W)")
    if inst.h == 0:
        res = solve_generalized_matching(inst)
        return res.value if res.status == "optimal" else None
    if engine == "enum":
        stats.enumerated_leaves += 1
        res = brute_force_solve(inst)
        if res.status == "budget-exceeded":
            raise FormError("leaf enumeration budget exceeded")
        return res.value if res.status == "optimal" else None

    red1, map1 = normalize_to_b_matching(inst)
    chain_ok = not isinstance(red1, Infeasible)
    if chain_ok and any(v < 0 for v in red1.b):
        return None
    if chain_ok and sum(red1.b) > PFAFFIAN_VERTEX_CAP:
        chain_ok = False
    if chain_ok:
        red2, map2 = expand_gb(red1)
        cond = condense_constraints(red2)
        if isinstance(cond[0], Infeasible):
            return None
        red3, _ = cond
        if red3.h == 1 and red3.d[0] <= PFAFFIAN_DEGREE_CAP:
            stats.pfaffian_leaves += 1
            r = exact_matching_objective(red3, seed=seed, trials=trials)
            if r.status == "value":
                return r.value + map1.offset
            if r.status == "probably-infeasible":
                stats.failure_bound = stats.failure_bound + r.failure_bound
            return None
        chain_ok = red3.h == 0
        if chain_ok:
            stats.pfaffian_leaves += 1
            res = solve_generalized_matching(red3)
            return (res.value + map1.offset) if res.status == "optimal" else None
    if engine == "pfaffian":
        raise FormError("leaf exceeds the Pfaffian desk caps")
    stats.enumerated_leaves += 1
    res = brute_force_solve(inst)
    if res.status == "budget-exceeded":
        raise FormError("leaf enumeration budget exceeded")
    return res.value if res.status == "optimal" else None


def _fix_first_y(inst, value):
    """Substitute y_1 = value: drop the column, update the right-hand sides."""
    d = tuple(inst.d[i] - inst.C[i][0] * value for i in range(inst.h))
    b = tuple(inst.b[i] - inst.T[i][0] * value for i in range(inst.m))
    return IlpInstance(inst.p - 1, inst.h, inst.m, inst.n,
                       inst.a[1:], inst.c,
                       tuple(r[1:] for r in inst.C), inst.W,
                       tuple(r[1:] for r in inst.T), inst.M,
                       d, b, inst.e[1:], inst.g[1:], inst.l, inst.u)


def _restrict_x(inst, j, lo, hi):
    l = list(inst.l)
    u = list(inst.u)
    l[j], u[j] = lo, hi
    return IlpInstance(inst.p, inst.h, inst.m, inst.n, inst.a, inst.c,
                       inst.C, inst.W, inst.T, inst.M, inst.d, inst.b,
                       inst.e, inst.g, tuple(l), tuple(u))


def _enumerate_leaves(inst, prefix, out):
    """Recursive backdoor guessing: per-level LP re-solve and proximity
    range for the first remaining y variable."""
    if inst.p == 0:
        out.append((prefix, inst))
        return
    lp = lp_relaxation_vertex(inst)
    if lp.status == "infeasible":
        return
    assert lp.status == "optimal", "bounded relaxation cannot be unbounded"
    radius = (inst.p + inst.n) * instance_c_inf_bound(inst)
    y1 = lp.x[0]
    lo_f = y1 - radius
    hi_f = y1 + radius
    lo = max(int(inst.e[0]), lo_f.numerator // lo_f.denominator)
    hi = min(int(inst.g[0]), -((-hi_f.numerator) // hi_f.denominator))
    for value in range(lo, hi + 1):
        _enumerate_leaves(_fix_first_y(inst, value), prefix + (value,), out)


def solve_mixed(inst, seed=0, trials=20, leaf_engine="auto",
                fail_budget=10 ** -6):
    """Exact optimum / infeasible / unbounded for any block instance."""
    lp = lp_relaxation_vertex(inst)
    if lp.status == "infeasible":
        return SolveResult("infeasible")
    if lp.status == "unbounded":
        zero = IlpInstance(inst.p, inst.h, inst.m, inst.n,
                           (0,) * inst.p, (0,) * inst.n,
                           inst.C, inst.W, inst.T, inst.M, inst.d, inst.b,
                           inst.e, inst.g, inst.l, inst.u)
        feas = solve_mixed(zero, seed=seed, trials=trials,
                           leaf_engine=leaf_engine)
        if feas.status == "infeasible":
            return SolveResult("infeasible")
        return SolveResult("unbounded", y=feas.y, x=feas.x,
                           detail={"ray": lp.ray})
    lo, hi = proximity_box(inst, lp)
    boxed = IlpInstance(inst.p, inst.h, inst.m, inst.n, inst.a, inst.c,
                        inst.C, inst.W, inst.T, inst.M, inst.d, inst.b,
                        lo[:inst.p], hi[:inst.p], lo[inst.p:], hi[inst.p:])
    leaves = []
    _enumerate_leaves(boxed, (), leaves)
    if not leaves:
        return SolveResult("infeasible")
    stats = LeafStats()
    leaf_trials = max(trials,
                      math.ceil(math.log2(max(len(leaves), 1) / fail_budget)))
    best = None
    for idx, (prefix, leaf) in enumerate(leaves):
        val = _leaf_value(leaf, derive_seed(seed, "leaf-%d" % idx),
                          leaf_trials, stats, engine=leaf_engine)
        if val is None:
            continue
        a_off = sum(inst.a[k] * prefix[k] for k in range(inst.p))
        total = val + a_off
        if best is None or (total, prefix) < best[:2]:
            best = (total, prefix, idx, leaf)
    if best is None:
        return SolveResult("infeasible")
    value, prefix, idx, leaf = best

    # per-variable binary search recovery on the best leaf
    leaf_value_target = value - sum(
        inst.a[k] * prefix[k] for k in range(inst.p))
    cur = leaf
    xsol = []
    for j in range(leaf.n):
        lo_j, hi_j = int(cur.l[j]), int(cur.u[j])
        step = 0
        while lo_j < hi_j:
            mid = (lo_j + hi_j) // 2
            probe = _restrict_x(cur, j, lo_j, mid)
            val = _leaf_value(probe,
                              derive_seed(seed, "rec-%d-%d-%d" % (idx, j, step)),
                              leaf_trials, stats, engine=leaf_engine)
            step += 1
            if val is not None and val == leaf_value_target:
                hi_j = mid
            else:
                lo_j = mid + 1
        cur = _restrict_x(cur, j, lo_j, lo_j)
        xsol.append(lo_j)
    y = prefix
    x = tuple(xsol)
    assert inst.is_feasible(y, x), "recovered solution failed verification"
    assert inst.objective(y, x) == value
    return SolveResult("optimal", value, y, x,
                       detail={"leaves": len(leaves),
                               "pfaffian_leaves": stats.pfaffian_leaves,
                               "enumerated_leaves": stats.enumerated_leaves,
                               "failure_bound": stats.failure_bound,
                               "leaf_trials": leaf_trials})


# -- Graver machinery ---------------------------------------------------------

@dataclass(frozen=True)
class GraverSet:
    elements: tuple
    cap: int
    complete: bool

    @property
    def g_inf(self):
        return max((max(abs(v) for v in g) for g in self.elements), default=0)

    @property
    def g_1(self):
        return max((sum(abs(v) for v in g) for g in self.elements), default=0)


def _conformal_le(g1, g2):
    return all(abs(a) <= abs(b) and a * b >= 0 for a, b in zip(g1, g2))


def _kernel_points_in_box(A, lows, highs, limit=2 * 10 ** 6):
    """All integer kernel points of A in the box, by pruned enumeration."""
    m = len(A)
    n = len(A[0]) if m else 0
    suff_min = [[0] * (n + 1) for _ in range(m)]
    suff_max = [[0] * (n + 1) for _ in range(m)]
    for i in range(m):
        for j in range(n - 1, -1, -1):
            c = A[i][j]
            lo_t = min(c * lows[j], c * highs[j])
            hi_t = max(c * lows[j], c * highs[j])
            suff_min[i][j] = suff_min[i][j + 1] + lo_t
            suff_max[i][j] = suff_max[i][j + 1] + hi_t
    out = []
    vec = [0] * n
    partial = [0] * m
    count = 0

    def rec(j):
        nonlocal count
        count += 1
        if count > limit:
            raise FormError("kernel box enumeration limit exceeded")
        for i in range(m):
            need = -partial[i]
            if need < suff_min[i][j] or need > suff_max[i][j]:
                return
        if j == n:
            out.append(tuple(vec))
            return
        for v in range(lows[j], highs[j] + 1):
            vec[j] = v
            for i in range(m):
                partial[i] += A[i][j] * v
            rec(j + 1)
            for i in range(m):
                partial[i] -= A[i][j] * v
        vec[j] = 0

    rec(0)
    return out


def graver_basis_inf_bound(h, delta, m):
    """Proven infinity-norm bound for Graver elements of (W; M) stacks:
    2*(2*Delta*h*(2m+1) + 1)^h; specializes to 2 for a bare matching block."""
    if h == 0:
        return 2
    return 2 * (2 * delta * h * (2 * m + 1) + 1) ** h


def graver_enumerate(A, cap=6, n_cap=8, proven_bound=None):
    """Graver basis elements within the infinity-norm cap.

    Complete (flagged) when cap >= the proven bound for the matrix class;
    conformal minimality is filtered by pairwise dominance checks, which is
    sound because any dominator also lies inside the cap box.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if n > n_cap:
        raise FormError("graver enumeration capped at %d columns" % n_cap)
    pts = _kernel_points_in_box(A, [-cap] * n, [cap] * n)
    pts = [g for g in pts if any(g)]
    elements = []
    for g in pts:
        minimal = True
        for g2 in pts:
            if g2 != g and _conformal_le(g2, g):
                minimal = False
                break
        if minimal:
            elements.append(g)
    elements.sort()
    complete = proven_bound is not None and cap >= proven_bound
    return GraverSet(tuple(elements), cap, complete)


def graver_best_step(inst, x, bound=None):
    """Augmenting step at least as good as any Graver element in the box.

    Solves min c'z over (W; M) z = 0, l - x <= z <= u - x intersected with
    the proven Graver norm box, by exact pruned enumeration.  Returns
    (z, delta_cost) with delta_cost < 0, or None when no improving step
    exists.
    """
    if inst.p:
        raise FormError("graver steps apply to form (W) instances")
    if bound is None:
        bound = graver_basis_inf_bound(inst.h, inst.delta, inst.m)
    A = [list(inst.W[i]) for i in range(inst.h)] + \
        [list(inst.M[i]) for i in range(inst.m)]
    lows = []
    highs = []
    for j in range(inst.n):
        lo = inst.l[j] - x[j] if inst.l[j] != NEG_INF else -bound
        hi = inst.u[j] - x[j] if inst.u[j] != INF else bound
        lows.append(int(max(lo, -bound)))
        highs.append(int(min(hi, bound)))
        if lows[-1] > highs[-1]:
            return None
    best = None
    for z in _kernel_points_in_box(A, lows, highs):
        delta = sum(c * v for c, v in zip(inst.c, z))
        if delta < 0 and (best is None or delta < best[1] or
                          (delta == best[1] and z < best[0])):
            best = (z, delta)
    return best


def _auxiliary_feasibility_instance(inst):
    """Wide instance with slack identity blocks and start point (0, d, b)."""
    n, h, m = inst.n, inst.h, inst.m
    rhs = list(inst.d) + list(inst.b)
    nn = n + h + m
    W = [[0] * nn for _ in range(h)]
    M = [[0] * nn for _ in range(m)]
    for i in range(h):
        W[i][:n] = list(inst.W[i])
        W[i][n + i] = 1
    for i in range(m):
        M[i][:n] = list(inst.M[i])
        M[i][n + h + i] = 1
    c = [0] * n + [1 if v >= 0 else -1 for v in rhs]
    l = [0] * n + [min(v, 0) for v in rhs]
    u = [int(v) for v in (tuple(inst.u[j] - inst.l[j] for j in range(n)))] + \
        [max(v, 0) for v in rhs]
    return make_instance(p=0, h=h, m=m, n=nn, c=c, W=W, M=M,
                         d=inst.d, b=inst.b, l=l, u=u)


def solve_wide_graver(inst, query_log=None):
    """Exact optimum of a finite-bound form-(W) instance by Graver-best
    augmentation; phase 1 drives an auxiliary slack instance to zero."""
    if inst.p:
        raise FormError("solve_wide_graver needs p = 0")
    if not inst.finite_bounds():
        raise FormError("solve_wide_graver needs finite bounds "
                        "(apply a proximity box first)")
    queries = 0

    def augment(cur_inst, x):
        nonlocal queries
        x = list(x)
        val = cur_inst.objective((), x)
        while True:
            queries += 1
            step = graver_best_step(cur_inst, x)
            if step is None:
                return tuple(x), val
            z, delta = step
            assert delta < 0
            x = [a + b for a, b in zip(x, z)]
            val += delta
            assert cur_inst.is_feasible((), x)

    # translate x' = x - l so the auxiliary start (0, d', b') is in bounds
    shift = [int(v) for v in inst.l]
    d_sh = tuple(inst.d[i] - sum(inst.W[i][j] * shift[j]
                                 for j in range(inst.n))
                 for i in range(inst.h))
    b_sh = tuple(inst.b[i] - sum(inst.M[i][j] * shift[j]
                                 for j in range(inst.n))
                 for i in range(inst.m))
    translated = IlpInstance(
        0, inst.h, inst.m, inst.n, (), inst.c, inst.C, inst.W,
        tuple(() for _ in range(inst.m)), inst.M,
        d_sh, b_sh, (), (),
        tuple(0 for _ in range(inst.n)),
        tuple(int(inst.u[j] - inst.l[j]) for j in range(inst.n)))

    aux = _auxiliary_feasibility_instance(translated)
    start = tuple([0] * inst.n + list(d_sh) + list(b_sh))
    assert aux.is_feasible((), start)
    aux_sol, aux_val = augment(aux, start)
    if aux_val != 0:
        if query_log is not None:
            query_log.append(queries)
        return SolveResult("infeasible", detail={"queries": queries})
    x0 = list(aux_sol[:inst.n])
    assert translated.is_feasible((), x0)
    xt, val = augment(translated, x0)
    x = tuple(a + s for a, s in zip(xt, shift))
    assert inst.is_feasible((), x)
    value = inst.objective((), x)
    if query_log is not None:
        query_log.append(queries)
    return SolveResult("optimal", value, (), x, detail={"queries": queries})


# -- hardness instance generator ----------------------------------------------

def sidon_sequence(count):
    """Greedy B2 sequence (Mian-Chowla style) with explicit verification
    that all pairwise sums are distinct."""
    seq = []
    sums = set()
    candidate = 1
    while len(seq) < count:
        new_sums = {candidate + s for s in seq} | {2 * candidate}
        if not (new_sums & sums):
            sums |= new_sums
            seq.append(candidate)
        candidate += 1
    for i in range(len(seq)):
        for j in range(i, len(seq)):
            for k in range(len(seq)):
                for l in range(k, len(seq)):
                    if (i, j) < (k, l):
                        assert seq[i] + seq[j] != seq[k] + seq[l]
    return seq


@dataclass(frozen=True)
class PsiHardnessInstance:
    instance: IlpInstance       # final: W in {0,1}, M disjoint even cycles
    base_W: tuple               # pre-gadget nonnegative system
    base_d: tuple
    var_names: tuple            # base variable labels ("w:v" and "f:e")
    quad_map: object            # SolutionMap of the quadrangle padding
    coeff_map: object           # SolutionMap of the 0/1 coefficient reduction


def partitioned_subgraph_iso(pattern_edges, pattern_vertices, host_edges,
                             partition):
    """Brute-force existence of a partition-respecting homomorphism mapping
    pattern edges onto host edges."""
    host_adj = {frozenset(e) for e in host_edges}
    choices = [partition[w] for w in pattern_vertices]
    for combo in itertools.product(*choices):
        phi = dict(zip(pattern_vertices, combo))
        if all(frozenset((phi[w1], phi[w2])) in host_adj
               for w1, w2 in pattern_edges):
            return True
    return False


def gen_psi_hardness(pattern_edges, pattern_vertices, host_edges,
                     host_vertices, partition):
    """Wide 0/1 instance whose feasibility encodes partitioned subgraph
    isomorphism; adjacency is encoded through a Sidon sequence, variables
    are then embedded in quadrangles and the coefficients split to 0/1.
    """
    for w in pattern_vertices:
        if w not in partition:
            raise FormError("partition must cover every pattern vertex")
    covered = [v for w in pattern_vertices for v in partition[w]]
    if sorted(covered) != sorted(host_vertices):
        raise FormError("partition classes must partition the host vertices")

    sidon = dict(zip(sorted(host_vertices), sidon_sequence(len(host_vertices))))
    smax = 2 * max(sidon.values(), default=0) + 1

    var_names = []
    for w in pattern_vertices:
        for v in partition[w]:
            var_names.append(("vertex", w, v))
    for f in pattern_edges:
        for e in host_edges:
            var_names.append(("edge", f, e))
    index = {name: j for j, name in enumerate(var_names)}
    nvars = len(var_names)

    rows = []
    rhs = []
    for f in pattern_edges:
        w1, w2 = f
        row = [0] * nvars
        for v in partition[w1]:
            row[index[("vertex", w1, v)]] += sidon[v]
        for v in partition[w2]:
            row[index[("vertex", w2, v)]] += sidon[v]
        for e in host_edges:
            v1, v2 = e
            row[index[("edge", f, e)]] += smax - sidon[v1] - sidon[v2]
        rows.append(row)
        rhs.append(smax)
    for w in pattern_vertices:
        row = [0] * nvars
        for v in partition[w]:
            row[index[("vertex", w, v)]] = 1
        rows.append(row)
        rhs.append(1)
    for f in pattern_edges:
        row = [0] * nvars
        for e in host_edges:
            row[index[("edge", f, e)]] = 1
        rows.append(row)
        rhs.append(1)

    from .reduction import add_quadrangles, reduce_coefficients_to_01
    quad_inst, quad_map = add_quadrangles(rows, rhs)
    final, coeff_map = reduce_coefficients_to_01(quad_inst)
    return PsiHardnessInstance(final, tuple(tuple(r) for r in rows),
                               tuple(rhs), tuple(var_names),
                               quad_map, coeff_map)


def base_system_feasible(base_W, base_d, selectors):
    """Exhaustive feasibility of the base 0/1 system by enumerating one
    choice per selector group (the choose-one rows make other patterns
    infeasible outright)."""
    n = len(base_W[0]) if base_W else 0
    for combo in itertools.product(*selectors):
        x = [0] * n
        for j in combo:
            x[j] = 1
        if all(sum(r[j] * x[j] for j in range(n)) == dv
               for r, dv in zip(base_W, base_d)):
            return True
    return False
