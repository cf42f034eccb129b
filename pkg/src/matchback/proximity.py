"""Circuit enumeration, the explicit circuit bound, proximity boxes, and
the tight lower-bound instance family.

A circuit of an integer matrix is a support-minimal kernel vector with
coprime entries; the largest circuit entry c_inf(A) controls how far an
optimal integer solution can sit from an optimal LP vertex (distance at
most (#columns) * c_inf(A) in the infinity norm).  For block matrices
(C W; T M) with matching block M the explicit bound is

    c_inf(A) <= (Delta * rank(A))^(p+h) * 2^(2p+3h+3),

with Delta the largest backdoor-block entry (clamped to >= 1, since the
bound's derivation assumes a positive coefficient range).  The lower-bound
generator emits instances whose unique integral solution is a factor
k*(Delta*k)^(p+h) away from an LP vertex, certifying near-tightness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .instance import INF, NEG_INF, FormError, make_instance
from .lp import LpResult, solve_lp_bounded

# exact-rational LP results (status, vertex, objective, certificates)
RationalLpResult = LpResult


@dataclass(frozen=True)
class Circuit:
    vector: tuple

    @property
    def support(self):
        return frozenset(i for i, v in enumerate(self.vector) if v)

    @property
    def norm_inf(self):
        return max((abs(v) for v in self.vector), default=0)


def _kernel_basis(A_cols):
    """Kernel basis of the matrix with the given columns (lists), exact."""
    ncols = len(A_cols)
    nrows = len(A_cols[0]) if ncols else 0
    mat = [[Fraction(A_cols[j][i]) for j in range(ncols)]
           for i in range(nrows)]
    pivots = []
    row = 0
    for col in range(ncols):
        sel = next((i for i in range(row, len(mat)) if mat[i][col]), None)
        if sel is None:
            continue
        mat[row], mat[sel] = mat[sel], mat[row]
        pv = mat[row][col]
        mat[row] = [v / pv for v in mat[row]]
        for i in range(len(mat)):
            if i != row and mat[i][col]:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[row])]
        pivots.append(col)
        row += 1
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for fcol in free:
        vec = [Fraction(0)] * ncols
        vec[fcol] = Fraction(1)
        for i, pcol in enumerate(pivots):
            vec[pcol] = -mat[i][fcol]
        basis.append(vec)
    return basis


def matrix_rank(A):
    m = len(A)
    n = len(A[0]) if m else 0
    cols = [[A[i][j] for i in range(m)] for j in range(n)]
    return n - len(_kernel_basis(cols)) if n else 0


def _normalize_kernel_vector(vec):
    denom = 1
    for v in vec:
        denom = denom * v.denominator // gcd(denom, v.denominator)
    ints = [int(v * denom) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g:
        ints = [v // g for v in ints]
    lead = next((v for v in ints if v), 0)
    if lead < 0:
        ints = [-v for v in ints]
    return tuple(ints)


def enumerate_circuits(A, n_cap=14):
    """All circuits of A, by support enumeration + exact kernel solves.

    A support is kept when the restricted kernel is one-dimensional with a
    vector of full support; support-minimality is then filtered by subset
    checks (minimal supports always surface this way).
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if n > n_cap:
        raise FormError("circuit enumeration capped at %d columns" % n_cap)
    candidates = {}
    cols = [[A[i][j] for i in range(m)] for j in range(n)]
    for size in range(1, n + 1):
        for support in itertools.combinations(range(n), size):
            basis = _kernel_basis([cols[j] for j in support])
            if len(basis) != 1:
                continue
            vec = basis[0]
            if any(v == 0 for v in vec):
                continue
            full = [0] * n
            for pos, j in enumerate(support):
                full[j] = vec[pos]
            norm = _normalize_kernel_vector([Fraction(v) for v in full])
            candidates[frozenset(support)] = Circuit(norm)
    kept = []
    for sup in sorted(candidates, key=len):
        if any(k.support < sup for k in kept):
            continue
        kept.append(candidates[sup])
    return tuple(kept)


def c_inf(A, n_cap=14):
    """Max infinity norm over circuits; 0 for a trivial kernel."""
    circuits = enumerate_circuits(A, n_cap)
    return max((c.norm_inf for c in circuits), default=0)


def circuit_bound(p, h, delta, rank):
    """Explicit bound (Delta*rank)^(p+h) * 2^(2p+3h+3), Delta clamped >= 1."""
    delta = max(delta, 1)
    return (delta * rank) ** (p + h) * 2 ** (2 * p + 3 * h + 3)


def check_circuit_bound(A, p, h, delta):
    """(passes, c_inf, bound) for a declared block decomposition of A."""
    rank = matrix_rank(A)
    bound = circuit_bound(p, h, delta, rank)
    observed = c_inf(A)
    return observed <= bound, observed, bound


def assemble_matrix(inst):
    rows = []
    for i in range(inst.h):
        rows.append(list(inst.C[i]) + list(inst.W[i]))
    for i in range(inst.m):
        rows.append(list(inst.T[i]) + list(inst.M[i]))
    return rows


def lp_relaxation_vertex(inst):
    """Exact rational vertex of the LP relaxation of a block instance."""
    A = assemble_matrix(inst)
    b = list(inst.d) + list(inst.b)
    c = list(inst.a) + list(inst.c)
    lower = list(inst.e) + list(inst.l)
    upper = list(inst.g) + list(inst.u)
    return solve_lp_bounded(c, A, b, lower, upper)


def instance_c_inf_bound(inst, n_cap=14):
    """Exact c_inf when the matrix is enumerable, else the explicit bound."""
    A = assemble_matrix(inst)
    ncols = inst.p + inst.n
    if ncols <= n_cap:
        return c_inf(A, n_cap)
    return circuit_bound(inst.p, inst.h, inst.delta, matrix_rank(A))


def proximity_box(inst, lp, n_cap=14):
    """Integer box around an optimal LP vertex guaranteed to contain an
    optimal integral solution whenever one exists: vertex +- N*c_inf(A)
    (N = number of columns), intersected with the original bounds and
    rounded outward."""
    if lp.status != "optimal":
        raise FormError("proximity box needs an optimal LP result")
    ncols = inst.p + inst.n
    bound = instance_c_inf_bound(inst, n_cap)
    radius = ncols * bound
    lows = []
    highs = []
    olow = list(inst.e) + list(inst.l)
    ohigh = list(inst.g) + list(inst.u)
    for j in range(ncols):
        xi = lp.x[j]
        lo = xi - radius
        hi = xi + radius
        lo_int = lo.numerator // lo.denominator          # floor
        hi_int = -((-hi.numerator) // hi.denominator)    # ceil
        lo_v = lo_int if olow[j] == NEG_INF else max(lo_int, olow[j])
        hi_v = hi_int if ohigh[j] == INF else min(hi_int, ohigh[j])
        lows.append(lo_v)
        highs.append(hi_v)
    return tuple(lows), tuple(highs)


# -- lower-bound instance family --------------------------------------------

def _chain_blocks(h, delta, k):
    """Wide chain forcing x2 = (delta*k)^h * x1.

    Returns (Wt, Mw, names) where Wt has h rows, Mw the matching-block rows,
    over variables [x1, x2, group_1 (k), carry_1, group_2 (k), carry_2, ...,
    group_h (k)] (carries absent for h = 0, where the block is x1 - x2 = 0).
    """
    if h == 0:
        return [], [[1, -1]], 2
    nvars = 2 + h * k + (h - 1)
    Wt = [[0] * nvars for _ in range(h)]
    Mw = []

    def group_start(i):
        return 2 + i * (k + 1)

    # driver of chain i: x1 for i=0, else carry i-1
    def driver(i):
        return 0 if i == 0 else group_start(i - 1) + k

    for i in range(h):
        gs = group_start(i)
        # chain rows: group vars all equal the driver
        row = [0] * nvars
        row[driver(i)] = 1
        row[gs] = -1
        Mw.append(row)
        for t in range(1, k):
            row = [0] * nvars
            row[gs + t - 1] = 1
            row[gs + t] = -1
            Mw.append(row)
        # wide row: delta * sum(group i) - next = 0
        target = 1 if i == h - 1 else gs + k
        for t in range(k):
            Wt[i][gs + t] = delta
        Wt[i][target] = -1
    return Wt, Mw, nvars


def gen_proximity_lb(p, h, delta, k):
    """Instance family with proximity k*(delta*k)^(p+h).

    Returns (instance, fractional_vertex, integral_solution, gap_var) where
    gap_var indexes the variable whose integral value is k*(delta*k)^(p+h)
    while the supplied LP vertex has it at 0.  Objective is zero, l = 0,
    u = inf.
    """
    if p < 0 or h < 0 or delta < 1 or k < 1:
        raise FormError("need p,h >= 0, delta >= 1, k >= 1")
    if p == 0:
        Wt, Mw, nw = _chain_blocks(h, delta, k)
        # variables: alpha (k), beta (k), x (nw)
        n = 2 * k + nw
        W = [[0] * n for _ in range(h)]
        for i in range(h):
            for j in range(nw):
                W[i][2 * k + j] = Wt[i][j]
        M = []
        b = []
        for row in Mw:
            M.append([0] * (2 * k) + row)
            b.append(0)
        for i in range(k):
            row = [0] * n
            row[i] = 2
            row[k + i] = 1
            M.append(row)
            b.append(1)
        row = [0] * n
        for i in range(k):
            row[k + i] = 1
        row[2 * k] = -1           # x1 sits first in the chain block
        M.append(row)
        b.append(0)
        d = [0] * h
        inst = make_instance(p=0, h=h, m=len(M), n=n, W=W, M=M, d=d, b=b,
                             l=(0,) * n, u=(INF,) * n)
        frac = [Fraction(1, 2)] * k + [Fraction(0)] * k + [Fraction(0)] * nw
        integral = _propagate_unique(inst)
        gap_var = 2 * k + 1       # x2
        return inst, tuple(frac), integral, gap_var

    # p > 0: tall cascade producing w_out = (delta*k)^p * y1, y1 = sum(delta)
    # variables (x-part): u = [w_out, groups (p*k), gamma (k), delta (k)]
    nu = 1 + p * k + 2 * k
    T_rows = []
    Mt = []
    bt = []

    def grp(i):
        return 1 + i * k

    gamma0 = 1 + p * k
    delta0 = gamma0 + k
    # gadget rows: 2*gamma_i + delta_i = 1
    for i in range(k):
        row = [0] * nu
        row[gamma0 + i] = 2
        row[delta0 + i] = 1
        Mt.append(row)
        T_rows.append([0] * p)
        bt.append(1)
    # y1 = sum(delta)
    row = [0] * nu
    for i in range(k):
        row[delta0 + i] = 1
    Mt.append(row)
    trow = [0] * p
    trow[0] = -1
    T_rows.append(trow)
    bt.append(0)
    # cascades: group i vars equal delta * y_i; next y = sum of group
    for i in range(p):
        for t in range(k):
            row = [0] * nu
            row[grp(i) + t] = -1
            Mt.append(row)
            trow = [0] * p
            trow[i] = delta
            T_rows.append(trow)
            bt.append(0)
        row = [0] * nu
        for t in range(k):
            row[grp(i) + t] = 1
        if i < p - 1:
            trow = [0] * p
            trow[i + 1] = -1
            Mt.append(row)
            T_rows.append(trow)
            bt.append(0)
        else:
            row[0] = -1            # w_out collects the last group
            Mt.append(row)
            T_rows.append([0] * p)
            bt.append(0)

    if h == 0:
        n = nu
        inst = make_instance(p=p, h=0, m=len(Mt), n=n,
                             T=T_rows, M=Mt, b=bt,
                             e=(0,) * p, g=(INF,) * p,
                             l=(0,) * n, u=(INF,) * n)
        frac = [Fraction(0)] * (p + nu)
        for i in range(k):
            frac[p + gamma0 + i] = Fraction(1, 2)
        integral = _propagate_unique(inst)
        return inst, tuple(frac), integral, 0

    # p > 0 and h >= 1: join along u_1 = x_1
    Wt, Mw, nw = _chain_blocks(h, delta, k)
    n = nu + nw
    W = [[0] * n for _ in range(h)]
    for i in range(h):
        for j in range(nw):
            W[i][nu + j] = Wt[i][j]
    M = []
    T = []
    b = []
    for row in Mw:
        M.append([0] * nu + row)
        T.append([0] * p)
        b.append(0)
    join = [0] * n
    join[0] = 1              # u_1 = w_out
    join[nu] = -1            # x_1 of the wide chain
    M.append(join)
    T.append([0] * p)
    b.append(0)
    for row, trow, rhs in zip(Mt, T_rows, bt):
        M.append(row + [0] * nw)
        T.append(trow)
        b.append(rhs)
    inst = make_instance(p=p, h=h, m=len(M), n=n, T=T, W=W, M=M,
                         d=[0] * h, b=b,
                         e=(0,) * p, g=(INF,) * p, l=(0,) * n, u=(INF,) * n)
    frac = [Fraction(0)] * (p + n)
    for i in range(k):
        frac[p + gamma0 + i] = Fraction(1, 2)
    integral = _propagate_unique(inst)
    gap_var = nu + 1
    return inst, tuple(frac), integral, gap_var


def _propagate_unique(inst):
    """Solve an instance whose rows admit unique local solutions by
    fixpoint propagation; returns (y, x) and asserts full determination.

    Rows are solved as soon as at most one variable is undetermined, or
    when local enumeration over the row's bounded support is a singleton
    (the 2*gamma + delta = 1 gadgets).  Fails loudly if propagation stalls,
    which would mean the constructed family lost its forcing structure.
    """
    nvars = inst.p + inst.n
    rows = []
    rhs = []
    for i in range(inst.h):
        rows.append(list(inst.C[i]) + list(inst.W[i]))
        rhs.append(inst.d[i])
    for i in range(inst.m):
        rows.append(list(inst.T[i]) + list(inst.M[i]))
        rhs.append(inst.b[i])
    value = [None] * nvars
    changed = True
    while changed:
        changed = False
        for ridx, row in enumerate(rows):
            unknown = [j for j in range(nvars) if row[j] and value[j] is None]
            if not unknown:
                continue
            resid = rhs[ridx] - sum(row[j] * value[j] for j in range(nvars)
                                    if row[j] and value[j] is not None)
            if len(unknown) == 1:
                j = unknown[0]
                q, rem = divmod(resid, row[j])
                assert rem == 0 and q >= 0, "lower-bound family lost forcing"
                value[j] = q
                changed = True
                continue
            # bounded local enumeration: all coefficients positive, resid small
            if all(row[j] > 0 for j in unknown) and 0 <= resid <= 3:
                sols = []
                for combo in itertools.product(range(resid + 1),
                                               repeat=len(unknown)):
                    if sum(row[unknown[t]] * combo[t]
                           for t in range(len(unknown))) == resid:
                        sols.append(combo)
                if len(sols) == 1:
                    for t, j in enumerate(unknown):
                        value[j] = sols[0][t]
                    changed = True
    assert all(v is not None for v in value), "propagation stalled"
    y = tuple(value[:inst.p])
    x = tuple(value[inst.p:])
    assert inst.is_feasible(y, x)
    return y, x


def is_lp_vertex(inst, point):
    """Exact basic-feasible check: the tight constraint normals at the
    point span the full column space."""
    nvars = inst.p + inst.n
    point = [Fraction(v) for v in point]
    A = assemble_matrix(inst)
    b = list(inst.d) + list(inst.b)
    normals = []
    for i, row in enumerate(A):
        lhs = sum(Fraction(row[j]) * point[j] for j in range(nvars))
        if lhs != b[i]:
            return False
        normals.append(row)
    lows = list(inst.e) + list(inst.l)
    highs = list(inst.g) + list(inst.u)
    for j in range(nvars):
        if point[j] < lows[j] or point[j] > highs[j]:
            return False
        if point[j] == lows[j] or point[j] == highs[j]:
            normal = [0] * nvars
            normal[j] = 1
            normals.append(normal)
    return matrix_rank(normals) == nvars
