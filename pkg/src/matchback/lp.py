"""Exact rational simplex (Bland's rule) with certificates.

Core solver works on min c'x, Ax = b, x >= 0 over Fractions; a wrapper maps
general integer/infinite bounds onto that form.  All pivoting is exact, so
termination is guaranteed by Bland's anti-cycling rule and every reported
status carries an exactly-checkable certificate: optimal vertices come with
equality duals, infeasibility with a Farkas vector, unboundedness with an
improving ray.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .instance import INF, NEG_INF


@dataclass(frozen=True)
class LpResult:
    status: str                 # "optimal" | "infeasible" | "unbounded"
    x: tuple = ()               # primal vertex (optimal) or feasible point (unbounded)
    objective: object = None    # Fraction
    dual: tuple = ()            # equality-row duals at optimum
    farkas: tuple = ()          # y with y'A <= 0, y'b > 0 (infeasible)
    ray: tuple = ()             # improving ray (unbounded)


def _pivot(tab, basis, r, s):
    piv = tab[r][s]
    row = [v / piv for v in tab[r]]
    tab[r] = row
    for i in range(len(tab)):
        if i != r and tab[i][s]:
            f = tab[i][s]
            tab[i] = [a - f * b for a, b in zip(tab[i], row)]
    basis[r] = s


def _bland_loop(tab, basis, obj, ncols, allowed):
    """Minimize obj (a reduced-cost row, mutated in place via pivots on tab).

    Returns ("optimal", None) or ("unbounded", entering_column).
    """
    m = len(tab)
    while True:
        s = None
        for j in range(ncols):
            if allowed[j] and obj[j] < 0:
                s = j
                break
        if s is None:
            return "optimal", None
        r = None
        best = None
        for i in range(m):
            if tab[i][s] > 0:
                ratio = tab[i][-1] / tab[i][s]
                key = (ratio, basis[i])
                if best is None or key < best:
                    best = key
                    r = i
        if r is None:
            return "unbounded", s
        piv = tab[r][s]
        row = [v / piv for v in tab[r]]
        tab[r] = row
        f = obj[s]
        if f:
            for j in range(len(obj)):
                obj[j] -= f * row[j]
        for i in range(m):
            if i != r and tab[i][s]:
                fi = tab[i][s]
                tab[i] = [a - fi * b for a, b in zip(tab[i], row)]
        basis[r] = s


def _reduced_costs(tab, basis, costs, ncols):
    obj = list(costs) + [Fraction(0)]
    for i, bi in enumerate(basis):
        f = obj[bi]
        if f:
            for j in range(ncols + 1):
                obj[j] -= f * tab[i][j]
    return obj


def _solve_dual(A_cols, basis, costs):
    """Solve y' A_B = c_B exactly (Gaussian elimination over Fractions)."""
    m = len(basis)
    sys_rows = [[A_cols[b][i] for b in basis] for i in range(m)]
    rhs = [costs[b] for b in basis]
    # transpose system: columns indexed by y; A_B' y = c_B
    mat = [[sys_rows[i][k] for i in range(m)] + [rhs[k]] for k in range(m)]
    piv_cols = []
    row = 0
    for col in range(m):
        sel = next((i for i in range(row, m) if mat[i][col]), None)
        if sel is None:
            continue
        mat[row], mat[sel] = mat[sel], mat[row]
        pv = mat[row][col]
        mat[row] = [v / pv for v in mat[row]]
        for i in range(m):
            if i != row and mat[i][col]:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[row])]
        piv_cols.append(col)
        row += 1
    y = [Fraction(0)] * m
    for i, col in enumerate(piv_cols):
        y[col] = mat[i][-1]
    return y


def simplex_standard(c, A, b):
    """min c'x s.t. Ax = b, x >= 0, everything Fraction-exact."""
    m = len(A)
    n = len(A[0]) if m else len(c)
    c = [Fraction(v) for v in c]
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    flip = [1] * m
    for i in range(m):
        if b[i] < 0:
            flip[i] = -1
            b[i] = -b[i]
            A[i] = [-v for v in A[i]]
    if m == 0:
        if any(v < 0 for v in c):
            j = min(i for i in range(n) if c[i] < 0)
            ray = [Fraction(0)] * n
            ray[j] = Fraction(1)
            return LpResult("unbounded", tuple(Fraction(0) for _ in range(n)),
                            None, ray=tuple(ray))
        return LpResult("optimal", tuple(Fraction(0) for _ in range(n)),
                        Fraction(0), dual=())

    ncols = n + m
    tab = []
    for i in range(m):
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        tab.append(A[i] + art + [b[i]])
    basis = [n + i for i in range(m)]
    cols = [[tab[i][j] for i in range(m)] for j in range(ncols)]

    phase1 = [Fraction(0)] * n + [Fraction(1)] * m
    obj = _reduced_costs(tab, basis, phase1, ncols)
    allowed = [True] * ncols
    status, _ = _bland_loop(tab, basis, obj, ncols, allowed)
    assert status == "optimal"
    p1val = sum(phase1[bi] * tab[i][-1] for i, bi in enumerate(basis))
    if p1val > 0:
        y = _solve_dual(cols, basis, phase1)
        farkas = tuple(flip[i] * y[i] for i in range(m))
        return LpResult("infeasible", farkas=farkas)

    # drive artificials out of the basis; rows without a real pivot are
    # redundant and their artificial stays pinned at zero
    for i in range(m):
        if basis[i] >= n:
            s = next((j for j in range(n) if tab[i][j] != 0), None)
            if s is not None:
                _pivot(tab, basis, i, s)
    for j in range(n, ncols):
        allowed[j] = False

    obj = _reduced_costs(tab, basis, c + [Fraction(0)] * m, ncols)
    status, s = _bland_loop(tab, basis, obj, ncols, allowed)
    x = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = tab[i][-1]
    if status == "unbounded":
        ray = [Fraction(0)] * n
        ray[s] = Fraction(1)
        for i, bi in enumerate(basis):
            if bi < n:
                ray[bi] = -tab[i][s]
        return LpResult("unbounded", tuple(x), None, ray=tuple(ray))
    full_costs = c + [Fraction(0)] * m
    y = _solve_dual(cols, basis, full_costs)
    dual = tuple(flip[i] * y[i] for i in range(m))
    objective = sum(ci * xi for ci, xi in zip(c, x))
    return LpResult("optimal", tuple(x), objective, dual=dual)


def solve_lp_bounded(c, A, b, lower, upper):
    """min c'x s.t. Ax = b, lower <= x <= upper (entries int or +/-inf).

    Returns LpResult in the original variable space; `dual` holds the duals
    of the original equality rows.  Certificates (farkas) refer to the
    internally extended system and are revalidated by callers that need them.
    """
    m = len(A)
    n = len(c)
    recipes = []          # per original var: how to recover from internal vars
    int_cols = []         # internal columns as dicts {row: coef} pre upper-rows
    int_costs = []
    const_obj = Fraction(0)
    b_adj = [Fraction(v) for v in b]
    upper_rows = []       # (internal_col, width)

    def col_of(j):
        return [Fraction(A[i][j]) for i in range(m)]

    for j in range(n):
        lo, up = lower[j], upper[j]
        cj = Fraction(c[j])
        if lo != NEG_INF and up != INF and lo == up:
            recipes.append(("const", lo))
            for i in range(m):
                b_adj[i] -= Fraction(A[i][j] * lo)
            const_obj += cj * lo
            continue
        if lo != NEG_INF:
            if lo != 0:
                for i in range(m):
                    b_adj[i] -= Fraction(A[i][j] * lo)
                const_obj += cj * lo
            idx = len(int_cols)
            int_cols.append(col_of(j))
            int_costs.append(cj)
            if up != INF:
                upper_rows.append((idx, Fraction(up - lo)))
            recipes.append(("shift", idx, lo))
        elif up != INF:
            # x = up - x', x' >= 0
            for i in range(m):
                b_adj[i] -= Fraction(A[i][j] * up)
            const_obj += cj * up
            idx = len(int_cols)
            int_cols.append([-v for v in col_of(j)])
            int_costs.append(-cj)
            recipes.append(("negshift", idx, up))
        else:
            idx = len(int_cols)
            int_cols.append(col_of(j))
            int_costs.append(cj)
            int_cols.append([-v for v in col_of(j)])
            int_costs.append(-cj)
            recipes.append(("split", idx, idx + 1))

    nint = len(int_cols)
    nrows = m + len(upper_rows)
    A_int = [[Fraction(0)] * (nint + len(upper_rows)) for _ in range(nrows)]
    for jj, col in enumerate(int_cols):
        for i in range(m):
            A_int[i][jj] = col[i]
    b_int = list(b_adj)
    for k, (jj, width) in enumerate(upper_rows):
        A_int[m + k][jj] = Fraction(1)
        A_int[m + k][nint + k] = Fraction(1)   # slack
        b_int.append(width)
    costs = int_costs + [Fraction(0)] * len(upper_rows)

    res = simplex_standard(costs, A_int, b_int)

    def recover(vec):
        out = []
        for rec in recipes:
            if rec[0] == "const":
                out.append(Fraction(rec[1]))
            elif rec[0] == "shift":
                out.append(vec[rec[1]] + rec[2])
            elif rec[0] == "negshift":
                out.append(Fraction(rec[2]) - vec[rec[1]])
            else:
                out.append(vec[rec[1]] - vec[rec[2]])
        return tuple(out)

    def recover_ray(vec):
        out = []
        for rec in recipes:
            if rec[0] == "const":
                out.append(Fraction(0))
            elif rec[0] == "shift":
                out.append(vec[rec[1]])
            elif rec[0] == "negshift":
                out.append(-vec[rec[1]])
            else:
                out.append(vec[rec[1]] - vec[rec[2]])
        return tuple(out)

    if res.status == "infeasible":
        return LpResult("infeasible", farkas=res.farkas)
    if res.status == "unbounded":
        return LpResult("unbounded", recover(res.x), None,
                        ray=recover_ray(res.ray))
    return LpResult("optimal", recover(res.x), res.objective + const_obj,
                    dual=res.dual[:m])
