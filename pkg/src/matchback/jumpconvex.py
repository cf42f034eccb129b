"""Two-step decompositions, SBO certificates, and lattice convexity of the
minimum b-matching cost f.

The cost function f(z) = min{c'x : Mx = z, x >= 0 integer} over a simple
graph G(M) admits, for any two domain points z1, z2, a decomposition of
z2 - z1 into conformal steps of 1-norm 2 with gains that telescope to
f(z2) - f(z1) and bound every partial sum (the strongly-base-orderable
property).  That property yields convexity of f on each parity class
2Z^m + r, which in turn makes the epigraph hull P_{r,U} an exact model of
the matching part of a block ILP.  This module builds the decompositions
from optimal solutions, checks the certificates exhaustively, implements
the pairwise closing move, scans boxes for convexity violations, and
decides membership in P_{r,U} at desk scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .instance import FormError, incidence_graph
from .matching import CapExceeded, FcmEvaluator, is_infinite
from .lp import simplex_standard


class CertificateError(ValueError):
    """Decomposition inputs fail an optimality/consistency check."""


@dataclass(frozen=True)
class TwoStepDecomposition:
    base: tuple          # z1
    target: tuple        # z2
    steps: tuple         # vectors p_k, each of 1-norm 2, conformal to target-base
    gains: tuple         # integers g_k summing to f(z2) - f(z1)
    f_base: int
    f_target: int


def _conformal(p, d):
    return all(abs(pi) <= abs(di) and pi * di >= 0 for pi, di in zip(p, d))


def two_step_decompose(c, M, z1, z2, x1, x2):
    """Decompose z2 - z1 into alternating-path steps in the copy graph.

    x1, x2 must be minimum-cost perfect z1-/z2-matchings; alternating
    cycles of the symmetric difference are dropped (they carry zero step
    and, by optimality, zero gain; a nonzero-gain cycle raises
    CertificateError).
    """
    z1, z2 = tuple(z1), tuple(z2)
    graph = incidence_graph(M)
    edges = graph.simple_edges()
    m = len(z1)
    zbar = [max(a, b) for a, b in zip(z1, z2)]

    def build_matching(x):
        used = [0] * m
        pairs = {}
        for j, (u, v) in enumerate(edges):
            for _ in range(x[j]):
                cu, cv = used[u], used[v]
                used[u] += 1
                used[v] += 1
                key = ((u, cu), (v, cv))
                pairs[key] = j
        for v in range(m):
            if used[v] > zbar[v]:
                raise CertificateError("solution exceeds vertex demand")
        return pairs

    m1 = build_matching(x1)
    m2 = build_matching(x2)
    sym = set(m1) ^ set(m2)
    adj = {}
    for key in sym:
        a, b = key
        adj.setdefault(a, []).append((b, key))
        adj.setdefault(b, []).append((a, key))

    seen = set()
    steps = []
    gains = []
    components = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp_nodes = set()
        comp_keys = set()
        queue = [start]
        while queue:
            node = queue.pop()
            if node in comp_nodes:
                continue
            comp_nodes.add(node)
            for other, key in adj[node]:
                comp_keys.add(key)
                if other not in comp_nodes:
                    queue.append(other)
        seen |= comp_nodes
        is_path = any(len(adj[node]) == 1 for node in comp_nodes)
        dvec = [0] * len(edges)
        for key in comp_keys:
            if key in m2:
                dvec[m2[key]] += 1
            if key in m1:
                dvec[m1[key]] -= 1
        pvec = [0] * m
        for j, (u, v) in enumerate(edges):
            pvec[u] += dvec[j]
            pvec[v] += dvec[j]
        pvec = tuple(pvec)
        gain = sum(cj * dj for cj, dj in zip(c, dvec))
        norm = sum(abs(v) for v in pvec)
        if not is_path:
            if norm != 0 or gain != 0:
                raise CertificateError(
                    "alternating cycle with nonzero step or gain; "
                    "inputs are not optimal")
            continue
        if norm != 2:
            raise CertificateError("path step has 1-norm %d != 2" % norm)
        diff = tuple(b - a for a, b in zip(z1, z2))
        if not _conformal(pvec, diff):
            raise CertificateError("step not conformal to z2 - z1")
        steps.append(pvec)
        gains.append(gain)
        components.append(sorted(comp_nodes)[0])

    order = sorted(range(len(steps)), key=lambda k: components[k])
    steps = tuple(steps[k] for k in order)
    gains = tuple(gains[k] for k in order)
    diff = tuple(b - a for a, b in zip(z1, z2))
    total = [0] * m
    for p in steps:
        for i in range(m):
            total[i] += p[i]
    if tuple(total) != diff:
        raise CertificateError("steps do not sum to z2 - z1")
    f1 = sum(cj * xj for cj, xj in zip(c, x1))
    f2 = sum(cj * xj for cj, xj in zip(c, x2))
    if sum(gains) != f2 - f1:
        raise CertificateError("gains do not telescope to f(z2) - f(z1)")
    return TwoStepDecomposition(z1, z2, steps, gains, f1, f2)


def check_sbo_certificate(f, decomp, ell_cap=20):
    """Check both certificate bullets against f: exact telescoping and the
    2^ell partial-sum inequalities.  Returns (True, None) or
    (False, witness_subset)."""
    ell = len(decomp.steps)
    if ell > ell_cap:
        raise CapExceeded("certificate check enumerates 2^ell subsets; "
                          "ell = %d exceeds cap %d" % (ell, ell_cap))
    fb = f(decomp.base)
    ft = f(decomp.target)
    if is_infinite(fb) or is_infinite(ft):
        return False, ()
    if ft != fb + sum(decomp.gains):
        return False, tuple(range(ell))
    m = len(decomp.base)
    z = list(decomp.base)
    chosen = []

    def rec(k, gsum):
        if k == ell:
            val = f(tuple(z))
            if is_infinite(val) or val > fb + gsum:
                return tuple(chosen)
            return None
        out = rec(k + 1, gsum)
        if out is not None:
            return out
        step = decomp.steps[k]
        for i in range(m):
            z[i] += step[i]
        chosen.append(k)
        out = rec(k + 1, gsum + decomp.gains[k])
        chosen.pop()
        for i in range(m):
            z[i] -= step[i]
        return out

    witness = rec(0, 0)
    if witness is None:
        return True, None
    return False, witness


def closing_step(f, z1, z2, istar, decomp):
    """Move z1 and z2 two units toward each other at coordinate istar along
    an even cycle of decomposition steps, without increasing f(z1)+f(z2).

    decomp must decompose z2 - z1; requires |z1[istar] - z2[istar]| >= 2
    and z1 = z2 (mod 2).  Returns (z1', z2')."""
    z1, z2 = tuple(z1), tuple(z2)
    m = len(z1)
    if any((a - b) % 2 for a, b in zip(z1, z2)):
        raise FormError("closing step needs z1 = z2 (mod 2)")
    gap = z1[istar] - z2[istar]
    if abs(gap) < 2:
        raise FormError("closing step needs |z1 - z2| >= 2 at istar")

    # multigraph over coordinates: one edge per step (self-loop for +/-2)
    supports = []
    for p in decomp.steps:
        nz = [i for i in range(m) if p[i]]
        supports.append(tuple(nz) if len(nz) == 2 else (nz[0], nz[0]))
    incident = [k for k, s in enumerate(supports) if istar in s]
    assert incident, "istar is isolated; hypothesis of the closing lemma fails"

    best = None
    for k0 in incident:
        a, b = supports[k0]
        if a == b:
            cand = (1, (k0,))
        else:
            w = b if a == istar else a
            # BFS shortest path w -> istar avoiding step k0
            parent = {w: None}
            frontier = [w]
            found = False
            while frontier and not found:
                nxt = []
                for node in frontier:
                    for k, s in enumerate(supports):
                        if k == k0 or node not in s or s[0] == s[1]:
                            continue
                        other = s[0] if s[1] == node else s[1]
                        if other in parent:
                            continue
                        parent[other] = (node, k)
                        if other == istar:
                            found = True
                            break
                        nxt.append(other)
                    if found:
                        break
                frontier = nxt
            if istar not in parent:
                continue
            path = []
            node = istar
            while parent[node] is not None:
                prev, k = parent[node]
                path.append(k)
                node = prev
            # require the path edges to be distinct from k0 and each other
            if len(set(path)) != len(path) or k0 in path:
                continue
            cand = (1 + len(path), tuple(sorted([k0] + path)))
        if best is None or cand < best:
            best = cand
    assert best is not None, "no cycle through istar"
    chosen = best[1]
    move = [0] * m
    for k in chosen:
        for i in range(m):
            move[i] += decomp.steps[k][i]
    z1p = tuple(a + t for a, t in zip(z1, move))
    z2p = tuple(a - t for a, t in zip(z2, move))
    sgn = 1 if gap > 0 else -1
    assert z1p[istar] == z1[istar] - 2 * sgn
    assert z2p[istar] == z2[istar] + 2 * sgn
    assert all((a - b) % 2 == 0 for a, b in zip(z1p, z2))
    assert all(t % 2 == 0 and abs(t) <= 2 for t in move)
    for i in range(m):
        if z1[i] == z2[i]:
            assert z1p[i] == z1[i] and z2p[i] == z2[i]
    fz1p, fz2p = f(z1p), f(z2p)
    f1, f2 = f(z1), f(z2)
    assert not (is_infinite(fz1p) or is_infinite(fz2p))
    assert fz1p + fz2p <= f1 + f2
    return z1p, z2p


def check_lattice_convexity(c, M, points, lambdas, evaluator=None):
    """Exact check of f(sum lambda_k z_k) <= sum lambda_k f(z_k) for points
    on a common parity class whose combination is integral and on the same
    class.  Off-lattice combinations raise FormError; an infinite f value
    with positive multiplier makes the inequality vacuous (returns True)."""
    pts = [tuple(z) for z in points]
    lam = [Fraction(t) for t in lambdas]
    if any(t < 0 for t in lam) or sum(lam) != 1:
        raise FormError("multipliers must be nonnegative and sum to 1")
    if not pts:
        raise FormError("need at least one point")
    m = len(pts[0])
    r = tuple(v % 2 for v in pts[0])
    for z in pts:
        if tuple(v % 2 for v in z) != r:
            raise FormError("points are not on a common parity class")
    combo = [sum(lam[k] * z[i] for k, z in enumerate(pts)) for i in range(m)]
    if any(v.denominator != 1 for v in combo):
        raise FormError("convex combination is off-lattice")
    w = tuple(int(v) for v in combo)
    if tuple(v % 2 for v in w) != r:
        raise FormError("convex combination leaves the parity class")
    ev = evaluator or FcmEvaluator(c, M)
    vals = [ev.value(z) for z in pts]
    if any(is_infinite(v) and lam[k] > 0 for k, v in enumerate(vals)):
        return True
    fw = ev.value(w)
    if is_infinite(fw):
        return False
    rhs = sum(lam[k] * vals[k] for k in range(len(pts)))
    return Fraction(fw) <= rhs


def convexity_scan(c, M, box_hi, evaluator=None):
    """Exhaustive desk-scale violation search over a box: every lattice
    pair with every rational multiplier along the segment, and every
    lattice triple with the centroid multiplier.  Returns None on pass or a
    violating (points, lambdas) tuple."""
    ev = evaluator or FcmEvaluator(c, M, cap=max(64, 2 * sum(box_hi)))
    dom = ev.domain_box(box_hi)
    classes = {}
    for z in dom:
        classes.setdefault(tuple(v % 2 for v in z), []).append(z)
    for _parity, pts in sorted(classes.items()):
        vals = {z: ev.value(z) for z in pts}
        # pairs: all parity-valid lattice points interior to the segment
        for z1, z2 in itertools.combinations(pts, 2):
            diff = tuple(b - a for a, b in zip(z1, z2))
            g = 0
            for v in diff:
                g = gcd(g, abs(v))
            if g <= 1:
                continue
            step = tuple(v // g for v in diff)
            stride = 1 if all(v % 2 == 0 for v in step) else 2
            for k in range(stride, g, stride):
                w = tuple(a + k * s for a, s in zip(z1, step))
                fw = ev.value(w)
                lhs_ok = not is_infinite(fw) and \
                    fw * g <= (g - k) * vals[z1] + k * vals[z2]
                if not lhs_ok:
                    lam = (Fraction(g - k, g), Fraction(k, g))
                    return ((z1, z2), lam)
        # triples: centroid multiplier (1/3, 1/3, 1/3)
        for z1, z2, z3 in itertools.combinations(pts, 3):
            ok = True
            w = []
            for a, b_, cc in zip(z1, z2, z3):
                s = a + b_ + cc
                if s % 3:
                    ok = False
                    break
                t = s // 3
                if (t - a) % 2:
                    ok = False
                    break
                w.append(t)
            if not ok:
                continue
            w = tuple(w)
            fw = ev.value(w)
            if is_infinite(fw) or \
                    3 * fw > vals[z1] + vals[z2] + vals[z3]:
                lam = (Fraction(1, 3),) * 3
                return ((z1, z2, z3), lam)
    return None


def pr_membership(c, M, r, U, q, m_cap=5, u_cap=5, evaluator=None):
    """Decide membership of a rational point q in P_{r,U}, the convex hull
    of {(f(z), z) : z = r (mod 2), ||z||_inf <= U} plus the vertical ray.

    Desk-scale exact method: enumerate the generators, decide by rational
    LP feasibility, and on the outside return a hyperplane alpha with
    alpha'q > alpha'x for every generator (verified before returning).
    Returns ("inside", None) or ("outside", alpha).
    """
    m = len(M)
    if m > m_cap or U > u_cap:
        raise CapExceeded(
            "pr_membership is desk-scale (m <= %d, U <= %d); use "
            "parity_constrained_opt for optimization queries" % (m_cap, u_cap))
    ev = evaluator or FcmEvaluator(c, M, cap=max(64, m * U))
    gens = []
    ranges = []
    for i in range(m):
        start = r[i] % 2
        ranges.append(range(start, U + 1, 2))
    for z in itertools.product(*ranges):
        val = ev.value(z)
        if not is_infinite(val):
            gens.append((val,) + tuple(z))
    q = tuple(Fraction(v) for v in q)
    if len(q) != m + 1:
        raise FormError("q must live in 1+m dimensions")
    # feasibility: sum lam_k gen_k + mu*(1,0,..) = q, sum lam = 1
    ncols = len(gens) + 1
    A = []
    for i in range(m + 1):
        A.append([Fraction(gen[i]) for gen in gens] +
                 [Fraction(1 if i == 0 else 0)])
    A.append([Fraction(1)] * len(gens) + [Fraction(0)])
    bvec = list(q) + [Fraction(1)]
    res = simplex_standard([Fraction(0)] * ncols, A, bvec)
    if res.status == "optimal":
        return "inside", None
    assert res.status == "infeasible"
    y = res.farkas
    alpha = tuple(y[:m + 1])
    gamma = y[m + 1]
    # verified strict separation: alpha'q > alpha'x on P
    lhs = sum(ai * qi for ai, qi in zip(alpha, q))
    assert lhs + gamma > 0
    for gen in gens:
        val = sum(ai * Fraction(gi) for ai, gi in zip(alpha, gen))
        assert lhs > val
    assert alpha[0] <= 0
    return "outside", alpha
