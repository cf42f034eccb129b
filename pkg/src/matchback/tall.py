"""Solver for ILPs with a variable backdoor only (form T): binary search
on the objective, parity guessing of the backdoor variables modulo 2, and
bounded integral search for the remainder, with the matching part
delegated to the memoized b-matching cost function.

The pipeline mirrors the convexity route: normalize to perfect b-matching
form, guess t = y mod 2 (2^p guesses), substitute y = 2v + t so the
induced demand zhat(v) = b - T(2v + t) stays on one parity class, and
decide feasibility of each objective threshold by scanning the integral
box {0 <= 2v + t <= g} directly against f(zhat(v)) <= omega* - a'(2v+t).
The box scan is correctness-equivalent to optimizing over the epigraph
hull P_{r,U} (cross-checked against pr_membership in the tests) and keeps
the solver exact without an ellipsoid-style engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .instance import FormError
from .matching import FcmEvaluator, SolveResult, is_infinite, \
    solve_generalized_matching
from .reduction import normalize_to_b_matching, pull_back, Infeasible


@dataclass(frozen=True)
class TallSearchState:
    t: tuple          # parity guess for y
    r: tuple          # induced parity of zhat over the matching rows
    omega_star: int   # current objective threshold (reduced units)
    box: tuple        # (lows, highs) for v
    U: int            # ||zhat(v)||_inf bound over the box

    def zhat(self, inst, v):
        y = tuple(2 * vi + ti for vi, ti in zip(v, self.t))
        return tuple(inst.b[i] - sum(inst.T[i][k] * y[k]
                                     for k in range(inst.p))
                     for i in range(inst.m))


def _box_for_guess(inst, t):
    lows, highs = [], []
    for k in range(inst.p):
        lo = 0 if t[k] == 0 else 0       # e = 0 after normalization
        hi = (int(inst.g[k]) - t[k]) // 2
        if hi < lo:
            return None
        lows.append(lo)
        highs.append(hi)
    return tuple(lows), tuple(highs)


def make_search_state(inst, t, omega_star):
    """State for one parity guess of a normalized form-(T) instance."""
    box = _box_for_guess(inst, t)
    if box is None:
        return None
    r = tuple((inst.b[i] - sum(inst.T[i][k] * t[k] for k in range(inst.p)))
              % 2 for i in range(inst.m))
    row_norm = max((sum(abs(v) for v in row) for row in inst.T), default=0)
    gmax = max((int(v) for v in inst.g), default=0)
    U = max((abs(v) for v in inst.b), default=0) + row_norm * max(gmax, 1)
    return TallSearchState(tuple(t), r, omega_star, box, U)


def feasibility_tall(state, inst, evaluator, box_cap=10 ** 6):
    """First v in the box with f(zhat(v)) <= omega* - a'(2v+t), or None.

    Enumerates the integral box lexicographically; every zhat(v) is checked
    against the parity invariant zhat = r (mod 2).
    """
    lows, highs = state.box
    volume = 1
    for lo, hi in zip(lows, highs):
        volume *= hi - lo + 1
        if volume > box_cap:
            raise FormError("parity box volume exceeds cap %d; "
                            "use the mixed solver" % box_cap)
    for v in itertools.product(*(range(lo, hi + 1)
                                 for lo, hi in zip(lows, highs))):
        z = state.zhat(inst, v)
        assert all((zi - ri) % 2 == 0 for zi, ri in zip(z, state.r))
        y = tuple(2 * vi + ti for vi, ti in zip(v, state.t))
        omega_hat = state.omega_star - sum(
            ak * yk for ak, yk in zip(inst.a, y))
        val = evaluator.value(z)
        if not is_infinite(val) and val <= omega_hat:
            return v
    return None


def solve_tall(inst, box_cap=10 ** 6, f_cap=None):
    """Exact optimum of a form-(T) instance with finite bounds."""
    if inst.h != 0:
        raise FormError("solve_tall needs h = 0")
    if not inst.finite_bounds():
        raise FormError("solve_tall requires finite bounds "
                        "(apply a proximity box first)")
    if inst.p == 0:
        return solve_generalized_matching(inst)

    bound0 = sum(abs(a) * max(abs(int(e)), abs(int(g)))
                 for a, e, g in zip(inst.a, inst.e, inst.g))
    bound0 += sum(abs(c) * max(abs(int(l)), abs(int(u)))
                  for c, l, u in zip(inst.c, inst.l, inst.u))

    red, smap = normalize_to_b_matching(inst)
    if isinstance(red, Infeasible):
        return SolveResult("infeasible")
    lo = -bound0 - smap.offset
    hi = bound0 - smap.offset

    # f cap: largest reachable ||zhat||_1 over all parity boxes
    row_caps = []
    for i in range(red.m):
        worst = abs(red.b[i]) + sum(
            abs(red.T[i][k]) * int(red.g[k]) for k in range(red.p))
        row_caps.append(worst)
    cap = max(sum(row_caps), 1) if f_cap is None else f_cap
    evaluator = FcmEvaluator(red.c, red.M, cap=cap)

    # pre-evaluate every guess point once; binary search reuses the table
    tables = []
    for t in itertools.product((0, 1), repeat=red.p):
        state = make_search_state(red, t, 0)
        if state is None:
            continue
        lows, highs = state.box
        volume = 1
        for lo_v, hi_v in zip(lows, highs):
            volume *= hi_v - lo_v + 1
        if volume > box_cap:
            raise FormError("parity box volume exceeds cap %d; "
                            "use the mixed solver" % box_cap)
        entries = []
        for v in itertools.product(*(range(lo_v, hi_v + 1)
                                     for lo_v, hi_v in zip(lows, highs))):
            z = state.zhat(red, v)
            assert all((zi - ri) % 2 == 0 for zi, ri in zip(z, state.r))
            fval = evaluator.value(z)
            if is_infinite(fval):
                continue
            y = tuple(2 * vi + ti for vi, ti in zip(v, t))
            aty = sum(ak * yk for ak, yk in zip(red.a, y))
            entries.append((aty + fval, v, z))
        tables.append((t, entries))

    def feasible(omega):
        for t, entries in tables:
            for total, v, z in entries:
                if total <= omega:
                    return (t, v, z)
        return None

    if feasible(hi) is None:
        return SolveResult("infeasible")
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(mid) is not None:
            hi = mid
        else:
            lo = mid + 1
    omega_star = lo
    t, v, z = feasible(omega_star)
    y_red = tuple(2 * vi + ti for vi, ti in zip(v, t))
    x_red = evaluator.argmin(z)
    assert red.is_feasible(y_red, x_red)
    assert red.objective(y_red, x_red) == omega_star
    y, x = pull_back(smap, y_red, x_red)
    value = omega_star + smap.offset
    assert inst.objective(y, x) == value
    return SolveResult("optimal", value, y, x,
                       detail={"omega_star": omega_star,
                               "parity": t, "guesses": len(tables)})
