"""Division-free Pfaffian and the randomized constrained-matching solver.

The Pfaffian of a skew-symmetric matrix is computed by a combinatorial
dynamic program over alternating clow sequences with O(m^4) ring
operations and no division: vertices are paired (2i, 2i+1); a composite
step from v crosses to its partner and takes a matrix entry, picking up a
sign that makes cycle weights orientation-invariant; clows open at the odd
member of their head pair, heads strictly increase, and every closed clow
flips the sign.  Entries live either in Z or in Z[X] truncated above a
degree cap, so monomials beyond the target degree are discarded on the
fly.

On top of it sits the randomized value-only solver for minimum-cost
perfect matching with one nonnegative side constraint: random weights
w_j = (nm+1)c_j + Z_j with Z_j uniform in {1..2n} isolate the constrained
optimum with probability at least 1/2; the Pfaffian over entries
2^(w_j) X^(W_j) then carries the optimum in the 2-adic valuation of the
coefficient of X^d.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .instance import FormError, incidence_graph
from .oracle import enumerate_perfect_matchings


class TruncatedPoly:
    """Sparse integer polynomial with a hard degree cap."""

    __slots__ = ("coeffs", "cap")

    def __init__(self, coeffs, cap):
        self.cap = cap
        self.coeffs = {d: c for d, c in coeffs.items() if c and d <= cap}

    @classmethod
    def monomial(cls, coef, deg, cap):
        return cls({deg: coef}, cap)

    @classmethod
    def zero(cls, cap):
        return cls({}, cap)

    @classmethod
    def one(cls, cap):
        return cls({0: 1}, cap)

    def is_zero(self):
        return not self.coeffs

    def coeff(self, deg):
        return self.coeffs.get(deg, 0)

    def degree(self):
        return max(self.coeffs, default=-1)

    def __add__(self, other):
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            nc = out.get(d, 0) + c
            if nc:
                out[d] = nc
            else:
                out.pop(d, None)
        return TruncatedPoly(out, self.cap)

    def __sub__(self, other):
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            nc = out.get(d, 0) - c
            if nc:
                out[d] = nc
            else:
                out.pop(d, None)
        return TruncatedPoly(out, self.cap)

    def __neg__(self):
        return TruncatedPoly({d: -c for d, c in self.coeffs.items()}, self.cap)

    def __mul__(self, other):
        if isinstance(other, int):
            return TruncatedPoly({d: c * other
                                  for d, c in self.coeffs.items()}, self.cap)
        cap = self.cap
        out = {}
        for d1, c1 in self.coeffs.items():
            for d2, c2 in other.coeffs.items():
                d = d1 + d2
                if d > cap:
                    continue
                nc = out.get(d, 0) + c1 * c2
                if nc:
                    out[d] = nc
                else:
                    del out[d]
        return TruncatedPoly(out, cap)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            return self.coeffs == ({0: other} if other else {})
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join("%d*X^%d" % (c, d)
                          for d, c in sorted(self.coeffs.items()))


def _ring_ops(entries, cap):
    for row in entries:
        for v in row:
            if isinstance(v, TruncatedPoly):
                c = v.cap
                return (TruncatedPoly.zero(c), TruncatedPoly.one(c),
                        lambda x: x.is_zero())
    return 0, 1, lambda x: x == 0


def pfaffian_division_free(D, check_skew=True):
    """Exact Pfaffian of a skew-symmetric matrix over Z or truncated Z[X].

    Clow-sequence dynamic program; for untruncated input Pf(D)^2 = det(D).
    """
    n = len(D)
    if n % 2:
        raise FormError("Pfaffian needs an even matrix dimension")
    zero, one, iszero = _ring_ops(D, None)
    if check_skew:
        for i in range(n):
            if not iszero(D[i][i] - zero) and D[i][i] != zero:
                raise FormError("diagonal must be zero")
            for j in range(i + 1, n):
                if D[i][j] != -D[j][i]:
                    raise FormError("matrix is not skew-symmetric")
    if n == 0:
        return one
    half = n // 2

    # states[(h, v)]: open clow with head pair h, next step leaves from v
    states = {}
    closed = [zero] * half          # closings recorded at the current level
    result = zero
    for level in range(half):
        # open clows: the first at level 0 with weight one, later ones with
        # the accumulated weight of sequences whose closed heads are < h
        if level == 0:
            for h in range(half):
                states[(h, 2 * h + 1)] = one
        else:
            prefix = zero
            for h in range(half):
                if not iszero(prefix):
                    key = (h, 2 * h + 1)
                    states[key] = states.get(key, zero) + prefix
                prefix = prefix + closed[h]
        closed = [zero] * half
        new_states = {}
        for (h, v), wgt in states.items():
            if iszero(wgt):
                continue
            vp = v ^ 1
            row = D[vp]
            positive = (v % 2 == 0)
            # closing step back to the start vertex 2h+1
            entry = row[2 * h + 1]
            if not iszero(entry):
                term = wgt * entry
                closed[h] = closed[h] + (-term if positive else term)
            # intermediate steps to pairs strictly above the head
            for w in range(2 * h + 2, n):
                if w == vp:
                    continue
                entry = row[w]
                if iszero(entry):
                    continue
                term = wgt * entry
                if not positive:
                    term = -term
                key = (h, w)
                new_states[key] = new_states.get(key, zero) + term
        states = new_states
    for h in range(half):
        result = result + closed[h]
    return result


def pfaffian_reference(D):
    """Definitional Pfaffian: sum over perfect matchings with the crossing
    sign; exponential, used as the small-case oracle."""
    n = len(D)
    if n % 2:
        raise FormError("Pfaffian needs an even matrix dimension")
    zero, one, _ = _ring_ops(D, None)
    if n == 0:
        return one
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    total = zero
    for matching in enumerate_perfect_matchings(n, edges):
        pairs = sorted(edges[idx] for idx in matching)
        crossings = 0
        for a in range(len(pairs)):
            for b in range(a + 1, len(pairs)):
                (i, j), (k, l) = pairs[a], pairs[b]
                if i < k < j < l:
                    crossings += 1
        term = one
        for i, j in pairs:
            term = term * D[i][j]
        total = total + (term if crossings % 2 == 0 else -term)
    return total


# -- isolation sampling -------------------------------------------------------

def derive_seed(seed, tag):
    digest = hashlib.sha256(("%s:%s" % (seed, tag)).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def isolation_sample(n, seed):
    """n independent uniform draws from {1, ..., 2n}, deterministic in seed."""
    rng = random.Random(seed)
    return tuple(rng.randint(1, 2 * n) for _ in range(n))


# -- randomized constrained matching -----------------------------------------

@dataclass(frozen=True)
class TutteInstance:
    """Skew weighted-adjacency data for one randomized trial.

    Edge j joining i1 < i2 contributes the monomial 2^(weights[j]) *
    X^(levels[j]) at (i1, i2), negated below the diagonal; entries are
    truncated above the target degree."""
    m: int
    edges: tuple
    weights: tuple      # isolation-shifted edge weights w_j
    levels: tuple       # side-constraint coefficients W_j (powers of X)
    target: int         # degree d whose coefficient is read off

    def matrix(self):
        D = [[TruncatedPoly.zero(self.target) for _ in range(self.m)]
             for _ in range(self.m)]
        for j, (i1, i2) in enumerate(self.edges):
            mono = TruncatedPoly.monomial(2 ** self.weights[j],
                                          self.levels[j], self.target)
            D[i1][i2] = mono
            D[i2][i1] = -mono
        return D


@dataclass(frozen=True)
class ExactMatchingResult:
    status: str              # "value" | "infeasible" | "probably-infeasible"
    value: object = None
    trials: int = 0
    failure_bound: object = None    # Fraction upper bound when probabilistic
    certified: bool = True          # False only for "probably-infeasible"


def two_adic_valuation(v):
    v = abs(v)
    return (v & -v).bit_length() - 1


def exact_matching_objective(inst, seed=0, trials=20, enum_cap=16):
    """Optimal value of a single-constrained perfect matching instance
    (value only; no solution is recovered).

    Requires h = 1, c >= 0, W >= 0, G(M) simple, l = 0, u = 1, b = 1.  Each
    trial draws isolation weights, builds the skew matrix with entries
    2^w_j X^(W_j), reads the coefficient of X^d from the truncated
    Pfaffian, and recovers a candidate value from its 2-adic valuation.
    Candidates never undershoot the optimum; a feasible instance yields a
    certificate per trial with probability at least one half.  When no
    trial certifies and the graph is small enough, enumeration settles
    infeasibility exactly; otherwise the result is "probably infeasible"
    with failure bound 2^-trials.
    """
    from fractions import Fraction

    if inst.h != 1 or inst.p != 0:
        raise FormError("exact matching objective needs h = 1, p = 0")
    if any(v < 0 for v in inst.c) or any(v < 0 for v in inst.W[0]):
        raise FormError("needs c >= 0 and W >= 0")
    if any(v != 0 for v in inst.l) or any(v != 1 for v in inst.u) or \
            any(v != 1 for v in inst.b):
        raise FormError("needs l = 0, u = 1, b = 1")
    graph = incidence_graph(inst.M)
    edges = graph.simple_edges()
    m, n = inst.m, inst.n
    d1 = inst.d[0]
    wrow = inst.W[0]
    maxw = max(wrow, default=0)
    if m % 2 or d1 < 0 or d1 > (m // 2) * maxw:
        return ExactMatchingResult("infeasible", trials=0)
    if n == 0:
        if m == 0 and d1 == 0:
            return ExactMatchingResult("value", 0, trials=0)
        return ExactMatchingResult("infeasible", trials=0)

    scale = n * m + 1
    best = None
    for t in range(trials):
        zvec = isolation_sample(n, derive_seed(seed, "trial-%d" % t))
        weights = tuple(scale * inst.c[j] + zvec[j] for j in range(n))
        trial = TutteInstance(m, tuple(edges), weights, tuple(wrow), d1)
        pf = pfaffian_division_free(trial.matrix(), check_skew=False)
        coef = pf.coeff(d1)
        if coef == 0:
            continue
        omega = two_adic_valuation(coef)
        assert omega >= m // 2, "valuation below the minimum edge count"
        candidate = omega // scale
        if best is None or candidate < best:
            best = candidate
    if best is not None:
        return ExactMatchingResult("value", best, trials=trials)
    if m <= enum_cap:
        feasible_costs = [
            sum(inst.c[j] for j in matching)
            for matching in enumerate_perfect_matchings(m, edges)
            if sum(wrow[j] for j in matching) == d1
        ]
        if not feasible_costs:
            return ExactMatchingResult("infeasible", trials=trials)
        # all trials missed a feasible optimum (probability <= 2^-trials)
        return ExactMatchingResult("value", min(feasible_costs),
                                   trials=trials)
    return ExactMatchingResult(
        "probably-infeasible", trials=trials,
        failure_bound=Fraction(1, 2 ** trials), certified=False)
