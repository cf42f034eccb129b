"""Block ILP data model, MBILP text format, and backdoor identification.

The central object is an integer program over two variable groups y (the
"backdoor" variables, p of them) and x (the matching variables, n of them):

    min a'y + c'x
    s.t.  C y + W x = d      (h backdoor rows)
          T y + M x = b      (m matching rows)
          e <= y <= g,  l <= x <= u,  (y, x) integer

where every column of M has 1-norm at most 2, so M is the incidence matrix
of a bidirected graph.  Special cases: p = h = 0 is the plain generalized
matching problem ("G"), h = 0 adds only variables ("T"), p = 0 adds only
constraints ("W").

Everything here is exact integer arithmetic; infinite bounds are the floats
+inf/-inf used purely as ordering tokens, never in arithmetic.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

INF = float("inf")
NEG_INF = float("-inf")


class ParseError(ValueError):
    """MBILP text that does not conform to the format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class FormError(ValueError):
    """Instance violates a structural precondition of an operation."""


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _check_bound(v, name):
    if _is_int(v) or v == INF or v == NEG_INF:
        return
    raise FormError("%s bound must be an integer or +/-inf, got %r" % (name, v))


def col_norm1(M, j):
    return sum(abs(row[j]) for row in M)


@dataclass(frozen=True)
class IlpInstance:
    """Immutable, validated block ILP.  Safe to share across threads."""

    p: int
    h: int
    m: int
    n: int
    a: tuple
    c: tuple
    C: tuple
    W: tuple
    T: tuple
    M: tuple
    d: tuple
    b: tuple
    e: tuple
    g: tuple
    l: tuple
    u: tuple

    def __post_init__(self):
        p, h, m, n = self.p, self.h, self.m, self.n
        if min(p, h, m, n) < 0:
            raise FormError("dimensions must be nonnegative")
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "c", tuple(self.c))
        object.__setattr__(self, "d", tuple(self.d))
        object.__setattr__(self, "b", tuple(self.b))
        object.__setattr__(self, "e", tuple(self.e))
        object.__setattr__(self, "g", tuple(self.g))
        object.__setattr__(self, "l", tuple(self.l))
        object.__setattr__(self, "u", tuple(self.u))
        for name, mat, rows, cols in (
            ("C", self.C, h, p), ("W", self.W, h, n),
            ("T", self.T, m, p), ("M", self.M, m, n),
        ):
            mat = tuple(tuple(r) for r in mat)
            object.__setattr__(self, name, mat)
            if len(mat) != rows or any(len(r) != cols for r in mat):
                raise FormError("%s must be %dx%d" % (name, rows, cols))
            for r in mat:
                for v in r:
                    if not _is_int(v):
                        raise FormError("%s entries must be integers" % name)
        for name, vec, size in (
            ("a", self.a, p), ("c", self.c, n), ("d", self.d, h), ("b", self.b, m),
        ):
            if len(vec) != size:
                raise FormError("%s must have length %d" % (name, size))
            for v in vec:
                if not _is_int(v):
                    raise FormError("%s entries must be integers" % name)
        for name, vec, size in (
            ("e", self.e, p), ("g", self.g, p), ("l", self.l, n), ("u", self.u, n),
        ):
            if len(vec) != size:
                raise FormError("%s must have length %d" % (name, size))
            for v in vec:
                _check_bound(v, name)
        for lo, hi, who in ((self.e, self.g, "y"), (self.l, self.u, "x")):
            for j, (lv, uv) in enumerate(zip(lo, hi)):
                if lv > uv:
                    raise FormError(
                        "empty bound interval for %s variable %d" % (who, j))
        for j in range(n):
            if col_norm1(self.M, j) > 2:
                raise FormError("column %d of M has 1-norm exceeding 2" % j)

    # -- derived data ----------------------------------------------------

    @property
    def delta(self):
        """Max absolute entry over the backdoor blocks C, W, T (0 if empty)."""
        best = 0
        for mat in (self.C, self.W, self.T):
            for row in mat:
                for v in row:
                    best = max(best, abs(v))
        return best

    def form(self):
        if self.p == 0 and self.h == 0:
            return "G"
        if self.h == 0:
            return "T"
        if self.p == 0:
            return "W"
        return "M"

    def finite_bounds(self):
        return all(v != NEG_INF and v != INF
                   for v in self.e + self.g + self.l + self.u)

    def objective(self, y, x):
        return sum(ai * yi for ai, yi in zip(self.a, y)) + \
            sum(cj * xj for cj, xj in zip(self.c, x))

    def residuals(self, y, x):
        """Constraint residuals ((Cy+Wx)-d, (Ty+Mx)-b), exact."""
        top = []
        for i in range(self.h):
            v = sum(self.C[i][k] * y[k] for k in range(self.p)) + \
                sum(self.W[i][j] * x[j] for j in range(self.n))
            top.append(v - self.d[i])
        bot = []
        for i in range(self.m):
            v = sum(self.T[i][k] * y[k] for k in range(self.p)) + \
                sum(self.M[i][j] * x[j] for j in range(self.n))
            bot.append(v - self.b[i])
        return tuple(top), tuple(bot)

    def is_feasible(self, y, x):
        if len(y) != self.p or len(x) != self.n:
            return False
        for val, lo, hi in zip(tuple(y) + tuple(x),
                               self.e + self.l, self.g + self.u):
            if val < lo or val > hi:
                return False
        top, bot = self.residuals(y, x)
        return not any(top) and not any(bot)

    # -- serialization ---------------------------------------------------

    def serialize(self):
        """Canonical MBILP text; parse(serialize(inst)) == inst."""
        out = ["MBILP 1", "%d %d %d %d" % (self.p, self.h, self.m, self.n)]

        def tok(v):
            if v == INF:
                return "inf"
            if v == NEG_INF:
                return "-inf"
            return str(v)

        def vec(label, vals):
            out.append((label + " " + " ".join(tok(v) for v in vals)).rstrip())

        if self.p:
            vec("a:", self.a)
        vec("c:", self.c)
        if self.h and self.p:
            out.append("C:")
            for row in self.C:
                out.append(" ".join(tok(v) for v in row))
        if self.h:
            out.append("W:")
            for row in self.W:
                out.append(" ".join(tok(v) for v in row))
        if self.p:
            out.append("T:")
            for row in self.T:
                out.append(" ".join(tok(v) for v in row))
        out.append("M:")
        for row in self.M:
            out.append(" ".join(tok(v) for v in row))
        if self.h:
            vec("d:", self.d)
        vec("b:", self.b)
        if self.p:
            pairs = []
            for ev, gv in zip(self.e, self.g):
                pairs += [tok(ev), tok(gv)]
            out.append(("e g: " + " ".join(pairs)).rstrip())
        pairs = []
        for lv, uv in zip(self.l, self.u):
            pairs += [tok(lv), tok(uv)]
        out.append(("l u: " + " ".join(pairs)).rstrip())
        return "\n".join(out) + "\n"

    def digest(self):
        return hashlib.sha256(self.serialize().encode()).hexdigest()[:16]


def make_instance(p=0, h=0, m=0, n=0, a=(), c=(), C=(), W=(), T=(), M=(),
                  d=(), b=(), e=(), g=(), l=(), u=()):
    """Convenience constructor filling omitted blocks with defaults."""
    a = tuple(a) if a else (0,) * p
    c = tuple(c) if c else (0,) * n
    C = tuple(tuple(r) for r in C) if C else tuple(((0,) * p) for _ in range(h))
    W = tuple(tuple(r) for r in W) if W else tuple(((0,) * n) for _ in range(h))
    T = tuple(tuple(r) for r in T) if T else tuple(((0,) * p) for _ in range(m))
    M = tuple(tuple(r) for r in M) if M else tuple(((0,) * n) for _ in range(m))
    d = tuple(d) if d else (0,) * h
    b = tuple(b) if b else (0,) * m
    e = tuple(e) if len(e) else (0,) * p
    g = tuple(g) if len(g) else (INF,) * p
    l = tuple(l) if len(l) else (0,) * n
    u = tuple(u) if len(u) else (INF,) * n
    return IlpInstance(p, h, m, n, a, c, C, W, T, M, d, b, e, g, l, u)


def matching_instance(c, M, b, l=None, u=None):
    """Form-(G) instance from a matching block alone."""
    m = len(M)
    n = len(M[0]) if m else (len(c) if c else 0)
    if l is None:
        l = (0,) * n
    if u is None:
        u = (INF,) * n
    return make_instance(m=m, n=n, c=c, M=M, b=b, l=l, u=u)


# -- MBILP parsing --------------------------------------------------------

def _tokenize(text):
    """Yield (token, line_number), stripping # comments."""
    toks = []
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        for t in body.split():
            toks.append((t, ln))
    return toks


class _TokenStream:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    @property
    def line(self):
        if self.pos < len(self.toks):
            return self.toks[self.pos][1]
        return self.toks[-1][1] if self.toks else 0

    def next(self, what):
        if self.pos >= len(self.toks):
            raise ParseError("unexpected end of file, expected %s" % what,
                             self.line)
        t, line = self.toks[self.pos]
        self.pos += 1
        return t, line

    def expect(self, literal):
        t, line = self.next("'%s'" % literal)
        if t != literal:
            raise ParseError("expected '%s', got '%s'" % (literal, t), line)

    def integer(self, what):
        t, line = self.next(what)
        try:
            return int(t)
        except ValueError:
            raise ParseError("non-integer token '%s' for %s" % (t, what),
                             line) from None

    def bound(self, what):
        t, line = self.next(what)
        if t == "inf":
            return INF
        if t == "-inf":
            return NEG_INF
        try:
            return int(t)
        except ValueError:
            raise ParseError("bad bound token '%s' for %s" % (t, what),
                             line) from None


def parse_instance(text):
    """Parse MBILP text (str or bytes) into a validated IlpInstance.

    Raises ParseError naming the offending line for malformed headers,
    dimension mismatches, non-integer tokens, and M columns of 1-norm > 2.
    """
    if isinstance(text, bytes):
        text = text.decode()
    ts = _TokenStream(_tokenize(text))
    ts.expect("MBILP")
    version = ts.integer("format version")
    if version != 1:
        raise ParseError("unsupported MBILP version %d" % version, ts.line)
    p = ts.integer("p")
    h = ts.integer("h")
    m = ts.integer("m")
    n = ts.integer("n")
    if min(p, h, m, n) < 0:
        raise ParseError("negative dimension in header", ts.line)

    def integers(count, what):
        return tuple(ts.integer(what) for _ in range(count))

    def matrix(label, rows, cols):
        ts.expect(label)
        return tuple(integers(cols, "%s row" % label) for _ in range(rows))

    a = ()
    if p:
        ts.expect("a:")
        a = integers(p, "a")
    ts.expect("c:")
    c = integers(n, "c")
    C = matrix("C:", h, p) if (h and p) else tuple(((0,) * p) for _ in range(h))
    W = matrix("W:", h, n) if h else ()
    T = matrix("T:", m, p) if p else tuple(((0,) * p) for _ in range(m))
    M = matrix("M:", m, n)
    d = ()
    if h:
        ts.expect("d:")
        d = integers(h, "d")
    ts.expect("b:")
    b = integers(m, "b")
    e = g = ()
    if p:
        ts.expect("e")
        ts.expect("g:")
        eg = tuple(ts.bound("e/g") for _ in range(2 * p))
        e, g = eg[0::2], eg[1::2]
    ts.expect("l")
    ts.expect("u:")
    lu = tuple(ts.bound("l/u") for _ in range(2 * n))
    l, u = lu[0::2], lu[1::2]
    if ts.pos != len(ts.toks):
        raise ParseError("trailing tokens after instance", ts.line)
    for j in range(n):
        if col_norm1(M, j) > 2:
            raise ParseError("column %d 1-norm exceeds 2" % j)
    try:
        return IlpInstance(p, h, m, n, a, c, C, W, T, M, d, b, e, g, l, u)
    except FormError as exc:
        raise ParseError(str(exc)) from None


# -- backdoor identification ----------------------------------------------

def detect_tall_backdoor(A):
    """Permutation putting all columns of 1-norm > 2 first.

    Returns (perm, p): perm is a tuple of original column indices in the new
    order, p counts the offending columns.  Stable within both groups.
    """
    ncols = len(A[0]) if A else 0
    heavy = [j for j in range(ncols) if col_norm1(A, j) > 2]
    light = [j for j in range(ncols) if col_norm1(A, j) <= 2]
    return tuple(heavy + light), len(heavy)


def detect_mixed_backdoor(A, budget):
    """Minimum row+column deletion set leaving all column 1-norms <= 2.

    Bounded-depth search branching on an offending column: either delete the
    column, or delete one row among the (up to) 3 largest-magnitude entries
    of that column; their absolute sum is always >= 3 when the column is
    offending.  Returns (rows, cols) frozensets of minimum total size, or
    None if no backdoor of size <= budget exists.
    """
    if budget < 0:
        return None
    mrows = len(A)
    ncols = len(A[0]) if mrows else 0

    def offending(del_rows, del_cols):
        for j in range(ncols):
            if j in del_cols:
                continue
            norm = sum(abs(A[i][j]) for i in range(mrows) if i not in del_rows)
            if norm > 2:
                return j
        return None

    def search(del_rows, del_cols, remaining):
        j = offending(del_rows, del_cols)
        if j is None:
            return frozenset(del_rows), frozenset(del_cols)
        if remaining == 0:
            return None
        entries = sorted(
            ((i, abs(A[i][j])) for i in range(mrows)
             if i not in del_rows and A[i][j] != 0),
            key=lambda t: (-t[1], t[0]))[:3]
        found = search(del_rows, del_cols | {j}, remaining - 1)
        for i, _ in entries:
            cand = search(del_rows | {i}, del_cols, remaining - 1)
            if cand is not None and (found is None or
                                     _bd_size(cand) < _bd_size(found)):
                found = cand
        return found

    # iterative deepening guarantees minimality of the returned set
    for size in range(budget + 1):
        result = search(frozenset(), frozenset(), size)
        if result is not None:
            return result
    return None


def _bd_size(rc):
    return len(rc[0]) + len(rc[1])


# -- bidirected graph view -------------------------------------------------

@dataclass(frozen=True)
class Edge:
    """Signed edge of a bidirected graph.

    endpoints is a tuple of (vertex, sign) pairs with 0, 1, or 2 entries:
    two entries at distinct vertices form an ordinary edge, two at the same
    vertex a self-loop (column entry +/-2), one entry a half-edge, zero a
    degenerate empty edge (all-zero column).
    """
    endpoints: tuple

    def column(self, m):
        col = [0] * m
        for v, s in self.endpoints:
            col[v] += s
        return tuple(col)


@dataclass(frozen=True)
class BidirectedGraph:
    m: int
    edges: tuple

    def incidence(self):
        cols = [e.column(self.m) for e in self.edges]
        return tuple(tuple(cols[j][i] for j in range(len(cols)))
                     for i in range(self.m))

    def is_simple(self):
        seen = set()
        for e in self.edges:
            if len(e.endpoints) != 2:
                return False
            (v1, s1), (v2, s2) = e.endpoints
            if v1 == v2 or s1 != 1 or s2 != 1:
                return False
            key = (min(v1, v2), max(v1, v2))
            if key in seen:
                return False
            seen.add(key)
        return True

    def simple_edges(self):
        """Edge list as (i, j) with i < j; requires a simple graph."""
        if not self.is_simple():
            raise FormError("matching block is not a simple graph")
        out = []
        for e in self.edges:
            (v1, _), (v2, _) = e.endpoints
            out.append((min(v1, v2), max(v1, v2)))
        return out


def incidence_graph(M):
    """Bidirected graph whose incidence matrix is M (column 1-norms <= 2)."""
    m = len(M)
    n = len(M[0]) if m else 0
    edges = []
    for j in range(n):
        nz = [(i, M[i][j]) for i in range(m) if M[i][j] != 0]
        norm = sum(abs(v) for _, v in nz)
        if norm > 2:
            raise FormError("column %d of M has 1-norm exceeding 2" % j)
        if not nz:
            edges.append(Edge(()))
        elif len(nz) == 1:
            i, v = nz[0]
            if abs(v) == 1:
                edges.append(Edge(((i, v),)))
            else:
                s = 1 if v > 0 else -1
                edges.append(Edge(((i, s), (i, s))))
        else:
            (i1, v1), (i2, v2) = nz
            edges.append(Edge(((i1, v1), (i2, v2))))
    return BidirectedGraph(m, tuple(edges))
