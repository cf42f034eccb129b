"""Seeded random instance generation for the test suites."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .instance import FormError, make_instance


@dataclass(frozen=True)
class GenSpec:
    p: int = 0
    h: int = 0
    m: int = 3
    n: int = 3
    delta: int = 2
    bound_width: int = 3
    bound_base: int = 1      # lower bounds drawn from [-base, base]
    rhs_range: int = 3
    obj_range: int = 2
    density: float = 0.9     # probability a matching column is nonzero
    simple: bool = False     # restrict the matching block to a simple graph
    seed: int = 0


def gen_random(spec):
    """Random instance honoring every IlpInstance invariant; deterministic
    per seed.  The matching block is a random bidirected graph, or a random
    simple graph when spec.simple is set (needs n <= m*(m-1)/2)."""
    rng = random.Random(spec.seed)
    p, h, m, n = spec.p, spec.h, spec.m, spec.n
    M = [[0] * n for _ in range(m)]
    if spec.simple:
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        if n > len(pairs):
            raise FormError("simple graph needs n <= m*(m-1)/2")
        chosen = rng.sample(pairs, n)
        chosen.sort()
        for j, (i1, i2) in enumerate(chosen):
            M[i1][j] = 1
            M[i2][j] = 1
    else:
        for j in range(n):
            if rng.random() >= spec.density or m == 0:
                continue
            kind = rng.choice(["pair", "pair", "mixed", "single", "loop"])
            if kind in ("pair", "mixed") and m >= 2:
                i1, i2 = rng.sample(range(m), 2)
                M[i1][j] = 1 if kind == "pair" else rng.choice([1, -1])
                M[i2][j] = rng.choice([1, -1])
            elif m >= 1 and kind == "single":
                M[rng.randrange(m)][j] = rng.choice([1, -1])
            elif m >= 1:
                M[rng.randrange(m)][j] = rng.choice([2, -2])

    def block(rows, cols):
        return [[rng.randint(-spec.delta, spec.delta) for _ in range(cols)]
                for _ in range(rows)]

    e = [rng.randint(-spec.bound_base, spec.bound_base) for _ in range(p)]
    g = [ev + rng.randint(0, spec.bound_width) for ev in e]
    l = [rng.randint(-spec.bound_base, spec.bound_base) for _ in range(n)]
    u = [lv + rng.randint(0, spec.bound_width) for lv in l]
    return make_instance(
        p=p, h=h, m=m, n=n,
        a=[rng.randint(-spec.obj_range, spec.obj_range) for _ in range(p)],
        c=[rng.randint(-spec.obj_range, spec.obj_range) for _ in range(n)],
        C=block(h, p), W=block(h, n), T=block(m, p), M=M,
        d=[rng.randint(-spec.rhs_range, spec.rhs_range) for _ in range(h)],
        b=[rng.randint(-spec.rhs_range, spec.rhs_range) for _ in range(m)],
        e=e, g=g, l=l, u=u)
