import random

import pytest

from matchback.instance import (
    INF, NEG_INF, FormError, ParseError, parse_instance, make_instance,
    matching_instance, detect_tall_backdoor, detect_mixed_backdoor,
    incidence_graph,
)

FIG1_M = [
    [1, 0, 1, 0, 0, 0],
    [1, 1, 0, -1, 0, 0],
    [0, -1, 0, 0, 2, 0],
    [0, 0, -1, -1, 0, 1],
]


def fig1_instance():
    return matching_instance((0,) * 6, FIG1_M, (3, 1, 5, 0),
                             (0,) * 6, (5,) * 6)


def test_parse_fig1_text():
    text = """
# generalized matching block from the running example
MBILP 1
0 0 4 6
c: 0 0 0 0 0 0
M:
1 0 1 0 0 0
1 1 0 -1 0 0
0 -1 0 0 2 0
0 0 -1 -1 0 1
b: 3 1 5 0
l u: 0 5 0 5 0 5 0 5 0 5 0 5
"""
    inst = parse_instance(text)
    assert inst.m == 4 and inst.n == 6 and inst.p == 0 and inst.h == 0
    assert inst.b == (3, 1, 5, 0)
    assert inst.form() == "G"


def test_empty_matching_block_instance():
    inst = make_instance(p=1, h=0, m=0, n=0, a=(3,), e=(0,), g=(2,))
    assert inst.form() == "T"
    assert inst.serialize()
    assert parse_instance(inst.serialize()) == inst


def test_column_norm_violation_is_parse_error():
    text = """MBILP 1
0 0 3 1
c: 0
M:
1
1
1
b: 0 0 0
l u: 0 1
"""
    with pytest.raises(ParseError, match="1-norm exceeds 2"):
        parse_instance(text)


def test_parse_error_names_line():
    text = "MBILP 1\n0 0 1 1\nc: x\nM:\n1\nb: 0\nl u: 0 1\n"
    with pytest.raises(ParseError, match="line 3"):
        parse_instance(text)


def test_serialize_parse_roundtrip_random():
    rng = random.Random(42)
    from .util import random_block_instance
    for _ in range(40):
        inst = random_block_instance(rng, rng.randint(0, 2), rng.randint(0, 2),
                                     rng.randint(0, 4), rng.randint(0, 4))
        assert parse_instance(inst.serialize()) == inst


def test_roundtrip_with_infinite_bounds():
    inst = make_instance(p=1, h=1, m=2, n=2, a=(1,), c=(1, -1),
                         C=[[2]], W=[[1, 0]], T=[[0], [1]],
                         M=[[1, 0], [1, 0]], d=(1,), b=(1, 1),
                         e=(NEG_INF,), g=(INF,), l=(0, 0), u=(INF, 3))
    assert parse_instance(inst.serialize()) == inst


def test_bounds_must_be_ordered():
    with pytest.raises(FormError):
        make_instance(n=1, m=0, c=(1,), l=(2,), u=(1,))


def test_detect_tall_backdoor_norm_scan():
    # columns of 1-norms (3, 2, 1, 5) -> heavy columns 0 and 3 first
    A = [[1, 1, 0, 2],
         [1, 1, 1, 2],
         [1, 0, 0, 1]]
    perm, p = detect_tall_backdoor(A)
    assert p == 2
    assert perm == (0, 3, 1, 2)


def test_detect_tall_backdoor_trivial_cases():
    assert detect_tall_backdoor([[1, 2], [1, 0]]) == ((0, 1), 0)
    A = [[1, 1], [1, 1], [1, 1]]
    perm, p = detect_tall_backdoor(A)
    assert p == 2


def test_detect_mixed_backdoor_single_column():
    A = [[1, 0], [1, 0], [1, 0]]
    result = detect_mixed_backdoor(A, 1)
    assert result is not None
    rows, cols = result
    assert len(rows) + len(cols) == 1


def test_detect_mixed_backdoor_matches_exhaustive():
    import itertools
    rng = random.Random(7)

    def exhaustive(A, budget):
        mrows, ncols = len(A), len(A[0])
        for size in range(budget + 1):
            for rk in range(size + 1):
                ck = size - rk
                for rows in itertools.combinations(range(mrows), rk):
                    for cols in itertools.combinations(range(ncols), ck):
                        ok = True
                        for j in range(ncols):
                            if j in cols:
                                continue
                            norm = sum(abs(A[i][j]) for i in range(mrows)
                                       if i not in rows)
                            if norm > 2:
                                ok = False
                                break
                        if ok:
                            return size
        return None

    for _ in range(25):
        mrows = rng.randint(1, 4)
        ncols = rng.randint(1, 5)
        A = [[rng.randint(-2, 2) for _ in range(ncols)] for _ in range(mrows)]
        budget = 3
        got = detect_mixed_backdoor(A, budget)
        want = exhaustive(A, budget)
        if want is None:
            assert got is None
        else:
            assert got is not None
            rows, cols = got
            assert len(rows) + len(cols) == want
            for j in range(ncols):
                if j in cols:
                    continue
                assert sum(abs(A[i][j]) for i in range(mrows)
                           if i not in rows) <= 2


def test_detect_mixed_backdoor_disjoint_columns_budget_one():
    A = [[1, 0], [1, 0], [1, 0], [0, 1], [0, 1], [0, 1]]
    assert detect_mixed_backdoor(A, 1) is None
    result = detect_mixed_backdoor(A, 2)
    assert result is not None and len(result[0]) + len(result[1]) == 2


def test_incidence_graph_roundtrip_fig1():
    g = incidence_graph(FIG1_M)
    assert g.m == 4 and len(g.edges) == 6
    assert g.incidence() == tuple(tuple(r) for r in FIG1_M)


def test_incidence_graph_degenerate_columns():
    g = incidence_graph([[0, 2, 1], [0, 0, 0]])
    kinds = [len(e.endpoints) for e in g.edges]
    assert kinds == [0, 2, 1]
    # self-loop: both endpoints at the same vertex
    assert g.edges[1].endpoints[0][0] == g.edges[1].endpoints[1][0]
    assert g.incidence() == ((0, 2, 1), (0, 0, 0))


def test_incidence_graph_rejects_heavy_column():
    with pytest.raises(FormError):
        incidence_graph([[1], [1], [1]])


def test_is_simple():
    g = incidence_graph([[1, 1], [1, 0], [0, 1]])
    assert g.is_simple()
    assert g.simple_edges() == [(0, 1), (0, 2)]
    assert not incidence_graph([[2]]).is_simple()
    assert not incidence_graph([[1, 1], [1, 1]]).is_simple()   # parallel


def test_delta_over_backdoor_blocks_only():
    inst = make_instance(p=1, h=1, m=1, n=1, a=(0,), c=(9,), C=[[3]],
                         W=[[1]], T=[[-4]], M=[[2]], d=(0,), b=(0,),
                         e=(0,), g=(1,), l=(0,), u=(1,))
    assert inst.delta == 4


def test_objective_and_feasibility():
    inst = fig1_instance()
    assert inst.is_feasible((), (1, 1, 2, 1, 3, 3))
    assert not inst.is_feasible((), (0, 0, 0, 0, 0, 0))


def test_detect_tall_backdoor_idempotent_and_minimal():
    rng = random.Random(11)
    for _ in range(20):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 5)
        A = [[rng.randint(-3, 3) for _ in range(cols)] for _ in range(rows)]
        perm, p = detect_tall_backdoor(A)
        heavy = sum(1 for j in range(cols)
                    if sum(abs(A[i][j]) for i in range(rows)) > 2)
        assert p == heavy
        permuted = [[A[i][perm[j]] for j in range(cols)] for i in range(rows)]
        for j in range(p, cols):
            assert sum(abs(permuted[i][j]) for i in range(rows)) <= 2
        perm2, p2 = detect_tall_backdoor(permuted)
        assert p2 == p and perm2 == tuple(range(cols))
