import random

import pytest

from matchback.instance import FormError, make_instance, matching_instance, INF
from matchback.matching import (
    CapExceeded, FcmEvaluator, INFINITE, Matching, bmatching_min_cost, f_cm,
    is_infinite, min_cost_perfect_matching, parity_constrained_opt,
    solve_generalized_matching,
)
from matchback.oracle import (brute_force_f, brute_force_solve,
                              enumerate_perfect_matchings)

from .util import random_block_instance, random_simple_graph

K3 = [[1, 1, 0], [1, 0, 1], [0, 1, 1]]


def test_single_edge_matching():
    assert min_cost_perfect_matching(2, [(0, 1)], [7]) == Matching((0,), 7)


def test_four_cycle_opposite_pair():
    m = min_cost_perfect_matching(4, [(0, 1), (1, 2), (2, 3), (0, 3)],
                                  [1, 5, 1, 5])
    assert m.cost == 2 and m.edges == (0, 2)


def test_odd_graph_infeasible():
    assert min_cost_perfect_matching(3, [(0, 1), (1, 2), (0, 2)],
                                     [1, 1, 1]) is None


def test_engines_agree_with_enumeration():
    rng = random.Random(17)
    for _ in range(100):
        m = rng.choice([2, 4, 6, 8, 10])
        edges, _ = random_simple_graph(rng, m)
        costs = [rng.randint(-4, 4) for _ in edges]
        dp = min_cost_perfect_matching(m, edges, costs, engine="dp")
        bl = min_cost_perfect_matching(m, edges, costs, engine="blossom")
        matchings = enumerate_perfect_matchings(m, edges)
        if not matchings:
            assert dp is None and bl is None
            continue
        best = min(sum(costs[j] for j in mm) for mm in matchings)
        assert dp.cost == best
        assert bl.cost == best


def test_f_examples():
    assert is_infinite(f_cm((1, 1, 1), K3, (1, 1, 1)))
    assert f_cm((1, 1, 1), K3, (0, 0, 0)) == 0
    assert f_cm((5,), [[1], [1]], (3, 3)) == 15
    assert is_infinite(f_cm((1,), [[1], [1]], (-1, 1)))


def test_f_cap():
    with pytest.raises(CapExceeded):
        f_cm((1,), [[1], [1]], (40, 40), cap=64)


def test_f_matches_oracle_on_full_box():
    """f over every z in [0,4]^m for 50 random (graph, c) equals the
    direct bounded enumeration."""
    import itertools

    rng = random.Random(23)
    for _ in range(50):
        m = rng.randint(2, 4)
        edges, M = random_simple_graph(rng, m)
        c = [rng.randint(-3, 3) for _ in edges]
        ev = FcmEvaluator(c, M, cap=4 * m)
        for z in itertools.product(range(5), repeat=m):
            want = brute_force_f(c, M, list(z))
            got = ev.value(z)
            assert (None if is_infinite(got) else got) == want


def test_f_engines_agree_with_each_other():
    rng = random.Random(24)
    for _ in range(50):
        m = rng.randint(2, 4)
        edges, M = random_simple_graph(rng, m)
        c = [rng.randint(-3, 3) for _ in edges]
        z = [rng.randint(0, 4) for _ in range(m)]
        got_bnb = bmatching_min_cost(c, edges, z, engine="bnb")
        if sum(z) <= 12:
            got_dp = bmatching_min_cost(c, edges, z, engine="expand-dp")
            got_bl = bmatching_min_cost(c, edges, z, engine="expand-blossom")
            val = got_bnb[0] if got_bnb else None
            assert (got_dp[0] if got_dp else None) == val
            assert (got_bl[0] if got_bl else None) == val


def test_fcm_evaluator_cache_and_argmin():
    ev = FcmEvaluator((1, 2, 3), K3)
    assert ev.value((2, 2, 2)) == 6
    x = ev.argmin((2, 2, 2))
    assert x is not None
    z = tuple(sum(K3[i][j] * x[j] for j in range(3)) for i in range(3))
    assert z == (2, 2, 2)
    assert ev.value((2, 2, 2)) == 6  # cached


def test_generalized_matching_examples():
    res = solve_generalized_matching(
        matching_instance((0,), [[1], [1]], (0, 0), (0,), (5,)))
    assert res.status == "optimal" and res.value == 0 and res.x == (0,)
    res = solve_generalized_matching(
        matching_instance((1,), [[1], [1]], (2, 3), (0,), (9,)))
    assert res.status == "infeasible"


def test_generalized_matching_unbounded():
    inst = matching_instance((-1, 0), [[1, -1], [1, -1]], (0, 0))
    res = solve_generalized_matching(inst)
    assert res.status == "unbounded"
    assert res.detail and "ray" in res.detail


def test_generalized_matching_vs_brute_force():
    rng = random.Random(29)
    for t in range(200):
        from .util import random_feasible_instance
        maker = random_feasible_instance if t % 2 else random_block_instance
        inst = maker(rng, 0, 0, rng.randint(1, 5), rng.randint(0, 6))
        got = solve_generalized_matching(inst)
        want = brute_force_solve(inst)
        assert got.status == want.status
        if got.status == "optimal":
            assert got.value == want.value
            assert inst.is_feasible(got.y, got.x)


def test_parity_constrained_examples():
    # odd total parity on K3 is impossible
    res = parity_constrained_opt((0, 0, 0, 0), (0, 0, 0), K3, (1, 1, 1), 4)
    assert res.status == "infeasible"
    # maximize the degree sum on a single edge
    res = parity_constrained_opt((0, -1, -1), (0,), [[1], [1]], (0, 0), 4)
    assert res.status == "optimal" and res.detail["z"] == (4, 4)
    # negative leading coefficient: unbounded along the cost ray
    res = parity_constrained_opt((-1, 0, 0), (0,), [[1], [1]], (0, 0), 4)
    assert res.status == "unbounded"


def test_parity_constrained_result_dominates_enumeration():
    import itertools
    rng = random.Random(41)
    for _ in range(12):
        m = rng.randint(2, 4)
        edges, M = random_simple_graph(rng, m)
        c = [rng.randint(-2, 2) for _ in edges]
        r = [rng.randint(0, 1) for _ in range(m)]
        U = 4
        ct = [rng.randint(0, 2)] + [rng.randint(-2, 2) for _ in range(m)]
        res = parity_constrained_opt(tuple(ct), tuple(c), M, tuple(r), U)
        ev = FcmEvaluator(c, M, cap=m * U)
        best = None
        for z in itertools.product(*(range(r[i] % 2, U + 1, 2)
                                     for i in range(m))):
            fz = ev.value(z)
            if is_infinite(fz):
                continue
            val = ct[0] * fz + sum(ct[1 + i] * z[i] for i in range(m))
            if best is None or val < best:
                best = val
        if best is None:
            assert res.status == "infeasible"
        else:
            assert res.status == "optimal"
            assert res.value <= best
            # the returned point is a member of the parity set
            z = res.detail["z"]
            assert all(z[i] % 2 == r[i] and 0 <= z[i] <= U for i in range(m))
