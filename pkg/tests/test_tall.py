import random

import pytest

from matchback.instance import FormError, make_instance
from matchback.jumpconvex import pr_membership
from matchback.matching import FcmEvaluator, is_infinite
from matchback.oracle import brute_force_solve
from matchback.tall import (TallSearchState, feasibility_tall,
                            make_search_state, solve_tall)

from .util import random_block_instance


def test_single_edge_example():
    inst = make_instance(p=1, h=0, m=2, n=1, a=(0,), c=(1,),
                         T=[[1], [1]], M=[[1], [1]], b=(2, 2),
                         e=(0,), g=(2,), l=(0,), u=(3,))
    res = solve_tall(inst)
    assert res.status == "optimal"
    assert res.value == 0 and res.y == (2,) and res.x == (0,)


def test_delegates_to_generalized_when_p_zero():
    inst = make_instance(p=0, h=0, m=2, n=1, c=(1,), M=[[1], [1]],
                         b=(1, 1), l=(0,), u=(1,))
    res = solve_tall(inst)
    assert res.status == "optimal" and res.value == 1


def test_infeasible_parity_all_guesses():
    # odd total demand against even columns in both T and M
    inst = make_instance(p=1, h=0, m=2, n=1, a=(0,), c=(0,),
                         T=[[2], [0]], M=[[1], [1]], b=(1, 0),
                         e=(0,), g=(2,), l=(0,), u=(2,))
    res = solve_tall(inst)
    want = brute_force_solve(inst)
    assert res.status == want.status == "infeasible"


def test_requires_wide_free_form():
    inst = make_instance(p=0, h=1, m=1, n=1, c=(0,), W=[[1]], M=[[1]],
                         d=(0,), b=(0,), l=(0,), u=(1,))
    with pytest.raises(FormError):
        solve_tall(inst)


def test_requires_finite_bounds():
    inst = make_instance(p=1, h=0, m=1, n=0, a=(1,), T=[[1]], b=(0,),
                         e=(0,))
    with pytest.raises(FormError):
        solve_tall(inst)


def test_matches_brute_force():
    rng = random.Random(81)
    bad = 0
    for t in range(60):
        inst = random_block_instance(rng, rng.randint(1, 3), 0,
                                     rng.randint(1, 4), rng.randint(0, 5))
        got = solve_tall(inst)
        want = brute_force_solve(inst)
        assert got.status == want.status, t
        if got.status == "optimal":
            assert got.value == want.value, t
            assert inst.is_feasible(got.y, got.x)


def test_search_state_parity_invariant_and_box():
    inst = make_instance(p=2, h=0, m=2, n=1, a=(0, 0), c=(0,),
                         T=[[1, 0], [0, 1]], M=[[1], [1]], b=(2, 2),
                         e=(0, 0), g=(3, 3), l=(0,), u=(2,))
    state = make_search_state(inst, (1, 0), 0)
    assert state is not None
    lows, highs = state.box
    import itertools
    for v in itertools.product(*(range(lo, hi + 1)
                                 for lo, hi in zip(lows, highs))):
        y = tuple(2 * vi + ti for vi, ti in zip(v, state.t))
        assert all(0 <= yi <= 3 for yi in y)
        z = state.zhat(inst, v)
        assert all((zi - ri) % 2 == 0 for zi, ri in zip(z, state.r))


def test_feasibility_tall_example():
    inst = make_instance(p=1, h=0, m=2, n=1, a=(0,), c=(1,),
                         T=[[1], [1]], M=[[1], [1]], b=(2, 2),
                         e=(0,), g=(2,), l=(0,), u=(999999,))
    evaluator = FcmEvaluator(inst.c, inst.M, cap=16)
    state = make_search_state(inst, (0,), 0)
    v = feasibility_tall(state, inst, evaluator)
    assert v == (1,)   # y = 2 gives z = (0,0), f = 0 <= 0
    empty_state = make_search_state(inst, (0,), -1)
    assert feasibility_tall(empty_state, inst, evaluator) is None


def test_oracle_coherence_with_pr_membership():
    """The box test f(zhat(v)) <= omega_hat(v) agrees with membership of
    F(v) in the epigraph hull, on instances small enough for the
    desk-scale membership oracle."""
    rng = random.Random(82)
    checked = 0
    for _ in range(12):
        m = 2
        from .util import random_simple_graph
        edges, M = random_simple_graph(rng, m)
        n = len(edges)
        inst = make_instance(
            p=1, h=0, m=m, n=n, a=(rng.randint(-1, 1),),
            c=[rng.randint(0, 2) for _ in range(n)],
            T=[[rng.randint(-1, 1)] for _ in range(m)], M=M,
            b=[rng.randint(0, 2) for _ in range(m)],
            e=(0,), g=(2,), l=(0,) * n, u=(4,) * n)
        evaluator = FcmEvaluator(inst.c, inst.M, cap=64)
        for omega_star in (-1, 0, 2, 5):
            state = make_search_state(inst, (0,), omega_star)
            if state is None or state.U > 5:
                continue
            lows, highs = state.box
            import itertools
            for v in itertools.product(*(range(lo, hi + 1) for lo, hi
                                         in zip(lows, highs))):
                z = state.zhat(inst, v)
                if any(abs(zi) > state.U for zi in z):
                    continue
                y = tuple(2 * vi + ti for vi, ti in zip(v, state.t))
                omega_hat = omega_star - sum(
                    ak * yk for ak, yk in zip(inst.a, y))
                fval = evaluator.value(z)
                direct = (not is_infinite(fval)) and fval <= omega_hat
                status, _ = pr_membership(inst.c, inst.M, state.r, state.U,
                                          (omega_hat,) + z,
                                          evaluator=evaluator)
                assert (status == "inside") == direct, (v, z, omega_hat)
                checked += 1
    assert checked >= 20
