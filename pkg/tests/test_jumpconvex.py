import itertools
import random

import pytest

from matchback.instance import FormError
from matchback.jumpconvex import (
    CertificateError, TwoStepDecomposition, check_lattice_convexity,
    check_sbo_certificate, closing_step, convexity_scan, pr_membership,
    two_step_decompose,
)
from matchback.matching import FcmEvaluator, is_infinite

from .util import random_simple_graph

K3 = [[1, 1, 0], [1, 0, 1], [0, 1, 1]]
EDGE = [[1], [1]]


def test_decompose_single_edge():
    d = two_step_decompose((1,), EDGE, (0, 0), (4, 4), (0,), (4,))
    assert d.steps == ((1, 1),) * 4
    assert d.gains == (1, 1, 1, 1)


def test_decompose_equal_points_is_empty():
    d = two_step_decompose((1,), EDGE, (2, 2), (2, 2), (2,), (2,))
    assert d.steps == () and d.gains == ()


def test_decompose_path_shift():
    M = [[1, 0], [1, 1], [0, 1]]
    d = two_step_decompose((0, 0), M, (1, 1, 0), (0, 1, 1), (1, 0), (0, 1))
    assert d.steps == ((-1, 0, 1),)
    assert d.gains == (0,)


def test_decompose_rejects_nonoptimal_cycle():
    # 4-cycle with distinct costs: both matchings exist; feeding the
    # expensive one as "optimal" for both sides leaves a nonzero-gain cycle
    M = [[1, 0, 0, 1], [1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]]
    c = (1, 5, 1, 5)
    with pytest.raises(CertificateError):
        two_step_decompose(c, M, (1, 1, 1, 1), (1, 1, 1, 1),
                           (1, 0, 1, 0), (0, 1, 0, 1))


def test_certificate_pass_and_tamper():
    ev = FcmEvaluator((1,), EDGE)
    d = two_step_decompose((1,), EDGE, (0, 0), (4, 4), (0,), (4,))
    ok, witness = check_sbo_certificate(ev, d)
    assert ok and witness is None
    bad = TwoStepDecomposition(d.base, d.target, d.steps,
                               (0,) + d.gains[1:], d.f_base, d.f_target)
    ok, witness = check_sbo_certificate(ev, bad)
    assert not ok


def test_certificate_empty_decomposition():
    ev = FcmEvaluator((1,), EDGE)
    d = two_step_decompose((1,), EDGE, (2, 2), (2, 2), (2,), (2,))
    ok, _ = check_sbo_certificate(ev, d)
    assert ok


def test_sbo_property_random_instances():
    rng = random.Random(51)
    for _ in range(10):
        m = rng.randint(2, 4)
        edges, M = random_simple_graph(rng, m)
        c = [rng.randint(-3, 3) for _ in edges]
        ev = FcmEvaluator(c, M, cap=4 * m)
        dom = ev.domain_box([4] * m)
        pairs = list(itertools.combinations(dom, 2))
        rng.shuffle(pairs)
        for z1, z2 in pairs[:40]:
            d = two_step_decompose(c, M, z1, z2, ev.argmin(z1), ev.argmin(z2))
            ok, witness = check_sbo_certificate(ev, d)
            assert ok, (z1, z2, witness)


def test_closing_step_single_edge():
    ev = FcmEvaluator((1,), EDGE)
    d = two_step_decompose((1,), EDGE, (4, 4), (0, 0), (4,), (0,))
    z1p, z2p = closing_step(ev, (4, 4), (0, 0), 0, d)
    assert (z1p, z2p) == ((2, 2), (2, 2))


def test_closing_step_properties_random():
    rng = random.Random(52)
    done = 0
    for _ in range(60):
        m = rng.randint(2, 4)
        edges, M = random_simple_graph(rng, m)
        c = [rng.randint(-2, 2) for _ in edges]
        ev = FcmEvaluator(c, M, cap=4 * m)
        dom = ev.domain_box([4] * m)
        random_pairs = [(a, b) for a in dom for b in dom
                        if all((x - y) % 2 == 0 for x, y in zip(a, b))
                        and any(abs(x - y) >= 2 for x, y in zip(a, b))]
        if not random_pairs:
            continue
        z1, z2 = random_pairs[rng.randrange(len(random_pairs))]
        istar = next(i for i in range(m) if abs(z1[i] - z2[i]) >= 2)
        d = two_step_decompose(c, M, z1, z2, ev.argmin(z1), ev.argmin(z2))
        z1p, z2p = closing_step(ev, z1, z2, istar, d)
        # signed movement by exactly two toward the partner at istar
        sgn = 1 if z1[istar] > z2[istar] else -1
        assert z1p[istar] == z1[istar] - 2 * sgn
        assert z2p[istar] == z2[istar] + 2 * sgn
        assert tuple(a + b for a, b in zip(z1p, z2p)) == \
            tuple(a + b for a, b in zip(z1, z2))
        # parity class is preserved
        assert all((a - b) % 2 == 0 for a, b in zip(z1p, z1))
        # unchanged coordinates stay put
        for i in range(m):
            if z1[i] == z2[i]:
                assert z1p[i] == z1[i] and z2p[i] == z2[i]
        # progress measure of the convexity proof: total distance at istar
        # to any target strictly between the pair drops by exactly 4
        if abs(z1[istar] - z2[istar]) >= 4:
            t = (z1[istar] + z2[istar]) // 2
            t -= (t - z1[istar]) % 2
            before = abs(z1[istar] - t) + abs(z2[istar] - t)
            after = abs(z1p[istar] - t) + abs(z2p[istar] - t)
            assert after == before - 4
        done += 1
    assert done >= 10


def test_lattice_convexity_k3_counterexample_is_precondition_error():
    with pytest.raises(FormError):
        check_lattice_convexity((0, 0, 0), K3, [(0, 0, 0), (2, 2, 2)],
                                ["1/2", "1/2"])


def test_lattice_convexity_trivial_multiplier():
    assert check_lattice_convexity((0, 0, 0), K3, [(0, 0, 0), (2, 2, 2)],
                                   [1, 0])


def test_lattice_convexity_vacuous_with_infinite_value():
    # (1,1,1) has no perfect matching on K3; inequality is vacuous
    assert check_lattice_convexity((0, 0, 0), K3,
                                   [(1, 1, 1), (1, 1, 1)], ["1/2", "1/2"])


def test_convexity_scan_random_graphs():
    rng = random.Random(53)
    for _ in range(8):
        m = rng.randint(2, 4)
        edges, M = random_simple_graph(rng, m)
        c = [rng.randint(-3, 3) for _ in edges]
        assert convexity_scan(c, M, [4] * m) is None


def test_pr_membership_generator_and_ray():
    ev = FcmEvaluator((1, 1, 1), K3)
    # generators themselves are inside
    status, _ = pr_membership((1, 1, 1), K3, (0, 0, 0), 4, (3, 2, 2, 2))
    assert status == "inside"
    # plus the vertical recession ray
    status, _ = pr_membership((1, 1, 1), K3, (0, 0, 0), 4, (8, 2, 2, 2))
    assert status == "inside"


def test_pr_membership_outside_with_verified_hyperplane():
    status, alpha = pr_membership((1, 1, 1), K3, (0, 0, 0), 4, (0, 1, 1, 1))
    assert status == "outside"
    assert alpha is not None and alpha[0] <= 0


def test_pr_membership_integral_iff_value_bound():
    """For integral lattice q = (omega, z): inside iff f(z) <= omega."""
    rng = random.Random(54)
    for _ in range(6):
        m = rng.randint(2, 3)
        edges, M = random_simple_graph(rng, m)
        c = [rng.randint(0, 2) for _ in edges]
        ev = FcmEvaluator(c, M, cap=3 * m)
        r = tuple(rng.randint(0, 1) for _ in range(m))
        U = 3
        for z in itertools.product(*(range(r[i], U + 1, 2)
                                     for i in range(m))):
            fz = ev.value(z)
            for omega in range(0, 7):
                status, _ = pr_membership(c, M, r, U, (omega,) + z,
                                          evaluator=ev)
                want = (not is_infinite(fz)) and fz <= omega
                assert (status == "inside") == want, (z, omega, fz)


def test_pr_membership_cap():
    from matchback.matching import CapExceeded
    with pytest.raises(CapExceeded):
        pr_membership((0,) * 6, [[0] * 6] * 6, (0,) * 6, 4, (0,) * 7)
