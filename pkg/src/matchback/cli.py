"""Command-line front end.

Output is line-oriented "key: value" text so runs diff cleanly; identical
arguments and seed produce identical records up to the elapsed field.
Exit codes: 0 success, 1 infeasible/failed answers, 2 usage errors.
"""

from __future__ import annotations

import argparse
import sys
import time

from .instance import (FormError, ParseError, parse_instance,
                       incidence_graph)
from .generators import GenSpec, gen_random
from .matching import (is_infinite, f_cm,
                       solve_generalized_matching, CapExceeded)
from .jumpconvex import convexity_scan
from .mixed import (gen_psi_hardness, graver_basis_inf_bound,
                    graver_enumerate, solve_mixed, solve_wide_graver)
from .oracle import brute_force_solve
from .pfaffian import exact_matching_objective
from .proximity import (c_inf, check_circuit_bound, gen_proximity_lb,
                        lp_relaxation_vertex)
from .reduction import Infeasible, normalize_to_b_matching
from .tall import solve_tall


def _read_instance(path):
    with open(path, "rb") as fh:
        return parse_instance(fh.read())


def _emit(record):
    for key, value in record:
        print("%s: %s" % (key, value))


def _result_record(args, inst, res, method, extra=()):
    rec = [("command", "solve"),
           ("instance", inst.digest()),
           ("method", method),
           ("seed", getattr(args, "seed", 0)),
           ("status", res.status)]
    if res.status == "optimal":
        rec.append(("value", res.value))
        rec.append(("solution", " ".join(str(v) for v in res.y + res.x)))
    if res.detail:
        for k in sorted(res.detail):
            if k == "ray":
                continue
            rec.append((k, res.detail[k]))
    rec.extend(extra)
    return rec


def cmd_solve(args):
    inst = _read_instance(args.instance)
    method = args.method
    auto = method == "auto"
    if auto:
        if inst.p == 0 and inst.h == 0:
            method = "generalized"
        elif inst.h == 0:
            method = "tall"
        else:
            method = "mixed"
    start = time.monotonic()
    if method == "tall" and auto:
        # tall path needs finite bounds and a small parity box; the mixed
        # pipeline covers the rest
        try:
            res = solve_tall(inst, box_cap=args.box_cap)
        except FormError:
            method = "mixed"
            res = solve_mixed(inst, seed=args.seed, trials=args.trials)
        rec = _result_record(args, inst, res, method)
        rec.append(("elapsed", "%.3f" % (time.monotonic() - start)))
        _emit(rec)
        return 0 if res.status == "optimal" else 1
    if method == "generalized":
        res = solve_generalized_matching(inst)
    elif method == "tall":
        res = solve_tall(inst, box_cap=args.box_cap)
    elif method == "mixed":
        res = solve_mixed(inst, seed=args.seed, trials=args.trials)
    elif method == "graver":
        res = solve_wide_graver(inst)
    elif method == "exact-matching":
        r = exact_matching_objective(inst, seed=args.seed, trials=args.trials)
        _emit([("command", "solve"), ("instance", inst.digest()),
               ("method", "exact-matching"), ("seed", args.seed),
               ("status", r.status),
               ("value", r.value if r.value is not None else "-"),
               ("trials", r.trials),
               ("failure-bound", r.failure_bound or 0),
               ("elapsed", "%.3f" % (time.monotonic() - start))])
        return 0 if r.status == "value" else 1
    elif method == "bruteforce":
        r = brute_force_solve(inst)
        _emit([("command", "solve"), ("instance", inst.digest()),
               ("method", "bruteforce"), ("status", r.status),
               ("value", r.value if r.status == "optimal" else "-"),
               ("solution", " ".join(str(v) for v in r.y + r.x)
                if r.status == "optimal" else "-"),
               ("elapsed", "%.3f" % (time.monotonic() - start))])
        return 0 if r.status == "optimal" else 1
    else:
        raise FormError("unknown method %s" % method)
    rec = _result_record(args, inst, res, method)
    rec.append(("elapsed", "%.3f" % (time.monotonic() - start)))
    _emit(rec)
    return 0 if res.status == "optimal" else 1


def cmd_reduce(args):
    inst = _read_instance(args.instance)
    out = normalize_to_b_matching(inst)
    if isinstance(out[0], Infeasible):
        print("status: trivially-infeasible")
        print("stage: %s" % out[0].stage)
        return 1
    reduced, smap = out
    with open(args.output, "w") as fh:
        fh.write(reduced.serialize())
    with open(args.output + ".map", "w") as fh:
        fh.write(smap.serialize())
    _emit([("command", "reduce"), ("instance", inst.digest()),
           ("output", args.output), ("steps", len(smap.steps)),
           ("offset", smap.offset),
           ("n", "%d -> %d" % (inst.n, reduced.n)),
           ("m", "%d -> %d" % (inst.m, reduced.m))])
    return 0


def cmd_check(args):
    inst = _read_instance(args.instance)
    with open(args.solution) as fh:
        values = [int(t) for t in fh.read().split()]
    if len(values) != inst.p + inst.n:
        print("status: malformed solution (expected %d values)"
              % (inst.p + inst.n))
        return 1
    y, x = tuple(values[:inst.p]), tuple(values[inst.p:])
    if inst.is_feasible(y, x):
        _emit([("command", "check"), ("instance", inst.digest()),
               ("status", "feasible"), ("value", inst.objective(y, x))])
        return 0
    _emit([("command", "check"), ("instance", inst.digest()),
           ("status", "infeasible")])
    return 1


def cmd_fcm(args):
    inst = _read_instance(args.instance)
    z = tuple(int(t) for t in args.z.split(","))
    if len(z) != inst.m:
        print("error: z needs %d entries" % inst.m)
        return 2
    val = f_cm(inst.c, inst.M, z, cap=args.cap)
    print("f: %s" % ("inf" if is_infinite(val) else val))
    return 0


def cmd_convexity(args):
    inst = _read_instance(args.instance)
    graph = incidence_graph(inst.M)
    if not graph.is_simple():
        print("error: convexity scan needs a simple matching block")
        return 2
    violation = convexity_scan(inst.c, inst.M, [args.box] * inst.m)
    if violation is None:
        print("status: pass")
        print("box: [0,%d]^%d" % (args.box, inst.m))
        return 0
    points, lambdas = violation
    print("status: VIOLATION")
    print("points: %s" % (points,))
    print("lambdas: %s" % (lambdas,))
    return 1


def cmd_circuits(args):
    inst = _read_instance(args.instance)
    from .proximity import assemble_matrix, enumerate_circuits
    A = assemble_matrix(inst)
    circuits = enumerate_circuits(A)
    ok, observed, bound = check_circuit_bound(A, inst.p, inst.h, inst.delta)
    _emit([("command", "circuits"), ("instance", inst.digest()),
           ("count", len(circuits)), ("c_inf", observed),
           ("bound", bound), ("within-bound", ok)])
    for c in circuits:
        print("circuit: %s" % " ".join(str(v) for v in c.vector))
    return 0


def cmd_lp(args):
    inst = _read_instance(args.instance)
    res = lp_relaxation_vertex(inst)
    rec = [("command", "lp"), ("instance", inst.digest()),
           ("status", res.status)]
    if res.status == "optimal":
        rec.append(("objective", res.objective))
        rec.append(("vertex", " ".join(str(v) for v in res.x)))
    _emit(rec)
    return 0 if res.status == "optimal" else 1


def cmd_graver(args):
    inst = _read_instance(args.instance)
    rows = [list(r) for r in inst.W] + [list(r) for r in inst.M]
    bound = graver_basis_inf_bound(inst.h, inst.delta, inst.m)
    gs = graver_enumerate(rows, cap=args.cap,
                          proven_bound=bound if args.cap >= bound else None)
    _emit([("command", "graver"), ("instance", inst.digest()),
           ("elements", len(gs.elements)), ("g_inf", gs.g_inf),
           ("g_1", gs.g_1), ("proven-bound", bound),
           ("complete", gs.complete)])
    return 0


def cmd_gen(args):
    if args.family == "random":
        spec = GenSpec(p=args.p, h=args.h, m=args.m, n=args.n,
                       delta=args.delta, bound_width=args.width,
                       simple=args.simple, seed=args.seed)
        inst = gen_random(spec)
    elif args.family == "proximity-lb":
        inst, frac, integral, gap_var = gen_proximity_lb(
            args.p, args.h, args.delta, args.k)
        print("# fractional vertex: %s" %
              " ".join(str(v) for v in frac))
        print("# integral solution: %s" %
              " ".join(str(v) for v in integral[0] + integral[1]))
        print("# gap variable: x[%d] = %d" % (gap_var, integral[1][gap_var]))
    elif args.family == "psi":
        pattern = _read_graph(args.pattern)
        host = _read_graph(args.host)
        partition = _read_partition(args.partition)
        psi = gen_psi_hardness(pattern[1], pattern[0], host[1], host[0],
                               partition)
        inst = psi.instance
    else:
        raise FormError("unknown family %s" % args.family)
    if args.family == "proximity-lb":
        pass
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(inst.serialize())
    else:
        sys.stdout.write(inst.serialize())
    return 0


def _read_graph(path):
    """Graph file: one edge per line, 'u v' tokens; vertices are the tokens."""
    vertices = []
    edges = []
    with open(path) as fh:
        for line in fh:
            body = line.split("#", 1)[0].split()
            if not body:
                continue
            u, v = body
            for t in (u, v):
                if t not in vertices:
                    vertices.append(t)
            edges.append((u, v))
    return vertices, edges


def _read_partition(path):
    """Partition file: lines 'w: v1 v2 ...'."""
    out = {}
    with open(path) as fh:
        for line in fh:
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            left, right = body.split(":", 1)
            out[left.strip()] = right.split()
    return out


def cmd_bench(args):
    print("k,gap,bound")
    for k in range(1, args.kmax + 1):
        inst, frac, integral, gap_var = gen_proximity_lb(
            args.p, args.h, args.delta, k)
        gap = integral[1][gap_var]
        ncols = inst.p + inst.n
        from .proximity import circuit_bound, matrix_rank, assemble_matrix
        bound = ncols * circuit_bound(args.p, args.h, args.delta,
                                      matrix_rank(assemble_matrix(inst)))
        print("%d,%d,%d" % (k, gap, bound))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="matchback",
        description="exact solvers for ILPs near generalized matching")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve an MBILP instance")
    ps.add_argument("instance")
    ps.add_argument("--method", default="auto",
                    choices=["auto", "generalized", "tall", "mixed",
                             "graver", "exact-matching", "bruteforce"])
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--trials", type=int, default=20)
    ps.add_argument("--box-cap", type=int, default=10 ** 6)
    ps.set_defaults(func=cmd_solve)

    pr = sub.add_parser("reduce", help="normalize to b-matching form")
    pr.add_argument("instance")
    pr.add_argument("output")
    pr.set_defaults(func=cmd_reduce)

    pc = sub.add_parser("check", help="verify a solution file")
    pc.add_argument("instance")
    pc.add_argument("solution")
    pc.set_defaults(func=cmd_check)

    pf = sub.add_parser("fcm", help="evaluate the b-matching cost f(z)")
    pf.add_argument("instance")
    pf.add_argument("z", help="comma-separated demand vector")
    pf.add_argument("--cap", type=int, default=64)
    pf.set_defaults(func=cmd_fcm)

    pv = sub.add_parser("convexity", help="exhaustive lattice convexity scan")
    pv.add_argument("instance")
    pv.add_argument("--box", type=int, default=4)
    pv.set_defaults(func=cmd_convexity)

    pk = sub.add_parser("circuits", help="enumerate circuits and check bound")
    pk.add_argument("instance")
    pk.set_defaults(func=cmd_circuits)

    pl = sub.add_parser("lp", help="exact LP relaxation vertex")
    pl.add_argument("instance")
    pl.set_defaults(func=cmd_lp)

    pg = sub.add_parser("graver", help="enumerate Graver basis elements")
    pg.add_argument("instance")
    pg.add_argument("--cap", type=int, default=6)
    pg.set_defaults(func=cmd_graver)

    pn = sub.add_parser("gen", help="generate instances")
    pn.add_argument("family", choices=["random", "proximity-lb", "psi"])
    pn.add_argument("--output")
    pn.add_argument("--p", type=int, default=0)
    pn.add_argument("--h", type=int, default=0)
    pn.add_argument("--m", type=int, default=4)
    pn.add_argument("--n", type=int, default=4)
    pn.add_argument("--delta", type=int, default=1)
    pn.add_argument("--k", type=int, default=2)
    pn.add_argument("--width", type=int, default=3)
    pn.add_argument("--simple", action="store_true")
    pn.add_argument("--seed", type=int, default=0)
    pn.add_argument("--pattern")
    pn.add_argument("--host")
    pn.add_argument("--partition")
    pn.set_defaults(func=cmd_gen)

    pb = sub.add_parser("bench", help="proximity gaps vs bound as CSV")
    pb.add_argument("--p", type=int, default=0)
    pb.add_argument("--h", type=int, default=1)
    pb.add_argument("--delta", type=int, default=1)
    pb.add_argument("--kmax", type=int, default=3)
    pb.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ParseError, FormError, CapExceeded, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
