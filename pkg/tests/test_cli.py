import io
import re
from contextlib import redirect_stdout

from matchback.cli import main
from matchback.instance import make_instance, matching_instance


def run_cli(args):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(args)
    return code, buf.getvalue()


def write_instance(tmp_path, inst, name="inst.mbilp"):
    path = tmp_path / name
    path.write_text(inst.serialize())
    return str(path)


def simple_instance():
    return matching_instance((1,), [[1], [1]], (1, 1), (0,), (1,))


def test_solve_auto_dispatch_and_exit_codes(tmp_path):
    path = write_instance(tmp_path, simple_instance())
    code, out = run_cli(["solve", path])
    assert code == 0
    assert "method: generalized" in out
    assert "status: optimal" in out
    assert "value: 1" in out


def test_auto_dispatch_tall_and_mixed(tmp_path):
    tall = make_instance(p=1, h=0, m=1, n=0, a=(1,), T=[[1]], b=(1,),
                         e=(0,), g=(2,))
    path = write_instance(tmp_path, tall, "tall.mbilp")
    code, out = run_cli(["solve", path])
    assert code == 0 and "method: tall" in out
    mixed = make_instance(p=1, h=1, m=1, n=1, a=(0,), c=(0,), C=[[1]],
                          W=[[1]], T=[[0]], M=[[1]], d=(1,), b=(0,),
                          e=(0,), g=(1,), l=(0,), u=(1,))
    path = write_instance(tmp_path, mixed, "mixed.mbilp")
    code, out = run_cli(["solve", path])
    assert "method: mixed" in out


def test_solve_infeasible_exit_one(tmp_path):
    inst = matching_instance((0,), [[1], [1]], (1, 2), (0,), (5,))
    path = write_instance(tmp_path, inst)
    code, out = run_cli(["solve", path])
    assert code == 1 and "status: infeasible" in out


def test_usage_error_exit_two(tmp_path):
    code, _ = run_cli(["solve", str(tmp_path / "missing.mbilp")])
    assert code == 2
    code, _ = run_cli(["nonsense"])
    assert code == 2


def test_determinism_modulo_elapsed(tmp_path):
    inst = make_instance(p=1, h=1, m=2, n=2, a=(1,), c=(1, 0), C=[[0]],
                         W=[[1, 1]], T=[[1], [0]], M=[[1, 1], [1, 1]],
                         d=(1,), b=(1, 1), e=(0,), g=(2,),
                         l=(0, 0), u=(1, 1))
    path = write_instance(tmp_path, inst)
    _, out1 = run_cli(["solve", path, "--method", "mixed", "--seed", "9"])
    _, out2 = run_cli(["solve", path, "--method", "mixed", "--seed", "9"])
    strip = lambda s: re.sub(r"elapsed: .*", "", s)
    assert strip(out1) == strip(out2)


def test_check_accepts_solver_output(tmp_path):
    instances = {
        "g.mbilp": simple_instance(),
        "t.mbilp": make_instance(p=1, h=0, m=2, n=1, a=(1,), c=(1,),
                                 T=[[1], [1]], M=[[1], [1]], b=(2, 2),
                                 e=(0,), g=(2,), l=(0,), u=(2,)),
        "m.mbilp": make_instance(p=1, h=1, m=2, n=2, a=(1,), c=(1, 0),
                                 C=[[0]], W=[[1, 1]], T=[[1], [0]],
                                 M=[[1, 1], [1, 1]], d=(1,), b=(1, 1),
                                 e=(0,), g=(2,), l=(0, 0), u=(1, 1)),
    }
    for name, inst in instances.items():
        path = write_instance(tmp_path, inst, name)
        code, out = run_cli(["solve", path])
        assert code == 0
        sol = re.search(r"solution: (.*)", out).group(1)
        sol_path = tmp_path / (name + ".sol")
        sol_path.write_text(sol + "\n")
        code, out = run_cli(["check", path, str(sol_path)])
        assert code == 0 and "status: feasible" in out
    bad = tmp_path / "bad.sol"
    bad.write_text("0\n")
    code, out = run_cli(["check", str(tmp_path / "g.mbilp"), str(bad)])
    assert code == 1


def test_reduce_writes_sidecar(tmp_path):
    inst = matching_instance((2,), [[-1], [-1]], (-2, -2), (0,), (3,))
    path = write_instance(tmp_path, inst)
    out_path = str(tmp_path / "reduced.mbilp")
    code, out = run_cli(["reduce", path, out_path])
    assert code == 0
    from matchback.instance import parse_instance
    reduced = parse_instance(open(out_path).read())
    assert all(v >= 0 for v in reduced.c)
    map_text = open(out_path + ".map").read()
    assert map_text.startswith("MAP 1")


def test_fcm_subcommand(tmp_path):
    inst = matching_instance((5,), [[1], [1]], (0, 0), (0,), (9,))
    path = write_instance(tmp_path, inst)
    code, out = run_cli(["fcm", path, "3,3"])
    assert code == 0 and "f: 15" in out
    code, out = run_cli(["fcm", path, "1,2"])
    assert "f: inf" in out


def test_convexity_subcommand(tmp_path):
    inst = matching_instance((1, 1, 1), [[1, 1, 0], [1, 0, 1], [0, 1, 1]],
                             (1, 1, 1), (0, 0, 0), (1, 1, 1))
    path = write_instance(tmp_path, inst)
    code, out = run_cli(["convexity", path, "--box", "3"])
    assert code == 0 and "status: pass" in out


def test_circuits_and_lp_and_graver(tmp_path):
    inst = matching_instance((0,) * 4,
                             [[1, 0, 0, 1], [1, 1, 0, 0],
                              [0, 1, 1, 0], [0, 0, 1, 1]],
                             (1,) * 4, (0,) * 4, (1,) * 4)
    path = write_instance(tmp_path, inst)
    code, out = run_cli(["circuits", path])
    assert code == 0 and "within-bound: True" in out
    code, out = run_cli(["lp", path])
    assert code == 0 and "status: optimal" in out
    code, out = run_cli(["graver", path, "--cap", "2"])
    assert code == 0 and "complete: True" in out


def test_gen_proximity_lb_subcommand(tmp_path):
    out_path = str(tmp_path / "lb.mbilp")
    code, out = run_cli(["gen", "proximity-lb", "--p", "0", "--h", "1",
                         "--delta", "1", "--k", "2", "--output", out_path])
    assert code == 0
    assert "gap variable" in out and "= 4" in out


def test_bench_csv(tmp_path):
    code, out = run_cli(["bench", "--p", "0", "--h", "1", "--delta", "1",
                         "--kmax", "2"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,gap,bound"
    assert len(lines) == 3


def test_auto_falls_back_to_mixed_on_infinite_bounds(tmp_path):
    inst = make_instance(p=1, h=0, m=2, n=1, a=(1,), c=(0,),
                         T=[[1], [1]], M=[[1], [1]], b=(2, 2),
                         e=(0,), l=(0,))
    path = write_instance(tmp_path, inst, "tallinf.mbilp")
    code, out = run_cli(["solve", path])
    assert "method: mixed" in out and code == 0


def test_gen_psi_from_files(tmp_path):
    (tmp_path / "pattern.txt").write_text("w1 w2\n")
    (tmp_path / "host.txt").write_text("0 1\n1 2\n")
    (tmp_path / "partition.txt").write_text("w1: 0 2\nw2: 1\n")
    out_path = str(tmp_path / "psi.mbilp")
    code, _ = run_cli(["gen", "psi",
                       "--pattern", str(tmp_path / "pattern.txt"),
                       "--host", str(tmp_path / "host.txt"),
                       "--partition", str(tmp_path / "partition.txt"),
                       "--output", out_path])
    assert code == 0
    from matchback.instance import parse_instance
    inst = parse_instance(open(out_path).read())
    assert all(v in (0, 1) for row in inst.W for v in row)
    assert all(v == 1 for v in inst.b)
