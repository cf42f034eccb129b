"""matchback: exact solvers for ILPs near the generalized matching problem.

The toolkit covers the full desk-scale pipeline: instance model and MBILP
format, the gadget reduction to perfect b-matching form, exact matching
engines, jump-convexity certificates, parity-guessing tall solver, the
randomized Pfaffian route for mixed backdoors, circuit/proximity theory,
Graver augmentation, and a brute-force oracle that everything is tested
against.
"""

from .instance import (
    IlpInstance,
    BidirectedGraph,
    Edge,
    ParseError,
    FormError,
    INF,
    NEG_INF,
    parse_instance,
    make_instance,
    matching_instance,
    detect_tall_backdoor,
    detect_mixed_backdoor,
    incidence_graph,
)
from .matching import (
    FcmEvaluator,
    INFINITE,
    f_cm,
    is_infinite,
    min_cost_perfect_matching,
    parity_constrained_opt,
    solve_generalized_matching,
)
from .reduction import (
    SolutionMap,
    Infeasible,
    normalize_to_b_matching,
    expand_gb,
    condense_constraints,
    reduce_coefficients_to_01,
    add_quadrangles,
    pull_back,
    push_forward,
)
from .tall import solve_tall
from .mixed import (
    solve_mixed,
    solve_wide_graver,
    graver_enumerate,
    graver_best_step,
    gen_psi_hardness,
)
from .proximity import (
    enumerate_circuits,
    c_inf,
    check_circuit_bound,
    lp_relaxation_vertex,
    proximity_box,
    gen_proximity_lb,
)
from .jumpconvex import (
    two_step_decompose,
    check_sbo_certificate,
    closing_step,
    check_lattice_convexity,
    convexity_scan,
    pr_membership,
)
from .pfaffian import (
    TruncatedPoly,
    pfaffian_division_free,
    isolation_sample,
    exact_matching_objective,
)
from .oracle import (
    OracleBudget,
    brute_force_solve,
    enumerate_perfect_matchings,
    brute_force_f,
)
from .generators import GenSpec, gen_random

__version__ = "0.1.0"
