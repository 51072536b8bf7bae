"""Network comparison and soft alignment via optimal transition couplings.

Two weighted directed networks induce random walks; coupling those walks so
the joint process is itself a stationary Markov chain whose conditional
steps couple the marginal kernels, and minimizing the stationary expected
vertex cost, yields a difference measure together with probabilistic vertex
and edge alignments that only ever match existing edges.
"""

__version__ = "0.1.0"

from .costs import (
    CostMatrix,
    cost_attribute,
    cost_degree,
    cost_embedding,
    cost_zero_one_identity,
)
from .factors import (
    extend_network,
    FactorMap,
    check_cost_compatible,
    factor_coupling,
    generate_factor_pair,
    relatively_independent_coupling,
    verify_factor,
)
from .networks import (
    MarkovKernel,
    Network,
    StationaryDistribution,
    build_network,
    degree_vector,
    is_strongly_connected,
    networks_equivalent,
    stationary_distribution,
    transition_kernel,
)
from .solver import (
    OtcSolution,
    TransitionCoupling,
    hard_alignment,
    independent_coupling,
    multistep_average_cost,
    one_step_otc_baseline,
    solve_entropic_otc,
    solve_exact_otc,
    solve_lp_oracle,
    verify_lower_bounds,
)
from .transport import Coupling, ot_exact, ot_sinkhorn, total_variation

__all__ = [
    "CostMatrix",
    "Coupling",
    "FactorMap",
    "MarkovKernel",
    "Network",
    "OtcSolution",
    "StationaryDistribution",
    "TransitionCoupling",
    "build_network",
    "check_cost_compatible",
    "cost_attribute",
    "cost_degree",
    "cost_embedding",
    "cost_zero_one_identity",
    "degree_vector",
    "extend_network",
    "factor_coupling",
    "generate_factor_pair",
    "hard_alignment",
    "independent_coupling",
    "is_strongly_connected",
    "multistep_average_cost",
    "networks_equivalent",
    "one_step_otc_baseline",
    "ot_exact",
    "ot_sinkhorn",
    "relatively_independent_coupling",
    "solve_entropic_otc",
    "solve_exact_otc",
    "solve_lp_oracle",
    "stationary_distribution",
    "total_variation",
    "transition_kernel",
    "verify_factor",
    "verify_lower_bounds",
]
