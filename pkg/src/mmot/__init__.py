"""Symmetric multi-marginal optimal transport on finite state spaces."""

from .costs import (
    NBodyCallable,
    NBodyTable,
    PairwiseCost,
    PointCloud,
    coulomb_pairwise,
    discrete_metric_pairwise,
    load_cost,
    nbody_from_pairwise,
    spring_pairwise,
)
from .errors import (
    CapacityError,
    CyclingError,
    InfeasibleError,
    MMOTError,
    NotMongeError,
    NumericalError,
    ValidationError,
)
from .extremal import ExtremePointCatalog, check_representable, phi_n, psi_n, wasserstein_discrete
from .measures import (
    Marginal,
    PairMeasure,
    QuantizedMeasure,
    SAEState,
    StateSpace,
    SymmetricPlan,
    count_quantized,
    enumerate_quantized,
    marginal_k,
    symmetrize,
)
from .monge import MongeState, birkhoff_quantized_decompose, monge_to_sae, sae_to_monge
from .solver import (
    SolveReport,
    maximize_gs,
    maximize_wasserstein,
    solve_colgen,
    solve_monge_bruteforce,
    solve_oracle_full,
    solve_sae,
)

__version__ = "0.1.0"

__all__ = [
    "NBodyCallable",
    "NBodyTable",
    "PairwiseCost",
    "PointCloud",
    "coulomb_pairwise",
    "discrete_metric_pairwise",
    "load_cost",
    "nbody_from_pairwise",
    "spring_pairwise",
    "CapacityError",
    "CyclingError",
    "InfeasibleError",
    "MMOTError",
    "NotMongeError",
    "NumericalError",
    "ValidationError",
    "ExtremePointCatalog",
    "check_representable",
    "phi_n",
    "psi_n",
    "wasserstein_discrete",
    "Marginal",
    "PairMeasure",
    "QuantizedMeasure",
    "SAEState",
    "StateSpace",
    "SymmetricPlan",
    "count_quantized",
    "enumerate_quantized",
    "marginal_k",
    "symmetrize",
    "MongeState",
    "birkhoff_quantized_decompose",
    "monge_to_sae",
    "sae_to_monge",
    "SolveReport",
    "maximize_gs",
    "maximize_wasserstein",
    "solve_colgen",
    "solve_monge_bruteforce",
    "solve_oracle_full",
    "solve_sae",
]
