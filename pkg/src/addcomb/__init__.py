"""addcomb: exact machinery for sum-product set statistics.

Finite integer sets with exact sumset/energy arithmetic, prime-exponent
lattice embeddings and rank statistics, bipartite graph pruning and
fiberings, the uniform-fiber refinement pipeline, separation-constant bounds
with exact empirical measurement, closed-form scale-recursion evaluators,
and a seeded experiment harness.
"""

from .errors import ToolkitError
from .intset import (
    FiniteIntSet,
    RepFunction,
    EnergyReport,
    DoublingStats,
    sumset,
    productset,
    difference_set,
    rep_function,
    energy_plus,
    energy_k,
    restricted_sumset,
    doubling_stats,
)
from .valuation import (
    PrimeIndex,
    LatticeSet,
    RankReport,
    valuate,
    covaluate,
    mult_dimension,
    freiman_check,
    injective_projection,
)
from .bigraph import (
    BiGraph,
    RegularizedGraph,
    Fibering,
    cheap_regularize,
    base_graph,
    fiber_graph,
    fiber_set,
    natural_fibering,
)
from .fibering import (
    ConstantsConfig,
    FiberingDecomposition,
    FiberingTrace,
    dyadic_pigeonhole,
    choose_split,
    fibering_lemma,
)
from .separation import (
    SlicedFamily,
    SeparationBound,
    CoverSystem,
    empirical_ratio,
    trivial_bound,
    one_prime_bound,
    chang_bound,
    compose_bounds,
    energy_cover_bound,
    final_assembly,
)
from .paramflow import (
    ParamTriple,
    PairValue,
    StrongPairConstants,
    trivial_pair,
    freiman_pair,
    better_pair,
    strong_pair,
    strong_contraction,
    theorem1_exponent,
    induction_step,
    tree_simulate,
)

__version__ = "0.1.0"
