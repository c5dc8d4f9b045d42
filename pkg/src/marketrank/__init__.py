"""Ranks, subspace lattices, martingale measures and hedging for finite
incomplete markets X = theta . W on an exact simplex tree."""

__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from ._linalg import DEFAULT_ANGLE_TOL, DEFAULT_TOL  # noqa: E402
from .complements import (  # noqa: E402
    gram_schmidt,
    is_complement,
    orthogonal_complement,
    star_property,
    verify_lattice_laws,
)
from .geometry import (  # noqa: E402
    RankPartition,
    arrangement,
    maximal_extension,
    rank,
    ranking_partition,
    strict_complement_condition,
)
from .hedging import (  # noqa: E402
    HedgeDecomposition,
    MeasureCell,
    kw_decompose,
    martingale_representation,
    measure_polytope,
    orthogonal_completion,
)
from .market import MarketSpec, build_market, parse_market, print_market  # noqa: E402
from .metrics import correlation, delta_c, delta_i, eta_metric, mu, phi_metric  # noqa: E402
from .process import (  # noqa: E402
    AdaptedProcess,
    IntegrandField,
    covariation,
    integrate,
    is_martingale,
    satisfies_gamma,
    section,
)
from .subspace import (  # noqa: E402
    SubspaceField,
    complement_within,
    contains,
    equals,
    full_field,
    intersect,
    plugin_space,
    realize_generator,
    sum_fields,
    zero_field,
)
from .tree import (  # noqa: E402
    FilteredTree,
    PredictableMeasure,
    PredictableSet,
    build_tree,
    conditional_expectation,
    predictable_expectation,
)

__all__ = [
    "__version__",
    "AdaptedProcess",
    "arrangement",
    "BACKEND",
    "build_market",
    "build_tree",
    "complement_within",
    "conditional_expectation",
    "contains",
    "correlation",
    "covariation",
    "DEFAULT_ANGLE_TOL",
    "DEFAULT_TOL",
    "delta_c",
    "delta_i",
    "equals",
    "eta_metric",
    "FilteredTree",
    "full_field",
    "gram_schmidt",
    "HedgeDecomposition",
    "IntegrandField",
    "integrate",
    "intersect",
    "is_complement",
    "is_martingale",
    "kw_decompose",
    "MarketSpec",
    "martingale_representation",
    "maximal_extension",
    "measure_polytope",
    "MeasureCell",
    "mu",
    "orthogonal_complement",
    "orthogonal_completion",
    "parse_market",
    "phi_metric",
    "plugin_space",
    "predictable_expectation",
    "PredictableMeasure",
    "PredictableSet",
    "print_market",
    "rank",
    "ranking_partition",
    "RankPartition",
    "realize_generator",
    "satisfies_gamma",
    "section",
    "star_property",
    "strict_complement_condition",
    "SubspaceField",
    "sum_fields",
    "verify_lattice_laws",
    "zero_field",
]
