"""vckit: exact VC-theory objects on finite weighted grounds.

Computes VC and dual VC dimension, joins and Boolean independence,
partition boundaries with refinement strategies, constructive bracket
covers for set and function classes, and uniform-law-of-large-numbers
traces over seeded stationary processes.
"""

__version__ = "0.1.0"

from .boundary import (
    ApproximationResult,
    BoundaryProfile,
    CounterexampleInstance,
    approximate,
    boundary_profile,
    make_counterexample,
    pi_boundary,
)
from .bracketing import (
    BracketCover,
    DiscreteFunctionClass,
    ExactBracketingNumber,
    FunctionBracket,
    SetBracket,
    bracket_cover_from_partition,
    bracketing_number_exact,
    support_partition,
    truncate_and_extend,
    vc_graph_brackets,
    vc_major_brackets,
)
from .core import (
    DimensionSearch,
    GroundSpace,
    Partition,
    SetFamily,
    boolean_independent,
    dual_family,
    dual_vc_dimension,
    dual_vc_dimension_search,
    join,
    shatters,
    vc_dimension,
    vc_dimension_search,
)
from .errors import (
    BudgetError,
    DomainError,
    InternalInvariantError,
    SizeGuardError,
    ValidationError,
    VCKitError,
)
from .instance import Instance, instance_to_dict, load_instance, parse_instance
from .processes import (
    DiscrepancyTrace,
    ProcessConfig,
    discrepancy,
    generate,
    rng_for,
    rotation_ground,
    stationary_law,
    truth_weights,
    ulln_experiment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
