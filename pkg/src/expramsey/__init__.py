"""Symbolic tower arithmetic, exponential pattern families, explicit
colourings, and certificate-producing monochromatic-instance searches.

The public surface is re-exported here; submodules stay importable for
the long tail (parsers, DIMACS export, sequence classes).
"""

from .errors import (
    ArityMismatch,
    BudgetExceeded,
    BudgetError,
    EvaluationError,
    ExactnessRequired,
    ExpRamseyError,
    FactorizationBudgetExceeded,
    OutOfDomain,
    ParseError,
    SequenceNotSufficientlyLacunary,
    SymbolicUnsupported,
    UncertifiableComparison,
    UncertifiableLogStar,
    UnsupportedShape,
    WeightUndefined,
)
from .tower import (
    DEFAULT_CUTOFF,
    BoundedValue,
    ExpTerm,
    Literal,
    Power,
    Product,
    as_term,
    compare_iter_log,
    dedup_key,
    equal_value,
    eval_exact,
    eval_mod,
    literal,
    log_star,
    max_root_exponent,
    max_root_exponent_mod,
    nu_p,
    parse_term,
    power,
    product,
    to_text,
)
from .patterns import (
    PatternSet,
    ShapeRelation,
    WeightFn,
    fep,
    finite_exponentials,
    finite_products,
    finite_sums,
    has_directed_cycle,
    shape_pattern,
    weighted_products,
)
from .colourings import (
    AbbbColouring,
    Colouring,
    ConstColouring,
    GeometricSequence,
    LacunaryColouring,
    LogStarColouring,
    NPowNLog2Sequence,
    NTimesPow2Sequence,
    Pow2AbbColouring,
    ProductColouring,
    SchurExpColouring,
    TableColouring,
    abbb_colouring,
    build_lacunary_alpha,
    lacunary_colouring,
    logstar_colouring,
    parse_colouring,
    parse_seq,
    pow2_abb_colouring,
    product_colouring,
    schur_exp_colouring,
    table_colouring,
)
from .search import (
    Certificate,
    Instance,
    InstanceFamily,
    RamseyComputation,
    enumerate_instances,
    exp_ramsey_number,
    export_dimacs,
    family_from_descriptor,
    find_monochromatic,
    find_monochromatic_grid,
    ordered_fu_search,
    parse_family,
    vdw_number,
    verify_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "ArityMismatch",
    "BudgetExceeded",
    "BudgetError",
    "EvaluationError",
    "ExactnessRequired",
    "ExpRamseyError",
    "FactorizationBudgetExceeded",
    "OutOfDomain",
    "ParseError",
    "SequenceNotSufficientlyLacunary",
    "SymbolicUnsupported",
    "UncertifiableComparison",
    "UncertifiableLogStar",
    "UnsupportedShape",
    "WeightUndefined",
    "DEFAULT_CUTOFF",
    "BoundedValue",
    "ExpTerm",
    "Literal",
    "Power",
    "Product",
    "as_term",
    "compare_iter_log",
    "dedup_key",
    "equal_value",
    "eval_exact",
    "eval_mod",
    "literal",
    "log_star",
    "max_root_exponent",
    "max_root_exponent_mod",
    "nu_p",
    "parse_term",
    "power",
    "product",
    "to_text",
    "PatternSet",
    "ShapeRelation",
    "WeightFn",
    "fep",
    "finite_exponentials",
    "finite_products",
    "finite_sums",
    "has_directed_cycle",
    "shape_pattern",
    "weighted_products",
    "AbbbColouring",
    "Colouring",
    "ConstColouring",
    "GeometricSequence",
    "LacunaryColouring",
    "LogStarColouring",
    "NPowNLog2Sequence",
    "NTimesPow2Sequence",
    "Pow2AbbColouring",
    "ProductColouring",
    "SchurExpColouring",
    "TableColouring",
    "abbb_colouring",
    "build_lacunary_alpha",
    "lacunary_colouring",
    "logstar_colouring",
    "parse_colouring",
    "parse_seq",
    "pow2_abb_colouring",
    "product_colouring",
    "schur_exp_colouring",
    "table_colouring",
    "Certificate",
    "Instance",
    "InstanceFamily",
    "RamseyComputation",
    "enumerate_instances",
    "exp_ramsey_number",
    "export_dimacs",
    "family_from_descriptor",
    "find_monochromatic",
    "find_monochromatic_grid",
    "ordered_fu_search",
    "parse_family",
    "vdw_number",
    "verify_certificate",
    "__version__",
]
