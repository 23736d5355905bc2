"""fuplab: a numerical laboratory for fractal uncertainty experiments.

The package builds and verifies the objects behind higher-dimensional
fractal-uncertainty estimates: regular and porous fractal sets, the
conformal rectangle map and its small-aspect asymptotics, logarithmic
potential-theory bounds, localization inequalities for band-limited
functions, compactly supported damping multipliers, discretized
Fourier-restriction operators with measured norm-decay exponents, and
the explicit constant chain connecting all of these.  A batch CLI
(``fuplab``) runs reproducible experiments and persists their artifacts.
"""

from .conformal import (
    AsymptoticsReport,
    ConformalRectangleMap,
    arcsn,
    asymptotics_report,
    elliptic_H,
    elliptic_L,
    phi_moebius,
    solve_k_for_q,
)
from .constants import (
    ChainInputs,
    ConstantChain,
    DampingParams,
    beta_chain,
    choose_L,
    damping_params,
    r1_threshold,
    theta_weight,
)
from .damping import (
    AdmissibleFrame,
    ConstructionError,
    CoverSpec,
    DampingFunction,
    DampingReport,
    HypothesisError,
    Weight,
    build_multiplier,
    build_regular_damping,
    hilbert_modified,
    multiplier_axis,
    product_damping,
    regular_weight,
    verify_damping,
)
from .fup_operator import (
    DENSE_CAP,
    DiffeoSpec,
    FupInstance,
    FupOperator,
    IterationReport,
    NormCurve,
    NormPoint,
    assemble_operator,
    discrete_subfourier,
    distorted_fup_norm,
    fup_decay_curve,
    iterate_damping_demo,
    operator_norm,
    sample_with_spectrum_in,
)
from .localization import (
    IntervalFamily,
    LocalizationReport,
    SampledFunction,
    TorusGrid,
    UpThetaReport,
    band_limited_sample,
    localization_check,
    up_theta_check,
)
from .potential_theory import (
    AnalyticFromZeros,
    CartanDSet,
    DiskCover,
    PointMasses,
    RieszBoundsReport,
    TwoVarPolynomial,
    build_cartan2,
    cartan_disks,
    cartan_level_constant,
    log_potential,
    trace_measure,
    verify_riesz_bounds,
)
from .regular_sets import (
    CantorSpec,
    CubeMeasure,
    GridSet,
    PorosityReport,
    RegularityReport,
    build_cantor,
    check_porosity,
    check_regularity,
    find_empty_subcube,
    gridset_from_json,
    gridset_to_json,
    merged_intervals,
    natural_measure,
    scale_shift,
    thicken,
)

__version__ = "1.0.0"

__all__ = [
    "__version__",
    # regular sets
    "CantorSpec", "GridSet", "CubeMeasure", "RegularityReport",
    "PorosityReport", "build_cantor", "natural_measure", "check_regularity",
    "check_porosity", "scale_shift", "thicken", "find_empty_subcube",
    "gridset_to_json", "gridset_from_json", "merged_intervals",
    # conformal
    "ConformalRectangleMap", "AsymptoticsReport", "elliptic_L", "elliptic_H",
    "solve_k_for_q", "arcsn", "phi_moebius", "asymptotics_report",
    # potential theory
    "PointMasses", "DiskCover", "CartanDSet", "RieszBoundsReport",
    "AnalyticFromZeros", "TwoVarPolynomial", "log_potential", "cartan_disks",
    "verify_riesz_bounds", "cartan_level_constant", "build_cartan2",
    "trace_measure",
    # localization
    "TorusGrid", "SampledFunction", "IntervalFamily", "LocalizationReport",
    "UpThetaReport", "band_limited_sample", "localization_check",
    "up_theta_check",
    # damping
    "Weight", "DampingFunction", "DampingReport", "CoverSpec",
    "AdmissibleFrame", "HypothesisError", "ConstructionError",
    "hilbert_modified", "multiplier_axis", "build_multiplier",
    "regular_weight", "build_regular_damping", "product_damping",
    "verify_damping",
    # operators
    "DENSE_CAP", "DiffeoSpec", "FupInstance", "FupOperator", "NormCurve",
    "NormPoint", "IterationReport", "assemble_operator", "operator_norm",
    "fup_decay_curve", "distorted_fup_norm", "discrete_subfourier",
    "sample_with_spectrum_in", "iterate_damping_demo",
    # constants
    "theta_weight", "choose_L", "DampingParams", "damping_params",
    "r1_threshold", "ChainInputs", "ConstantChain", "beta_chain",
]
