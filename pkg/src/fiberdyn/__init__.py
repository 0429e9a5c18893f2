"""fiberdyn: measurable bundles of matrix and circle dynamics.

Finite atomic measure spaces carrying one fiber algebra per atom (complex
matrices, or trigonometric polynomials on the circle), with vector-valued
norms, state bundles, unital positive map bundles, and Cesaro-averaging
convergence experiments on top.
"""

from .errors import (
    ConfigError,
    ConstructionError,
    DegreeBudgetError,
    FiberdynError,
    KindMismatchError,
    SpaceMismatchError,
)
from .measure import (
    DEFAULT_TOL,
    AtomicMeasureSpace,
    L0Element,
    ess_sup,
    lifting_apply,
    o_limit_check,
    support_split,
)
from .fibers import (
    FiberKind,
    MatrixFiberElement,
    TrigPolyFiberElement,
    c_star_identity_residual,
    conditional_expectation,
    fib_add,
    fib_adjoint,
    fib_equal,
    fib_mul,
    fib_norm,
    fib_scale,
    fib_sub,
    fib_unit,
    fib_zero,
    is_positive,
    matrix_exp,
    tensor,
    trig_norm_error_bound,
    trig_values,
)
from .sections import (
    Section,
    VectorSection,
    apply_operator,
    bo_limit_check,
    constant_section,
    d_decompose,
    inner_product,
    operator_adjoint,
    section_norm,
    unit_section,
    vector_norm,
    zero_section,
)
from .states import (
    FunctionalSuiteReport,
    L0Functional,
    StateBundle,
    TrigState,
    cauchy_schwarz_residual,
    functional_norm,
    positive_functional_suite,
    state_eval,
    state_functional,
)
from .markov import (
    CoefficientMultiplierMap,
    CriterionReport,
    KrausMap,
    MapBundle,
    MarkovBundle,
    NormEstimate,
    PositivityCertificate,
    RotationMap,
    SuperoperatorMap,
    dual_apply,
    invariance_residual,
    invariance_residual_routes,
    markov_apply,
    markov_localize,
    markov_norm_estimate,
    matrix_unit_probes,
    matrix_unit_section,
    positivity_criterion_check,
    state_localize,
)
from .dynamics import (
    DEFAULT_N_GRID,
    ConvergenceReport,
    DynamicalSystemBundle,
    build_dilation_channel_system,
    build_rotation_system,
    cesaro_average,
    deviation_prediction,
    dilation_kraus,
    dilation_operator,
    dilation_side_condition_residual,
    ergodicity_deviation,
    fixed_point_dims,
    fixed_point_space,
    fixed_space_distance,
    is_uniquely_ergodic,
    rotation_mode_average,
    rotation_mode_deviation_bound,
    run_convergence_sweep,
    spectral_gap,
    uniform_ue_deviation,
    unique_ergodicity_deviation,
)
from .config import (
    DEFAULTS,
    ExperimentConfig,
    Tolerances,
    build_system,
    load_config,
    parse_config,
    seeded_observable,
)

__version__ = "0.1.0"
