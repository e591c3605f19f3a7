"""Damped spin-1/2 relaxation maps with memory, and their information flow.

Closed-form damping maps for the convolution and dressed-kernel master
equations of a qubit in a thermal bath, two independent integration oracles,
time-local rate extraction, Choi/positivity/divisibility analysis, and the
trace-distance non-Markovianity measure.
"""

__version__ = "0.1.0"

from .analysis import (
    CpVerdict,
    DivisibilityReport,
    IntermediateMap,
    MapInversionError,
    PositivityVerdict,
    RegimeReport,
    ScanResult,
    choi_eigenvalues,
    choi_of,
    classify,
    cp_scan,
    cp_temperature_threshold,
    divisibility_scan,
    intermediate_map,
    is_completely_positive,
    is_positive,
    positivity_scan,
)
from .maps import (
    EquationKind,
    MapParams,
    MapSnapshot,
    SingularRateError,
    TclRates,
    apply,
    apply_map,
    parse_kind,
    rate_divergence_time,
    snapshot,
    snapshot_arrays,
    tcl_rate_arrays,
    tcl_rates,
    xi,
    xi_derivative,
    xi_envelope,
)
from .measure import (
    DegeneratePairError,
    FlowReport,
    MeasureResult,
    certified_horizon,
    flow_report,
    measure,
    sigma_analytic,
)
from .states import (
    EXCITED,
    GROUND,
    MAXIMALLY_MIXED,
    PLUS,
    QubitState,
    StatePair,
    bloch_of,
    random_state,
    random_states,
    state_from_bloch,
    trace_distance,
    validate_state,
)
from .volterra import (
    AugmentedTrajectory,
    IntegrationDivergenceError,
    generator_matrix,
    integrate_memory_kernel,
    integrate_post_markovian,
    integrate_quadrature,
    integrate_tcl,
)

__all__ = [
    "__version__",
    "EXCITED",
    "GROUND",
    "MAXIMALLY_MIXED",
    "PLUS",
    "QubitState",
    "StatePair",
    "bloch_of",
    "random_state",
    "random_states",
    "state_from_bloch",
    "trace_distance",
    "validate_state",
    "EquationKind",
    "MapParams",
    "MapSnapshot",
    "SingularRateError",
    "TclRates",
    "apply",
    "apply_map",
    "parse_kind",
    "rate_divergence_time",
    "snapshot",
    "snapshot_arrays",
    "tcl_rate_arrays",
    "tcl_rates",
    "xi",
    "xi_derivative",
    "xi_envelope",
    "AugmentedTrajectory",
    "IntegrationDivergenceError",
    "generator_matrix",
    "integrate_memory_kernel",
    "integrate_post_markovian",
    "integrate_quadrature",
    "integrate_tcl",
    "CpVerdict",
    "DivisibilityReport",
    "IntermediateMap",
    "MapInversionError",
    "PositivityVerdict",
    "RegimeReport",
    "ScanResult",
    "choi_eigenvalues",
    "choi_of",
    "classify",
    "cp_scan",
    "cp_temperature_threshold",
    "divisibility_scan",
    "intermediate_map",
    "is_completely_positive",
    "is_positive",
    "positivity_scan",
    "DegeneratePairError",
    "FlowReport",
    "MeasureResult",
    "certified_horizon",
    "flow_report",
    "measure",
    "sigma_analytic",
]
