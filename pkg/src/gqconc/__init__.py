"""G_q-concurrence: pure and mixed-state evaluation, convex roofs and monogamy indicators."""

__version__ = "0.1.0"

from .qcore import (
    DensityMatrix,
    PureState,
    derive_seed,
    haar_random_pure,
    partial_trace,
    random_mixed,
    reduced_state,
)
from .measures import (
    concurrence_pure,
    gq_concurrence_pure,
    gq_concurrence_2xd_mixed,
    h_q,
    h_q_squared,
    wootters_concurrence,
)
from .roof import RoofConfig, roof_minimize, theorem1_checks, verify_theorem1
from .monogamy import (
    HierarchySpec,
    alpha_residual,
    compare_sc_sgqc,
    hierarchy_sweep,
    residual_from_values,
    sc_residual,
    tau1_mixed,
    tau2_mixed,
    tau_qk_pure,
)
