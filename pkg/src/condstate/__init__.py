"""Quantum conditional states: a causally neutral calculus for quantum inference.

The public API is re-exported here; see the submodules for details.
"""

from .bayes import (
    alt_conditional,
    barnum_knill_map,
    bayes_invert,
    condition_on_classical,
    conditioning_update,
    fuchs_posterior_states,
    info_disturbance_check,
    jeffrey_update,
    pretty_good_measurement,
    projection_update,
    retrodict,
    steering_ensemble,
    steering_joint,
    update_rule_decompose,
)
from .channels import (
    Instrument,
    KrausChannel,
    MatrixMap,
    apply_channel,
    apply_map,
    choi_operator,
    compose_conditionals,
    dual_apply,
    instrument_channel_conditional,
    instrument_povm,
    instrument_to_conditional,
    instrument_update,
    jamiolkowski_to_map,
    jamiolkowski_to_state,
    luders_instrument,
    map_from_function,
    propagate,
    swap_conditional,
)
from .classical import (
    ClassicalConditionalTable,
    ClassicalDistribution,
    embed_classical,
    extract_classical,
)
from .conditionals import (
    ChainDecomposition,
    ConditionalState,
    HybridConditional,
    JointState,
    chain_decompose,
    conditional_from_joint,
    ensemble_to_conditional,
    joint_from_conditional,
    povm_to_conditional,
    pure_conditional_from_isometry,
)
from .errors import *  # noqa: F401,F403
from .limits import limitation_demos
from .linalg import (
    DEFAULT_TOL,
    HermitianSpectrum,
    Tolerances,
    frob_distance,
    herm_sqrt,
    is_acausal_conditional,
    is_causal_conditional,
    is_density,
    spectrum,
    star,
    star_inv,
    support_pinv,
    support_projector,
)
from .regions import (
    LabeledOperator,
    RegionSpace,
    embed,
    padded_mul,
    partial_trace,
    partial_transpose,
    relabel,
    tensor,
)

__version__ = "0.1.0"
