from .checknode import (
    CheckNodeError,
    OpCounter,
    StepReport,
    check_node_min_max_selective,
    check_node_min_max_standard,
    check_node_min_sum,
    check_node_p_norm,
    check_node_sum_product,
    min_max_step_selective,
    selective_sets,
)
from .engine import (
    DecodeResult,
    Decoder,
    DecoderConfig,
    DecoderError,
    Rule,
    a_posteriori_order,
    convention_for,
    decode,
    hard_decision,
    normalize_intrinsic_ai,
    variable_node_update,
)
