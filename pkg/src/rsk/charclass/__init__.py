"""Exact F2 characteristic-class calculus."""
from .homology import HomologyTable, homology_checks, selfintersection_Q
from .ring import F2Element, RingSpec
from .stiefel import (
    RING_RP2_S1,
    SWClass,
    binom_mod2,
    check_closed_forms,
    closed_forms,
    mapping_torus_breakdown,
    mapping_torus_w3,
    splitting_oracle,
    tensor_by_line,
    w3_identity_torus,
    whitney_sum,
)

__all__ = [
    "F2Element", "HomologyTable", "RING_RP2_S1", "RingSpec", "SWClass", "binom_mod2", "check_closed_forms",
    "closed_forms", "homology_checks", "mapping_torus_breakdown", "mapping_torus_w3", "selfintersection_Q",
    "splitting_oracle", "tensor_by_line", "w3_identity_torus", "whitney_sum",
]
