"""Low-complexity parallel decoding of G_N-coset codes."""
from .code import (
    CodeSpec,
    construct_gaussian_approx,
    construct_product_gaussian_approx,
    derive_component_frozen_sets,
    encode,
    extract_info,
    kronecker_transform,
    load_code_spec,
    save_code_spec,
    syndrome_check,
)
from .decoder import (
    DampingSchedule,
    DecodeResult,
    Graph,
    decode_iteration,
    generate_llr,
    load_schedule,
    default_schedule,
    parallel_decode,
    save_schedule,
)
from .kernels import BACKEND
from .sc import LLR_MAX, check_node, sc_decode, variable_node

__version__ = "0.1.0"
