from .binning import (
    BinningCode,
    DecodeResult,
    NestedBinningCode,
    NestedBinningSchedule,
    ProtocolParams,
    all_sequences,
    bin_count,
    binning_error_exact,
    build_binning,
    build_nested_binning,
    decode_binning,
    encode_binning,
    nested_rate_schedule,
    sequence_index,
    successive_decode,
)
from .bounds import (
    HashBudget,
    SmoothedFunction,
    hash_length_budget,
    hashed_distance,
    lhl_rhs,
    min_entropy,
    smooth_truncate,
    smoothing_delta,
)
from .hashing import (
    ToeplitzHash,
    bits_to_hex,
    collision_probability,
    privacy_amplify,
    serialize_symbols,
    toeplitz_hash,
)
