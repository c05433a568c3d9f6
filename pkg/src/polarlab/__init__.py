"""Polar-code lossy source coding lab.

Building blocks for rate-distortion experiments with polar codes: the
transform, channel models and their synthesis steps, reliability
profiles, successive-cancellation codecs with randomized rounding, and
nested-code schemes (side information, known interference, defect
memories, helper rates).  The ``polarlab`` command line exposes
profiles, sweeps, scheme runs, and validation suites.
"""

__version__ = "0.1.0"

from .channel import (
    Channel,
    bhattacharyya,
    binary_entropy,
    binary_entropy_inverse,
    channel_from_dict,
    channel_to_dict,
    combine_minus,
    combine_plus,
    llr_table,
    make_bec,
    make_bsc,
    make_bsec,
    make_channel,
    rate_distortion_bss,
    sample_word,
    star,
    symmetric_mutual_info,
)
from .codec import (
    CodeSpec,
    DecisionTrace,
    ExperimentResult,
    GaugeReport,
    InvalidObservationError,
    QuantNoiseStats,
    SourceModel,
    bss_source,
    channel_decode,
    defect_state_source,
    distortion,
    gauge_check,
    measure_rd,
    pack_payload,
    quant_noise_stats,
    sc_pass,
    source_decode,
    source_encode,
    unpack_payload,
)
from .construction import (
    GapTable,
    ReliabilityProfile,
    TreeProcessTrace,
    frozen_count_for_rate,
    gap_table,
    load_profile,
    nested_frozen,
    save_profile,
    select_frozen,
    select_frozen_threshold,
    tree_process_sample,
    vanishing_threshold,
    z_profile_bec,
    z_profile_enum,
    z_profile_monte_carlo,
)
from .schemes import (
    NestedCodeSpec,
    SchemeResult,
    design_gp,
    design_one_helper,
    design_storage,
    design_wz,
    gp_decode,
    gp_encode,
    helper_decode,
    helper_quantize,
    helper_syndrome,
    run_gp,
    run_one_helper,
    run_storage,
    run_wz,
    storage_read,
    storage_write,
    wz_decode,
    wz_encode,
)
from .transform import bit_reversal, extract, polar_transform

__all__ = [
    "__version__",
    # transform
    "bit_reversal",
    "extract",
    "polar_transform",
    # channel
    "Channel",
    "bhattacharyya",
    "binary_entropy",
    "binary_entropy_inverse",
    "channel_from_dict",
    "channel_to_dict",
    "combine_minus",
    "combine_plus",
    "llr_table",
    "make_bec",
    "make_bsc",
    "make_bsec",
    "make_channel",
    "rate_distortion_bss",
    "sample_word",
    "star",
    "symmetric_mutual_info",
    # codec
    "CodeSpec",
    "DecisionTrace",
    "ExperimentResult",
    "GaugeReport",
    "InvalidObservationError",
    "QuantNoiseStats",
    "SourceModel",
    "bss_source",
    "channel_decode",
    "defect_state_source",
    "distortion",
    "gauge_check",
    "measure_rd",
    "pack_payload",
    "quant_noise_stats",
    "sc_pass",
    "source_decode",
    "source_encode",
    "unpack_payload",
    # construction
    "GapTable",
    "ReliabilityProfile",
    "TreeProcessTrace",
    "frozen_count_for_rate",
    "gap_table",
    "load_profile",
    "nested_frozen",
    "save_profile",
    "select_frozen",
    "select_frozen_threshold",
    "tree_process_sample",
    "vanishing_threshold",
    "z_profile_bec",
    "z_profile_enum",
    "z_profile_monte_carlo",
    # schemes
    "NestedCodeSpec",
    "SchemeResult",
    "design_gp",
    "design_one_helper",
    "design_storage",
    "design_wz",
    "gp_decode",
    "gp_encode",
    "helper_decode",
    "helper_quantize",
    "helper_syndrome",
    "run_gp",
    "run_one_helper",
    "run_storage",
    "run_wz",
    "storage_read",
    "storage_write",
    "wz_decode",
    "wz_encode",
]
