"""imfkit: intensity mapping functions between exposures and HDR panorama stitching."""

__version__ = "0.1.0"

from .application import apply_imf, compose_imf
from .completion import complete_table, quantize_table
from .errors import (
    DecodeError,
    GeometryError,
    ImfkitError,
    StitchSpecError,
    TableError,
    UnsupportedDepthError,
)
from .estimation import (
    estimate_chm,
    estimate_gc,
    estimate_wha,
    gc_correct,
    segment_map,
    sub_bin_masses,
)
from .fusion import fuse_exposures
from .image import (
    LEVELS,
    Image,
    RegionRect,
    crop,
    cumulate,
    decode_image,
    histogram,
    simulate_overlap,
    write_png,
)
from .metrics import EvalRecord, psnr, ssim, time_op
from .panorama import (
    PairOverlap,
    StitchSpec,
    estimate_pairwise,
    load_stitch_spec,
    stitch_hdr,
    synthesize_all,
    synthesize_benchmark,
)
from .table import (
    ImfTable,
    load_table_csv,
    load_tables_json,
    save_table_csv,
    save_tables_json,
)

__all__ = [
    "LEVELS",
    "DecodeError",
    "EvalRecord",
    "GeometryError",
    "Image",
    "ImfTable",
    "ImfkitError",
    "PairOverlap",
    "RegionRect",
    "StitchSpec",
    "StitchSpecError",
    "TableError",
    "UnsupportedDepthError",
    "apply_imf",
    "complete_table",
    "compose_imf",
    "crop",
    "cumulate",
    "decode_image",
    "estimate_chm",
    "estimate_gc",
    "estimate_pairwise",
    "estimate_wha",
    "fuse_exposures",
    "gc_correct",
    "histogram",
    "load_stitch_spec",
    "load_table_csv",
    "load_tables_json",
    "psnr",
    "quantize_table",
    "save_table_csv",
    "save_tables_json",
    "segment_map",
    "simulate_overlap",
    "ssim",
    "stitch_hdr",
    "sub_bin_masses",
    "synthesize_all",
    "synthesize_benchmark",
    "time_op",
    "write_png",
]
