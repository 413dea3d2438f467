"""HDR burst synthesis, exposure fusion, and tunable tone-mapping toolkit."""

from .buffers import ColorSpace, ImageBuffer, InvalidImageError, constant_image
from .burst import (
    BurstSpec,
    HandshakePool,
    demosaic_bilinear,
    generate_handshake_pool,
    mosaic_rggb,
    read_pool,
    sample_handshake_group,
    synthesize_burst,
    warp,
    write_pool,
)
from .color import luma, rgb_to_ycbcr, ycbcr_to_rgb
from .enhance import (
    CaptureMetadata,
    HeuristicConfig,
    MetadataRegistry,
    ToneMaps,
    TuningProfile,
    default_profile,
    encode_metadata,
    fuse_tone,
    heuristic_maps,
    modulate,
    read_tmaps,
    solve_oracle_maps,
    write_tmaps,
)
from .fusion import ExposureFrame, deghost, equalize_exposure, fuse_hdr, mertens_fuse
from .homography import EstimationFailedError, Homography, estimate_homography
from .io import read_image, read_lfr, write_lfr, write_png8, write_png16
from .lut import InvalidLutError, Lut1D, apply_lut, identity_lut
from .metrics import (
    ConvFeatureExtractor,
    IdentityExtractor,
    LossWeights,
    apl,
    generator_objective,
    make_default_extractor,
    psnr,
    ssim,
    tonemap_loss,
)
from .pipeline import PipelineConfig, compute_heuristic_maps, compute_oracle_maps, render_tonemap
from .pyramid import Pyramid, PyramidKind, build_gaussian, build_laplacian, reconstruct
from .reference import ReferenceConfig, reference_tonemap, render_targets
from .resample import resize_bilinear
from .tiling import TilePlan, auto_grid, plan_tiles, run_tiled, seam_energy
from .tonemap_lite import (
    ExposurePair,
    GlobalContext,
    LiteParams,
    compute_global_context,
    tonemap_lite,
)

__version__ = "0.1.0"
