"""firelabel: fire-segmentation pseudo-labels and per-pixel temperature
supervision from paired RGB / thermal / radiometric-TIFF UAV imagery."""

from .radiometric import (
    CalibrationPolicy,
    SaturationStats,
    TemperatureGrid,
    TiffLoadError,
    calibrate,
    grid_stats,
    load_tiff,
    saturation_report,
)
from .cv_kernels import (
    DegenerateHistogramError,
    OtsuResult,
    binarize,
    canny,
    euclidean_distance_transform,
    gaussian_blur,
    iou,
    otsu_threshold,
    ssim,
    thermal_jpg_to_gray,
)
from .autopoint import AutopointConfig, PointPrompt, PointSet, autolocate
from .proposer import (
    MaskProposal,
    ProposalSet,
    ProposerError,
    propose_baseline,
    propose_external,
)
from .topsis import (
    CriterionSpec,
    DecisionMatrix,
    TopsisResult,
    build_criteria,
    select_mask,
    topsis_rank,
)
from .losses import (
    LossWeights,
    cross_entropy,
    dice_loss,
    flame_l1,
    scale_temperature,
    student_total,
    teacher_loss,
)
from .metrics import SegScores, TempAccuracy, batch_aggregate, seg_scores, temp_tolerance_accuracy
from .dataset import ImageRecord, Manifest, counts, discover, split, validate
from .synth import BlobSpec, SceneSpec, gen_corpus, gen_scene, write_scene
from .pipeline import PipelineConfig, evaluate_run, run_pipeline

__version__ = "0.1.0"
