"""textcrop: attention-guided crop planning for text-rich images, plus the
evaluation toolkit for scoring multimodal model runs on them."""

__version__ = "0.1.0"

from .attention import (
    DEFAULT_EPSILON,
    DEFAULT_LAYER_COUNT,
    DEFAULT_LAYER_START,
    GENERIC_INSTRUCTION,
    AttentionDump,
    LayerSelection,
    RelativeAttentionStack,
    load_dump,
    relative_attention,
    select_salient_layer,
    write_dump,
)
from .boxes import (
    DEFAULT_ENLARGE,
    Box,
    CropPlan,
    WordBox,
    iou,
    load_word_boxes,
    make_crop_plan,
    refine_box,
)
from .dedup import (
    DEFAULT_DEDUP_THRESHOLD,
    DedupResult,
    EmbeddingSet,
    dedup,
    load_embeddings,
    write_embeddings,
)
from .harness import (
    GEN_TAGS,
    REAL_TAGS,
    MetricReport,
    ResponseRecord,
    Sample,
    answer_distribution,
    extract_choice,
    extract_final_answer,
    load_manifest,
    load_responses,
    manifest_stats,
    rotate_image,
    score_run,
)
from .judge import JudgeClient, JudgeConfig, judge_run, parse_verdict
from .ocr_metrics import (
    TextPair,
    bleu,
    edit_distance,
    edit_distance_norm,
    meteor,
    score_pairs,
    tokenize,
    word_prf,
)
from .pipeline import plan_crop, plan_crop_from_paths, plan_to_json
from .window_search import (
    ASPECT_RATIOS,
    BASE_HEIGHT_PX,
    HEIGHT_MULTIPLIERS,
    Placement,
    WindowChoice,
    WindowSpec,
    best_position,
    grid_to_pixels,
    reshape_to_grid,
    search_all,
    select_best_window,
    window_set,
)

__all__ = [
    "__version__",
    "AttentionDump",
    "RelativeAttentionStack",
    "LayerSelection",
    "GENERIC_INSTRUCTION",
    "DEFAULT_EPSILON",
    "DEFAULT_LAYER_START",
    "DEFAULT_LAYER_COUNT",
    "load_dump",
    "write_dump",
    "relative_attention",
    "select_salient_layer",
    "Box",
    "WordBox",
    "CropPlan",
    "DEFAULT_ENLARGE",
    "iou",
    "refine_box",
    "make_crop_plan",
    "load_word_boxes",
    "WindowSpec",
    "Placement",
    "WindowChoice",
    "BASE_HEIGHT_PX",
    "HEIGHT_MULTIPLIERS",
    "ASPECT_RATIOS",
    "reshape_to_grid",
    "window_set",
    "best_position",
    "search_all",
    "select_best_window",
    "grid_to_pixels",
    "TextPair",
    "tokenize",
    "edit_distance",
    "edit_distance_norm",
    "word_prf",
    "bleu",
    "meteor",
    "score_pairs",
    "EmbeddingSet",
    "DedupResult",
    "DEFAULT_DEDUP_THRESHOLD",
    "dedup",
    "load_embeddings",
    "write_embeddings",
    "Sample",
    "ResponseRecord",
    "MetricReport",
    "GEN_TAGS",
    "REAL_TAGS",
    "load_manifest",
    "load_responses",
    "extract_choice",
    "extract_final_answer",
    "score_run",
    "answer_distribution",
    "manifest_stats",
    "rotate_image",
    "JudgeClient",
    "JudgeConfig",
    "parse_verdict",
    "judge_run",
    "plan_crop",
    "plan_crop_from_paths",
    "plan_to_json",
]
