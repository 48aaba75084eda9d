"""Multifacet video annotation and text-video retrieval evaluation."""

from .chunk import (
    CHUNK_VERSION,
    ChunkParseError,
    InformationChunk,
    ParsedChunk,
    compose_chunk,
    parse_chunk,
    reduce_visual,
)
from .experts import (
    BackendRef,
    DialogueAnnotation,
    ExpertError,
    ProtocolError,
    TransportError,
    VisualAnnotation,
    caption_frame,
    detect_emotion,
    transcribe,
)
from .llm import (
    HolisticCaption,
    SamplingParams,
    ValidationReport,
    complete,
    validate_caption,
)
from .manifest import (
    DatasetManifest,
    ExclusionReport,
    ManifestError,
    VideoAsset,
    exclude_audioless,
    load_manifest,
    write_manifest,
)
from .metrics import (
    BenchmarkGrid,
    MetricsCell,
    SimilarityMatrix,
    average_difference,
    build_grid,
    recall_at_k,
    render_report,
)
from .prompts import DEFAULT_STRATEGY, PromptStrategy, RenderedPrompt, render_prompt
from .store import AnnotationRecord, read_annotations, write_annotations
from .style import StyleAnnotation, kmeans_colors, nearest_color_name, video_style
from .tone import EMOTIONS, NO_FACE, ToneAnnotation, aggregate_tone

__version__ = "0.1.0"

__all__ = [
    "CHUNK_VERSION",
    "ChunkParseError",
    "InformationChunk",
    "ParsedChunk",
    "compose_chunk",
    "parse_chunk",
    "reduce_visual",
    "BackendRef",
    "DialogueAnnotation",
    "ExpertError",
    "ProtocolError",
    "TransportError",
    "VisualAnnotation",
    "caption_frame",
    "detect_emotion",
    "transcribe",
    "HolisticCaption",
    "SamplingParams",
    "ValidationReport",
    "complete",
    "validate_caption",
    "DatasetManifest",
    "ExclusionReport",
    "ManifestError",
    "VideoAsset",
    "exclude_audioless",
    "load_manifest",
    "write_manifest",
    "BenchmarkGrid",
    "MetricsCell",
    "SimilarityMatrix",
    "average_difference",
    "build_grid",
    "recall_at_k",
    "render_report",
    "DEFAULT_STRATEGY",
    "PromptStrategy",
    "RenderedPrompt",
    "render_prompt",
    "AnnotationRecord",
    "read_annotations",
    "write_annotations",
    "StyleAnnotation",
    "kmeans_colors",
    "nearest_color_name",
    "video_style",
    "EMOTIONS",
    "NO_FACE",
    "ToneAnnotation",
    "aggregate_tone",
    "__version__",
]
