"""Layout tokens: schema, grammar, graphs, GED and layout metrics."""
from .ged import GedResult, ged, ged_details
from .grammar import (
    Diagnostic,
    ParseResult,
    PostProcessReport,
    build_graph,
    layout_only,
    parse_layout,
    postprocess,
    text_only,
    tokenize,
)
from .graph import LayoutGraph
from .metrics import (
    LoerReport,
    TaggedTranscription,
    extract_subsequences,
    load_transcriptions,
    loer,
    loer_details,
    map_cer,
    map_cer_corpus,
    pper,
)
from .schema import LayoutClass, LayoutSchema, flat_schema, make_schema, read_schema, rimes_schema

__all__ = [
    "Diagnostic",
    "GedResult",
    "LayoutClass",
    "LayoutGraph",
    "LayoutSchema",
    "LoerReport",
    "ParseResult",
    "PostProcessReport",
    "TaggedTranscription",
    "build_graph",
    "extract_subsequences",
    "flat_schema",
    "ged",
    "ged_details",
    "layout_only",
    "load_transcriptions",
    "loer",
    "loer_details",
    "make_schema",
    "map_cer",
    "map_cer_corpus",
    "parse_layout",
    "postprocess",
    "pper",
    "read_schema",
    "rimes_schema",
    "text_only",
    "tokenize",
]
