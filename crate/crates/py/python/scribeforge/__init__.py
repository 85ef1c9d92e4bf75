"""Handwriting line synthesis (StackMix), blot augmentation and HTR metrics."""

from ._scribeforge import (
    BoundarySet,
    RasterImage,
    Rng,
    Synthesizer,
    accuracy,
    apply_handwritten_blots,
    bernstein,
    bezier_point,
    cer,
    evaluate,
    extract_boundaries,
    filter_corpus,
    forced_align,
    levenshtein,
    rasterize_stroke,
    read_posteriors,
    sample_curve,
    tokenize,
    wer,
    write_posteriors,
)

__all__ = [
    "BoundarySet",
    "RasterImage",
    "Rng",
    "Synthesizer",
    "accuracy",
    "apply_handwritten_blots",
    "bernstein",
    "bezier_point",
    "cer",
    "evaluate",
    "extract_boundaries",
    "filter_corpus",
    "forced_align",
    "levenshtein",
    "rasterize_stroke",
    "read_posteriors",
    "sample_curve",
    "tokenize",
    "wer",
    "write_posteriors",
]
