"""Morphological transduction: phonology, regular rules, encoder-decoder and analysis tools."""

from ._morphlab import (
    Model,
    MorphError,
    chi_squared_2x2,
    classify_error,
    gerund,
    micro_ushape,
    regular_past,
    spearman,
    split,
    synth_corpus,
    third_singular,
    tokenize,
    wickelfeature_count,
    wickelfeatures,
    wickelphones,
)

__all__ = [
    "Model",
    "MorphError",
    "chi_squared_2x2",
    "classify_error",
    "gerund",
    "micro_ushape",
    "regular_past",
    "spearman",
    "split",
    "synth_corpus",
    "third_singular",
    "tokenize",
    "wickelfeature_count",
    "wickelfeatures",
    "wickelphones",
]
