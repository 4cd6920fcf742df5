"""Reading, preprocessing and describing bracketed treebanks."""
from .stats import TreeStats, tree_stats
from .tagmap import TagMap, base_label, english_tagmap, japanese_tagmap, load_tagmap
from .transforms import (
    SCHEMES,
    NullMarkers,
    binarize,
    collapse_unary,
    preprocess,
    preprocess_corpus,
    reduce_tags,
    remove_nulls,
)
from .trees import (
    Node,
    ParseError,
    ParseTree,
    iter_bracketed,
    parse_bracketed,
    read_treebank,
    write_bracketed,
)

__all__ = [
    "SCHEMES",
    "Node",
    "NullMarkers",
    "ParseError",
    "ParseTree",
    "TagMap",
    "TreeStats",
    "base_label",
    "binarize",
    "collapse_unary",
    "english_tagmap",
    "iter_bracketed",
    "japanese_tagmap",
    "load_tagmap",
    "parse_bracketed",
    "preprocess",
    "preprocess_corpus",
    "read_treebank",
    "reduce_tags",
    "remove_nulls",
    "tree_stats",
    "write_bracketed",
]
