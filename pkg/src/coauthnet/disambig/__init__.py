from .names import (
    NormalizedName,
    UnparseableName,
    first_names_compatible,
    is_initial_expansion,
    is_pinyin_like,
    load_pinyin,
    load_variants,
    normalize_name,
    string_similarity,
)
from .stages import (
    CanonicalAuthor,
    DisambigConfig,
    DisambigResult,
    SimilarityGraph,
    build_similarity_graph,
    cooccurrence_merge,
    cooccurrence_score,
    disambiguate,
    jaccard,
    merge_clusters,
    resolve_canonical,
)
from .io import read_mapping, write_audit, write_mapping

__all__ = [
    "CanonicalAuthor", "DisambigConfig", "DisambigResult", "NormalizedName", "SimilarityGraph",
    "UnparseableName", "build_similarity_graph", "cooccurrence_merge", "cooccurrence_score",
    "disambiguate", "first_names_compatible", "is_initial_expansion", "is_pinyin_like", "jaccard", "load_pinyin", "load_variants",
    "merge_clusters", "normalize_name", "read_mapping", "resolve_canonical", "string_similarity",
    "write_audit", "write_mapping",
]
