"""Co-authorship network construction and popularity/size analysis for topic corpora."""

__version__ = "0.1.0"

METRIC_NAMES = (
    "collaboration_rate",
    "repeated_collab_rate",
    "degree_centralization",
    "degree_assortativity",
    "modularity",
    "small_world",
    "coreness_ratio",
    "robustness_ratio",
    "avg_constraint",
    "avg_effective_size",
)

METRIC_LABELS = {
    "collaboration_rate": "Collaboration Rate",
    "repeated_collab_rate": "Repeated Collab. Rate",
    "degree_centralization": "Degree Centralization",
    "degree_assortativity": "Degree Assortativity",
    "modularity": "Modularity",
    "small_world": "Small World Coeff.",
    "coreness_ratio": "Coreness Ratio",
    "robustness_ratio": "Robustness Ratio",
    "avg_constraint": "Avg. Constraint",
    "avg_effective_size": "Avg. Effective Size",
}
