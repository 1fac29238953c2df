"""Inference of customer-provider and sibling AS relationships from BGP paths
via a degree-corrected MAX2SAT, its vector relaxation and hyperplane rounding."""

from .ingest import AdjacentPair, AsGraph, PathSet, build_graph, extract_pairs, parse_paths
from .pipeline import RunConfig, alpha_sweep, infer
from .ranking import agreement, path_valid, rank, reachability
from .relmap import RelationshipMap

__all__ = [
    "AdjacentPair", "AsGraph", "PathSet", "RelationshipMap", "RunConfig",
    "agreement", "alpha_sweep", "build_graph", "extract_pairs", "infer",
    "parse_paths", "path_valid", "rank", "reachability",
]
