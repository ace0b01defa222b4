"""Directed community detection with forward-backward Green coordinates.

Pipeline: teleported forward and backward random walks on a directed graph,
truncated diffusive Green profiles, a forward-backward cosine coordinate,
spherical K-means for disjoint communities and adaptive cosine thresholds
for overlapping ones.
"""

__version__ = "0.1.0"

from .cluster import KMeansConfig, detect_disjoint, embed_graph, spherical_kmeans
from .communities import Cover, Partition, read_cover, read_partition, write_cover, write_partition
from .embed import FBEmbedding, build_embedding, cos_fb, dist_fb, load_embedding, save_embedding
from .generators import (DcsbmConfig, GaussPartitionConfig, OverlapPpmConfig,
                         block_constant_graph, gen_dcsbm, gen_gauss_partition, gen_overlap_ppm)
from .graph import DiGraph, GraphError, build_graph, from_arrays, read_edge_list, write_edge_list
from .markov import (WalkModel, apply_transition, diagnostic_coordinates, green_diffusive,
                     green_full, hitting_times, make_walk_model)
from .metrics import (ari, disjoint_report, nmi, onmi, overlap_f1, overlap_report, pair_f1,
                      q_dir)
from .overlap import OverlapParams, expand_overlap

__all__ = [
    "Cover", "DcsbmConfig", "DiGraph", "FBEmbedding", "GaussPartitionConfig", "GraphError",
    "KMeansConfig", "OverlapParams", "OverlapPpmConfig", "Partition", "WalkModel",
    "apply_transition", "ari", "block_constant_graph", "build_embedding", "build_graph",
    "cos_fb", "detect_disjoint", "diagnostic_coordinates", "disjoint_report", "dist_fb",
    "embed_graph", "expand_overlap", "from_arrays", "gen_dcsbm", "gen_gauss_partition",
    "gen_overlap_ppm", "green_diffusive", "green_full", "hitting_times", "load_embedding",
    "make_walk_model", "nmi", "onmi", "overlap_f1", "overlap_report", "pair_f1", "q_dir",
    "read_cover", "read_edge_list", "read_partition", "save_embedding", "spherical_kmeans",
    "write_cover", "write_edge_list", "write_partition",
]
