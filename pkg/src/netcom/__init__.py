"""Nearest-neighbor search and k-central community detection on complex networks."""

from .embed import Baseline, EmbedConfig, Embedding, NodeVector, Phi, Sigma, auto_lambda, baseline_similarity, distance, lx_row, similarity
from .errors import DomainError, EmptyIndexError, NetcomError, ParseError, UndefinedMeasureError, UndefinedSimilarityError
from .graph import Graph, degree, from_edges, neighbors, parse_edge_list, parse_edge_text
from .kcentral import Backend, Partition, cost, detect_communities, farthest_first_init, kcentral_iterate, select_k
from .lsh import LshIndex, LshParams, ann_query, build_lsh, hash_key
from .mtree import MTree, QueryStats, build_mtree, nn_query
from .quality import QualityReport, conductance, modularity, quality_report

__version__ = "0.1.0"
