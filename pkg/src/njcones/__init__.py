"""Neighbor-Joining with agglomeration orders, Motzkin-path counting and cone-fraction estimates."""
from .dissim import DissimilarityMap, parse_matrix, sample_uniform, validate
from .newick import canonicalize, parse, serialize, strip_order
from .nj_core import TieBreakPolicy, nj_path, run_nj

__version__ = "0.1.0"

__all__ = [
    "DissimilarityMap", "TieBreakPolicy", "canonicalize", "nj_path", "parse",
    "parse_matrix", "run_nj", "sample_uniform", "serialize", "strip_order", "validate",
]
