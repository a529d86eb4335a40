"""spanlab: a desk-scale laboratory for spanning-subgraph embedding.

Regular-pair testing, backbone-graph partitioning, bandwidth and
zero-free colouring of target graphs, pre-embedding over bad vertices,
a candidate-set embedder, and an explicit adversarial family with
certified non-containment.
"""

from .graph import Graph, GnpParams, generate_gnp, min_degree

__all__ = ["Graph", "GnpParams", "generate_gnp", "min_degree"]
__version__ = "0.1.0"
